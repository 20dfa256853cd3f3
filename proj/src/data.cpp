#include "scc/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scc/utils.hpp"

namespace scc {

namespace fs = std::filesystem;

std::vector<YoloLabel> parse_label_file(const std::string& text) {
    std::vector<YoloLabel> labels;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::array<std::string, 5> fields;
        int count = 0;
        std::string tok;
        while (ls >> tok) {
            if (count < 5) fields[static_cast<size_t>(count)] = tok;
            ++count;
        }
        if (count != 5)
            throw std::invalid_argument(cat("label line ", lineno, ": expected 5 fields, got ",
                                            count));
        YoloLabel label;
        try {
            size_t pos = 0;
            label.class_id = std::stoi(fields[0], &pos);
            if (pos != fields[0].size()) throw std::invalid_argument("trailing");
            double* coords[4] = {&label.cx, &label.cy, &label.w, &label.h};
            for (int i = 0; i < 4; ++i) {
                *coords[i] = std::stod(fields[static_cast<size_t>(i + 1)], &pos);
                if (pos != fields[static_cast<size_t>(i + 1)].size())
                    throw std::invalid_argument("trailing");
            }
        } catch (const std::exception&) {
            throw std::invalid_argument(cat("label line ", lineno, ": non-numeric field"));
        }
        if (label.class_id < 0)
            throw std::invalid_argument(cat("label line ", lineno, ": negative class ",
                                            label.class_id));
        const double coords[4] = {label.cx, label.cy, label.w, label.h};
        for (double v : coords)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument(cat("label line ", lineno, ": coordinate ", v,
                                                " outside [0,1]"));
        if (label.w <= 0.0 || label.h <= 0.0)
            throw std::invalid_argument(cat("label line ", lineno, ": box size must be positive"));
        labels.push_back(label);
    }
    return labels;
}

std::string write_label_file(const std::vector<YoloLabel>& labels) {
    std::ostringstream os;
    for (const auto& l : labels) {
        os << l.class_id << " " << format_fixed(l.cx, 6) << " " << format_fixed(l.cy, 6) << " "
           << format_fixed(l.w, 6) << " " << format_fixed(l.h, 6) << "\n";
    }
    return os.str();
}

namespace {

int ppm_read_token(std::istream& in) {
    // Skips whitespace and '#' comments, then reads one decimal value.
    char c;
    while (in.get(c)) {
        if (c == '#') {
            while (in.get(c) && c != '\n') {
            }
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            in.unget();
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw std::runtime_error("ppm: truncated header");
    return value;
}

}  // namespace

Image8 read_ppm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(cat("cannot open image: ", path.string()));
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P6") throw std::runtime_error(cat("not a binary PPM (P6): ", path.string()));
    Image8 img;
    img.width = ppm_read_token(in);
    img.height = ppm_read_token(in);
    const int maxval = ppm_read_token(in);
    if (img.width <= 0 || img.height <= 0 || maxval != 255)
        throw std::runtime_error(cat("unsupported PPM header in ", path.string()));
    in.get();  // single whitespace after maxval
    img.pixels.resize(static_cast<size_t>(img.width) * img.height * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error(cat("truncated PPM payload in ", path.string()));
    return img;
}

void write_ppm(const fs::path& path, const Image8& image) {
    if (image.pixels.size() != static_cast<size_t>(image.width) * image.height * 3)
        throw std::invalid_argument("write_ppm: pixel buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(cat("cannot write image: ", path.string()));
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw std::runtime_error(cat("failed writing image: ", path.string()));
}

LoadResult load_dataset(const fs::path& root) {
    LoadResult result;
    const fs::path images_dir = root / "images";
    const fs::path labels_dir = root / "labels";
    if (!fs::is_directory(images_dir) || !fs::is_directory(labels_dir)) {
        if (!fs::is_directory(root))
            throw std::runtime_error(cat("dataset root does not exist: ", root.string()));
        result.warnings.push_back(cat("dataset root ", root.string(),
                                      " has no images/ and labels/ directories"));
        return result;
    }
    std::vector<fs::path> image_files;
    for (const auto& entry : fs::directory_iterator(images_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".ppm")
            image_files.push_back(entry.path());
    std::sort(image_files.begin(), image_files.end(),
              [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });
    if (image_files.empty())
        result.warnings.push_back(cat("no .ppm images under ", images_dir.string()));

    for (const auto& img_path : image_files) {
        const std::string stem = img_path.stem().string();
        const fs::path label_path = labels_dir / (stem + ".txt");
        if (!fs::exists(label_path))
            throw std::runtime_error(cat("missing label file for image stem '", stem, "'"));
        LabeledImage item;
        item.image = read_ppm(img_path);
        std::ifstream lf(label_path);
        std::stringstream buf;
        buf << lf.rdbuf();
        try {
            item.labels = parse_label_file(buf.str());
        } catch (const std::exception& e) {
            throw std::runtime_error(cat(label_path.string(), ": ", e.what()));
        }
        item.stem = stem;
        item.source_path = img_path.string();
        result.items.push_back(std::move(item));
    }
    return result;
}

DatasetSplit split_dataset(std::vector<LabeledImage> items, double ratio, uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument(cat("split ratio ", ratio, " outside (0,1)"));
    if (items.empty()) throw std::invalid_argument("cannot split an empty dataset");

    std::vector<size_t> order(items.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(Rng::mix(seed, fnv1a64("dataset-split")));
    rng.shuffle(order);

    const auto n_train = static_cast<size_t>(
        std::llround(ratio * static_cast<double>(items.size())));
    DatasetSplit split;
    split.ratio = ratio;
    for (size_t i = 0; i < order.size(); ++i)
        (i < n_train ? split.train : split.test).push_back(std::move(items[order[i]]));
    if (split.test.empty())
        split.warnings.push_back(cat("test side is empty (n=", order.size(), ", ratio=", ratio,
                                     ")"));
    return split;
}

namespace {

struct PaintExtent {
    int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
    bool any() const { return max_x >= 0; }
    void add(int x, int y) {
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
    }
};

constexpr std::array<std::array<uint8_t, 3>, 8> kPalette = {{{230, 60, 60},
                                                             {60, 230, 60},
                                                             {70, 90, 235},
                                                             {235, 220, 60},
                                                             {230, 70, 230},
                                                             {60, 225, 225},
                                                             {240, 150, 60},
                                                             {160, 90, 240}}};

void put_pixel(Image8& img, int x, int y, const std::array<uint8_t, 3>& rgb, PaintExtent& ext) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    const size_t off = (static_cast<size_t>(y) * img.width + x) * 3;
    img.pixels[off] = rgb[0];
    img.pixels[off + 1] = rgb[1];
    img.pixels[off + 2] = rgb[2];
    ext.add(x, y);
}

// Shapes are painted at pixel centers; returns the extent of painted pixels.
PaintExtent paint_shape(Image8& img, int shape, double cx, double cy, double a, double b,
                        const std::array<uint8_t, 3>& rgb) {
    PaintExtent ext;
    const int x0 = static_cast<int>(std::floor(cx - a - 1));
    const int x1 = static_cast<int>(std::ceil(cx + a + 1));
    const int y0 = static_cast<int>(std::floor(cy - b - 1));
    const int y1 = static_cast<int>(std::ceil(cy + b + 1));
    switch (shape) {
        case 0:  // ellipse
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = (x + 0.5 - cx) / a;
                    const double dy = (y + 0.5 - cy) / b;
                    if (dx * dx + dy * dy <= 1.0) put_pixel(img, x, y, rgb, ext);
                }
            break;
        case 1:  // rectangle
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (std::abs(x + 0.5 - cx) <= a && std::abs(y + 0.5 - cy) <= b)
                        put_pixel(img, x, y, rgb, ext);
            break;
        default: {  // triangle: apex up, base down
            const double vx[3] = {cx, cx - a, cx + a};
            const double vy[3] = {cy - b, cy + b, cy + b};
            auto edge = [&](int i, int j, double px, double py) {
                return (vx[j] - vx[i]) * (py - vy[i]) - (vy[j] - vy[i]) * (px - vx[i]);
            };
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double px = x + 0.5, py = y + 0.5;
                    const double e0 = edge(0, 1, px, py);
                    const double e1 = edge(1, 2, px, py);
                    const double e2 = edge(2, 0, px, py);
                    if ((e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0))
                        put_pixel(img, x, y, rgb, ext);
                }
            break;
        }
    }
    return ext;
}

bool boxes_overlap(const PaintExtent& a, const PaintExtent& b, int gap) {
    return a.min_x - gap <= b.max_x && b.min_x - gap <= a.max_x && a.min_y - gap <= b.max_y &&
           b.min_y - gap <= a.max_y;
}

}  // namespace

void generate_synthetic(const SynthSpec& spec, const fs::path& out_root) {
    if (spec.width < 16 || spec.height < 16)
        throw std::invalid_argument("synthetic images must be at least 16x16");
    if (spec.num_classes < 1 || spec.num_classes > 3)
        throw std::invalid_argument(cat("synthetic class count ", spec.num_classes,
                                        " outside [1,3]"));
    if (spec.num_images <= 0) throw std::invalid_argument("num_images must be positive");
    if (spec.min_objects < 1 || spec.max_objects < spec.min_objects ||
        spec.max_objects > static_cast<int>(kPalette.size()))
        throw std::invalid_argument(cat("objects-per-image range [", spec.min_objects, ",",
                                        spec.max_objects, "] invalid (max ", kPalette.size(),
                                        ")"));

    std::error_code ec;
    fs::create_directories(out_root / "images", ec);
    fs::create_directories(out_root / "labels", ec);
    if (!fs::is_directory(out_root / "images") || !fs::is_directory(out_root / "labels"))
        throw std::runtime_error(cat("cannot create dataset directories under ",
                                     out_root.string()));

    Rng rng(Rng::mix(spec.seed, fnv1a64("synthetic-dataset")));
    const int digits = 5;

    for (int i = 0; i < spec.num_images; ++i) {
        Image8 img;
        img.width = spec.width;
        img.height = spec.height;
        img.pixels.resize(static_cast<size_t>(spec.width) * spec.height * 3);
        for (size_t p = 0; p < img.pixels.size(); p += 3) {
            const int base = 20 + rng.uniform_int(60);
            img.pixels[p] = static_cast<uint8_t>(base + rng.uniform_int(21));
            img.pixels[p + 1] = static_cast<uint8_t>(base + rng.uniform_int(21));
            img.pixels[p + 2] = static_cast<uint8_t>(base + rng.uniform_int(21));
        }

        const int count = spec.min_objects + rng.uniform_int(spec.max_objects -
                                                             spec.min_objects + 1);
        std::vector<PaintExtent> placed;
        std::vector<YoloLabel> labels;
        for (int obj = 0; obj < count; ++obj) {
            const int cls = rng.uniform_int(spec.num_classes);
            const auto& rgb = kPalette[static_cast<size_t>(obj)];
            double max_half = std::min(spec.width, spec.height) / 3.5;
            PaintExtent ext;
            // Retry with shrinking size until the new shape clears the others.
            for (int attempt = 0; attempt < 200; ++attempt) {
                if (attempt > 0 && attempt % 40 == 0) max_half = std::max(4.0, max_half * 0.7);
                const double a = rng.uniform(4.0, max_half);
                const double b = rng.uniform(4.0, max_half);
                const double cx = rng.uniform(2.0, spec.width - 2.0);
                const double cy = rng.uniform(2.0, spec.height - 2.0);
                PaintExtent probe;
                probe.add(static_cast<int>(std::floor(cx - a - 1)),
                          static_cast<int>(std::floor(cy - b - 1)));
                probe.add(static_cast<int>(std::ceil(cx + a + 1)),
                          static_cast<int>(std::ceil(cy + b + 1)));
                bool clear = true;
                for (const auto& other : placed)
                    if (boxes_overlap(probe, other, 2)) clear = false;
                if (!clear) continue;
                ext = paint_shape(img, cls % 3, cx, cy, a, b, rgb);
                if (ext.any()) break;
            }
            if (!ext.any())
                throw std::runtime_error(cat("could not place object ", obj, " in image ", i,
                                             "; image too small for requested objects"));
            placed.push_back(ext);

            YoloLabel label;
            label.class_id = cls;
            const double bw = ext.max_x - ext.min_x + 1;
            const double bh = ext.max_y - ext.min_y + 1;
            label.cx = (ext.min_x + ext.max_x + 1) / (2.0 * spec.width);
            label.cy = (ext.min_y + ext.max_y + 1) / (2.0 * spec.height);
            label.w = bw / spec.width;
            label.h = bh / spec.height;
            labels.push_back(label);
        }

        std::ostringstream stem;
        stem << "img_";
        stem.width(digits);
        stem.fill('0');
        stem << i;
        write_ppm(out_root / "images" / (stem.str() + ".ppm"), img);
        std::ofstream lf(out_root / "labels" / (stem.str() + ".txt"), std::ios::binary);
        if (!lf) throw std::runtime_error("cannot write label file");
        lf << write_label_file(labels);
    }
}

}  // namespace scc
