#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scc/box.hpp"

namespace scc {

struct YoloLabel {
    int class_id = 0;
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
    BoxCxcywh box() const { return {cx, cy, w, h}; }
};

struct Image8 {
    int width = 0, height = 0;
    std::vector<uint8_t> pixels;  // RGB, row-major, 3 bytes per pixel
};

struct LabeledImage {
    Image8 image;
    std::vector<YoloLabel> labels;
    std::string stem;
    std::string source_path;
};

// One label per non-empty line: "<class> <cx> <cy> <w> <h>". Errors carry the
// offending line number.
std::vector<YoloLabel> parse_label_file(const std::string& text);

// 6-decimal fixed point, single spaces, newline-terminated lines.
std::string write_label_file(const std::vector<YoloLabel>& labels);

Image8 read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image8& image);

struct LoadResult {
    std::vector<LabeledImage> items;  // lexicographic by stem
    std::vector<std::string> warnings;
};

// Loads root/images/*.ppm with matching root/labels/<stem>.txt. A missing
// label file is a hard error.
LoadResult load_dataset(const std::filesystem::path& root);

struct DatasetSplit {
    std::vector<LabeledImage> train, test;
    double ratio = 0.0;
    std::vector<std::string> warnings;
};

// Seeded shuffle then prefix split; |train| = round(ratio * n).
DatasetSplit split_dataset(std::vector<LabeledImage> items, double ratio, uint64_t seed);

struct SynthSpec {
    int width = 64, height = 64;
    int num_classes = 3;  // 0 = ellipse, 1 = rectangle, 2 = triangle
    int num_images = 100;
    int min_objects = 1, max_objects = 3;
    uint64_t seed = 0;
};

// Writes images/ and labels/ under out_root: filled shapes on a dim noisy
// background, one distinct bright color per object, labels taken from the
// exact pixel extents of each painted shape. Byte-deterministic per seed.
void generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_root);

}  // namespace scc
