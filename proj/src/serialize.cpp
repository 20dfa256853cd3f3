#include "scc/serialize.hpp"

#include <cstring>
#include <fstream>

#include "scc/utils.hpp"

namespace scc {

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

uint32_t get_u32(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in) {
    uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    const uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(cat("cannot write tensor file: ", path.string()));
    out.write("SCCT", 4);
    put_u32(out, kTensorContainerVersion);
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) put_u64(out, static_cast<uint64_t>(d));
    for (double v : t.data()) put_f64(out, v);
    if (!out) throw std::runtime_error(cat("failed writing tensor file: ", path.string()));
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(cat("cannot open tensor file: ", path.string()));
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SCCT", 4) != 0)
        throw std::runtime_error(cat("bad tensor container magic in ", path.string()));
    const uint32_t version = get_u32(in);
    if (version != kTensorContainerVersion)
        throw std::runtime_error(cat("unsupported tensor container version ", version, " in ",
                                     path.string()));
    const uint32_t rank = get_u32(in);
    if (!in || rank > 8)
        throw std::runtime_error(cat("implausible tensor rank in ", path.string()));
    Shape shape;
    for (uint32_t i = 0; i < rank; ++i) {
        const uint64_t d = get_u64(in);
        if (!in || d == 0 || d > (1ull << 32))
            throw std::runtime_error(cat("implausible tensor dimension in ", path.string()));
        shape.push_back(static_cast<int>(d));
    }
    std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
    for (double& v : data) v = get_f64(in);
    if (!in) throw std::runtime_error(cat("truncated tensor payload in ", path.string()));
    return Tensor::from_data(std::move(shape), std::move(data));
}

}  // namespace scc
