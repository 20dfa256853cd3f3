#pragma once

#include <filesystem>

#include "scc/tensor.hpp"

namespace scc {

// Flat binary tensor container: magic "SCCT", u32 version, u32 rank, u64 dims,
// then row-major little-endian float64 payload.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

constexpr uint32_t kTensorContainerVersion = 1;

}  // namespace scc
