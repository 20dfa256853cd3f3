#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scc/tensor.hpp"
#include "scc/utils.hpp"

namespace scc {

// Spatial reconstruction unit: group-norm the input, score channels by the
// norm's scale weights, split them into an informative and a non-informative
// set, and cross-reconstruct the two halves.
struct SRUConfig {
    int groups = 4;
    double gate_threshold = 0.5;  // applied to sigmoid-mapped channel weights
};

// Channel reconstruction unit: split channels at ratio alpha, squeeze both
// slabs 1x1 by squeeze_ratio, run a group-wise + point-wise rich path against
// a cheap reuse path, and fuse with softmax gates over the two paths.
struct CRUConfig {
    double alpha = 0.5;
    int squeeze_ratio = 2;
    int gwc_kernel = 3;
    int gwc_groups = 2;
};

struct SEConfig {
    int reduction = 16;
};

enum class BlockKind { None, SE, SCConv };

std::string block_kind_name(BlockKind kind);
BlockKind block_kind_from_name(const std::string& name);

struct SRUParams {
    Tensor gamma, beta;  // group-norm affine, shape (C)
};

struct CRUParams {
    // All path convolutions are bias-free.
    Tensor squeeze_up_w;   // (up/r,  up,  1, 1)
    Tensor squeeze_low_w;  // (low/r, low, 1, 1)
    Tensor gwc_w;          // (C, (up/r)/g, k, k)
    Tensor pwc_up_w;       // (C, up/r, 1, 1)
    Tensor pwc_low_w;      // (C - low/r, low/r, 1, 1)
};

struct SEParams {
    Tensor fc1_w, fc1_b;  // C -> C/r
    Tensor fc2_w, fc2_b;  // C/r -> C
};

void validate_sru(int channels, const SRUConfig& cfg);
void validate_cru(int channels, const CRUConfig& cfg);
void validate_se(int channels, const SEConfig& cfg);

SRUParams make_sru_params(int channels, const SRUConfig& cfg);
CRUParams make_cru_params(int channels, const CRUConfig& cfg, Rng& rng);
SEParams make_se_params(int channels, const SEConfig& cfg, Rng& rng);

// Per-channel informative mask from the group-norm scale: w_i = |g_i|/sum|g|,
// gated = sigmoid(C * w_i), informative iff gated >= threshold (ties count as
// informative). The mask is a constant in the gradient.
std::vector<uint8_t> sru_informative_mask(const Tensor& gamma, double gate_threshold);

Tensor sru_forward(Tape& tape, const Tensor& x, const SRUConfig& cfg, const SRUParams& params);
Tensor cru_forward(Tape& tape, const Tensor& x, const CRUConfig& cfg, const CRUParams& params);
Tensor scconv_forward(Tape& tape, const Tensor& x, const SRUConfig& sru, const CRUConfig& cru,
                      const SRUParams& sru_params, const CRUParams& cru_params);
Tensor se_forward(Tape& tape, const Tensor& x, const SEConfig& cfg, const SEParams& params);

// Closed-form parameter-element counts; must agree exactly with the element
// counts of the allocated parameter tensors.
int64_t sru_param_count(int channels);
int64_t cru_param_count(int channels, const CRUConfig& cfg);
int64_t se_param_count(int channels, const SEConfig& cfg);
int64_t block_param_count(BlockKind kind, int channels, const SRUConfig& sru, const CRUConfig& cru,
                          const SEConfig& se);

// Default SE reduction for a given width: 16 when it divides, else the width
// itself (degenerate bottleneck of one channel).
SEConfig default_se_config(int channels);

}  // namespace scc
