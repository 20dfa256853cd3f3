#include "scc/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace scc {

std::string block_kind_name(BlockKind kind) {
    switch (kind) {
        case BlockKind::None: return "none";
        case BlockKind::SE: return "se";
        case BlockKind::SCConv: return "scconv";
    }
    return "none";
}

BlockKind block_kind_from_name(const std::string& name) {
    if (name == "none") return BlockKind::None;
    if (name == "se") return BlockKind::SE;
    if (name == "scconv") return BlockKind::SCConv;
    throw std::invalid_argument(cat("unknown block kind '", name, "' (expected none|se|scconv)"));
}

void validate_sru(int channels, const SRUConfig& cfg) {
    if (cfg.groups <= 0 || channels % cfg.groups != 0)
        throw std::invalid_argument(cat("sru: channels ", channels, " not divisible by groups ",
                                        cfg.groups));
    if (!(cfg.gate_threshold > 0.0 && cfg.gate_threshold < 1.0))
        throw std::invalid_argument(cat("sru: gate_threshold ", cfg.gate_threshold,
                                        " outside (0,1)"));
    if (channels % 2 != 0)
        throw std::invalid_argument(cat("sru: channel count ", channels,
                                        " must be even for the half-slab reconstruction"));
}

namespace {

struct CruWidths {
    int up, low, up_sq, low_sq;
};

CruWidths cru_widths(int channels, const CRUConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument(cat("cru: alpha ", cfg.alpha, " outside (0,1)"));
    const double up_f = cfg.alpha * channels;
    const int up = static_cast<int>(std::llround(up_f));
    if (std::abs(up_f - up) > 1e-9 || up <= 0 || up >= channels)
        throw std::invalid_argument(cat("cru: alpha ", cfg.alpha, " does not split ", channels,
                                        " channels into positive integer slabs"));
    const int low = channels - up;
    if (cfg.squeeze_ratio <= 0)
        throw std::invalid_argument("cru: squeeze_ratio must be positive");
    if (up % cfg.squeeze_ratio != 0)
        throw std::invalid_argument(cat("cru: upper slab ", up, " not divisible by squeeze_ratio ",
                                        cfg.squeeze_ratio));
    if (low % cfg.squeeze_ratio != 0)
        throw std::invalid_argument(cat("cru: lower slab ", low, " not divisible by squeeze_ratio ",
                                        cfg.squeeze_ratio));
    const int up_sq = up / cfg.squeeze_ratio;
    const int low_sq = low / cfg.squeeze_ratio;
    if (cfg.gwc_kernel <= 0 || cfg.gwc_kernel % 2 == 0)
        throw std::invalid_argument(cat("cru: gwc_kernel ", cfg.gwc_kernel,
                                        " must be odd and positive"));
    if (cfg.gwc_groups <= 0)
        throw std::invalid_argument("cru: gwc_groups must be positive");
    if (up_sq % cfg.gwc_groups != 0)
        throw std::invalid_argument(cat("cru: squeezed upper slab ", up_sq,
                                        " not divisible by gwc_groups ", cfg.gwc_groups));
    if (channels % cfg.gwc_groups != 0)
        throw std::invalid_argument(cat("cru: channels ", channels,
                                        " not divisible by gwc_groups ", cfg.gwc_groups));
    if (channels - low_sq <= 0)
        throw std::invalid_argument(cat("cru: lower point-wise output ", channels - low_sq,
                                        " is not positive"));
    return {up, low, up_sq, low_sq};
}

Tensor he_uniform(Shape shape, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor t(shape, 0.0, true);
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
}

// Replicates a per-channel mask into a constant (N,C,1,1) gate tensor.
Tensor mask_gate(const std::vector<uint8_t>& mask, int n, bool keep_informative) {
    const int c = static_cast<int>(mask.size());
    Tensor gate({n, c, 1, 1});
    for (int ni = 0; ni < n; ++ni)
        for (int ci = 0; ci < c; ++ci)
            gate.data()[static_cast<size_t>(ni) * c + ci] =
                (mask[static_cast<size_t>(ci)] != 0) == keep_informative ? 1.0 : 0.0;
    return gate;
}

}  // namespace

void validate_cru(int channels, const CRUConfig& cfg) { cru_widths(channels, cfg); }

void validate_se(int channels, const SEConfig& cfg) {
    if (cfg.reduction <= 0 || channels % cfg.reduction != 0)
        throw std::invalid_argument(cat("se: channels ", channels, " not divisible by reduction ",
                                        cfg.reduction));
}

SEConfig default_se_config(int channels) {
    SEConfig cfg;
    cfg.reduction = (channels >= 16 && channels % 16 == 0) ? 16 : channels;
    return cfg;
}

SRUParams make_sru_params(int channels, const SRUConfig& cfg) {
    validate_sru(channels, cfg);
    SRUParams p;
    p.gamma = Tensor({channels}, 1.0, true);
    p.beta = Tensor({channels}, 0.0, true);
    return p;
}

CRUParams make_cru_params(int channels, const CRUConfig& cfg, Rng& rng) {
    const CruWidths w = cru_widths(channels, cfg);
    CRUParams p;
    p.squeeze_up_w = he_uniform({w.up_sq, w.up, 1, 1}, w.up, rng);
    p.squeeze_low_w = he_uniform({w.low_sq, w.low, 1, 1}, w.low, rng);
    const int gwc_cin = w.up_sq / cfg.gwc_groups;
    p.gwc_w = he_uniform({channels, gwc_cin, cfg.gwc_kernel, cfg.gwc_kernel},
                         gwc_cin * cfg.gwc_kernel * cfg.gwc_kernel, rng);
    p.pwc_up_w = he_uniform({channels, w.up_sq, 1, 1}, w.up_sq, rng);
    p.pwc_low_w = he_uniform({channels - w.low_sq, w.low_sq, 1, 1}, w.low_sq, rng);
    return p;
}

SEParams make_se_params(int channels, const SEConfig& cfg, Rng& rng) {
    validate_se(channels, cfg);
    const int mid = channels / cfg.reduction;
    SEParams p;
    p.fc1_w = he_uniform({mid, channels, 1, 1}, channels, rng);
    p.fc1_b = Tensor({mid}, 0.0, true);
    p.fc2_w = he_uniform({channels, mid, 1, 1}, mid, rng);
    p.fc2_b = Tensor({channels}, 0.0, true);
    return p;
}

std::vector<uint8_t> sru_informative_mask(const Tensor& gamma, double gate_threshold) {
    const auto& g = gamma.data();
    const int c = static_cast<int>(g.size());
    double total = 0.0;
    for (double v : g) total += std::abs(v);
    std::vector<uint8_t> mask(static_cast<size_t>(c), 0);
    for (int i = 0; i < c; ++i) {
        const double w = total > 0.0 ? std::abs(g[static_cast<size_t>(i)]) / total : 0.0;
        const double gated = 1.0 / (1.0 + std::exp(-static_cast<double>(c) * w));
        mask[static_cast<size_t>(i)] = gated >= gate_threshold ? 1 : 0;
    }
    return mask;
}

Tensor sru_forward(Tape& tape, const Tensor& x, const SRUConfig& cfg, const SRUParams& params) {
    const int c = x.dim(1);
    validate_sru(c, cfg);
    const int n = x.dim(0);

    Tensor x_gn = group_norm(tape, x, cfg.groups, params.gamma, params.beta);

    const std::vector<uint8_t> mask = sru_informative_mask(params.gamma, cfg.gate_threshold);
    Tensor x1 = scale_channels(tape, x_gn, mask_gate(mask, n, true));
    Tensor x2 = scale_channels(tape, x_gn, mask_gate(mask, n, false));

    const int half = c / 2;
    std::vector<Tensor> x1h = channel_split(tape, x1, {half, half});
    std::vector<Tensor> x2h = channel_split(tape, x2, {half, half});
    Tensor upper = add(tape, x1h[0], x2h[1]);
    Tensor lower = add(tape, x1h[1], x2h[0]);
    return channel_concat(tape, {upper, lower});
}

Tensor cru_forward(Tape& tape, const Tensor& x, const CRUConfig& cfg, const CRUParams& params) {
    const int c = x.dim(1);
    const CruWidths w = cru_widths(c, cfg);
    const int n = x.dim(0);

    std::vector<Tensor> slabs = channel_split(tape, x, {w.up, w.low});
    Tensor up_sq = conv2d(tape, slabs[0], params.squeeze_up_w, nullptr, 1, 0, 1);
    Tensor low_sq = conv2d(tape, slabs[1], params.squeeze_low_w, nullptr, 1, 0, 1);

    Tensor gwc = conv2d(tape, up_sq, params.gwc_w, nullptr, 1, cfg.gwc_kernel / 2, cfg.gwc_groups);
    Tensor pwc_up = conv2d(tape, up_sq, params.pwc_up_w, nullptr, 1, 0, 1);
    Tensor y1 = add(tape, gwc, pwc_up);

    Tensor pwc_low = conv2d(tape, low_sq, params.pwc_low_w, nullptr, 1, 0, 1);
    Tensor y2 = channel_concat(tape, {pwc_low, low_sq});

    // Pool both paths, softmax across the pair per channel, fuse.
    Tensor p1 = global_avg_pool(tape, y1);
    Tensor p2 = global_avg_pool(tape, y2);
    Tensor stacked = reshape(tape, channel_concat(tape, {p1, p2}), {n, 2, c, 1});
    Tensor gates = softmax(tape, stacked, 1);
    std::vector<Tensor> gate_pair = channel_split(tape, gates, {1, 1});
    Tensor b1 = reshape(tape, gate_pair[0], {n, c, 1, 1});
    Tensor b2 = reshape(tape, gate_pair[1], {n, c, 1, 1});
    return add(tape, scale_channels(tape, y1, b1), scale_channels(tape, y2, b2));
}

Tensor scconv_forward(Tape& tape, const Tensor& x, const SRUConfig& sru, const CRUConfig& cru,
                      const SRUParams& sru_params, const CRUParams& cru_params) {
    return cru_forward(tape, sru_forward(tape, x, sru, sru_params), cru, cru_params);
}

Tensor se_forward(Tape& tape, const Tensor& x, const SEConfig& cfg, const SEParams& params) {
    validate_se(x.dim(1), cfg);
    Tensor squeezed = global_avg_pool(tape, x);
    Tensor h = conv2d(tape, squeezed, params.fc1_w, &params.fc1_b, 1, 0, 1);
    h = activation(tape, h, Activation::Relu);
    h = conv2d(tape, h, params.fc2_w, &params.fc2_b, 1, 0, 1);
    Tensor gates = activation(tape, h, Activation::Sigmoid);
    return scale_channels(tape, x, gates);
}

int64_t sru_param_count(int channels) { return 2ll * channels; }

int64_t cru_param_count(int channels, const CRUConfig& cfg) {
    const CruWidths w = cru_widths(channels, cfg);
    const int64_t c = channels;
    const int64_t squeeze = static_cast<int64_t>(w.up_sq) * w.up +
                            static_cast<int64_t>(w.low_sq) * w.low;
    const int64_t gwc = c * (w.up_sq / cfg.gwc_groups) * cfg.gwc_kernel * cfg.gwc_kernel;
    const int64_t pwc_up = c * w.up_sq;
    const int64_t pwc_low = (c - w.low_sq) * static_cast<int64_t>(w.low_sq);
    return squeeze + gwc + pwc_up + pwc_low;
}

int64_t se_param_count(int channels, const SEConfig& cfg) {
    validate_se(channels, cfg);
    const int64_t c = channels;
    const int64_t mid = c / cfg.reduction;
    return c * mid + mid + mid * c + c;
}

int64_t block_param_count(BlockKind kind, int channels, const SRUConfig& sru, const CRUConfig& cru,
                          const SEConfig& se) {
    switch (kind) {
        case BlockKind::None: return 0;
        case BlockKind::SE: return se_param_count(channels, se);
        case BlockKind::SCConv:
            validate_sru(channels, sru);
            return sru_param_count(channels) + cru_param_count(channels, cru);
    }
    return 0;
}

}  // namespace scc
