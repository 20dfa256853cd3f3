#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scc/blocks.hpp"
#include "scc/box.hpp"
#include "scc/tensor.hpp"

namespace scc {

struct BackboneConfig {
    // First width is the stem output; each later width adds a stride-2 stage
    // with one residual block. Total stride is 2^len(stage_widths).
    std::vector<int> stage_widths = {16, 32, 64};
    int stride = 8;
    std::string insertion_anchor = "head.post_conv1";
};

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.937;
    int batch_size = 4;
    int epochs = 30;
    double iou_match_threshold = 0.5;
};

struct ModelStats {
    int64_t parameters = 0;
    int64_t layers = 0;
    int64_t gradients = 0;
};

std::string render_stats_table(const std::vector<std::pair<std::string, ModelStats>>& rows);

struct BlockConfigs {
    SRUConfig sru;
    CRUConfig cru;
    SEConfig se{16};
};

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Anchor-free single-level detector: stride-2 conv stem, residual stages, and
// a two-conv head emitting (4 box + 1 objectness + num_classes) logits per
// cell. A BlockKind is spliced at the named insertion anchor. Every layer is
// initialized from a per-layer-name seeded stream, so models differing only in
// the spliced block agree elementwise on all shared layers.
class Model {
public:
    Model(const BackboneConfig& backbone, BlockKind block, const BlockConfigs& blocks,
          int num_classes, uint64_t seed);

    Tensor forward(Tape& tape, const Tensor& images) const;

    std::vector<NamedParam>& params() { return params_; }
    const std::vector<NamedParam>& params() const { return params_; }

    ModelStats stats() const;
    void freeze(const std::string& name_prefix);

    const BackboneConfig& backbone() const { return backbone_; }
    BlockKind block_kind() const { return block_; }
    const BlockConfigs& blocks() const { return blocks_; }
    int num_classes() const { return num_classes_; }
    uint64_t seed() const { return seed_; }
    int anchor_channels() const { return anchor_channels_; }
    int head_channels() const { return 5 + num_classes_; }

    // Valid anchor names for a given backbone.
    static std::vector<std::string> anchor_names(const BackboneConfig& backbone);

private:
    struct ConvLayer {
        Tensor w, b;
        int stride = 1, pad = 0, groups = 1;
        bool has_bias = true;
    };

    ConvLayer make_conv(const std::string& name, int cin, int cout, int k, int stride, int pad,
                        bool bias);
    Tensor run_conv(Tape& tape, const ConvLayer& layer, const Tensor& x) const;
    Tensor apply_block(Tape& tape, const Tensor& x) const;

    BackboneConfig backbone_;
    BlockKind block_;
    BlockConfigs blocks_;
    int num_classes_;
    uint64_t seed_;
    int anchor_channels_ = 0;

    ConvLayer stem_;
    std::vector<ConvLayer> downs_;
    std::vector<std::pair<ConvLayer, ConvLayer>> residuals_;
    ConvLayer head_conv1_, head_out_;
    SRUParams sru_params_;
    CRUParams cru_params_;
    SEParams se_params_;
    std::vector<NamedParam> params_;
};

struct BoxPred {
    BoxCxcywh box;
    double objectness = 0.0;
    std::vector<double> class_scores;
};

struct ScoredBox {
    BoxCxcywh box;
    int class_id = 0;
    double score = 0.0;
};

// Decodes one sample of a raw head grid (C=5+K) into per-cell box predictions
// with sigmoid-mapped geometry and scores.
std::vector<BoxPred> decode_grid(const Tensor& grid, int sample, int num_classes);

// Per-cell best-class boxes with score = objectness * class probability.
std::vector<ScoredBox> decode_scored(const Tensor& grid, int sample, int num_classes);

struct CellAssignment {
    int sample = 0;
    int cell_y = 0, cell_x = 0;
    BoxCxcywh box;
    int class_id = 0;
};

// Center-cell assignment, at most one ground truth per cell; ties keep the
// larger area, then the lower class index, then the earlier input box.
std::vector<CellAssignment> assign_targets(
    int grid_h, int grid_w,
    const std::vector<std::vector<std::pair<BoxCxcywh, int>>>& gts_per_sample);

struct LossWeights {
    double box = 1.0, obj = 1.0, cls = 0.5;
};

// Mean CIoU over the assigned cells, decoded from the 4 box channels.
Tensor box_ciou_loss(Tape& tape, const Tensor& box_logits,
                     const std::vector<CellAssignment>& assignments);

// Weighted sum of the CIoU box term over positive cells, objectness BCE over
// all cells, and class BCE over positive cells.
Tensor detection_loss(Tape& tape, const Tensor& preds,
                      const std::vector<CellAssignment>& assignments, int num_classes,
                      const LossWeights& weights);

// Classical momentum: v <- momentum*v + g; p <- p - lr*v.
void sgd_step(std::vector<double>& values, const std::vector<double>& grads,
              std::vector<double>& velocity, double learning_rate, double momentum);

class SgdOptimizer {
public:
    SgdOptimizer(std::vector<NamedParam>& params, double learning_rate, double momentum);
    void step();
    void zero_grad();

private:
    std::vector<NamedParam>* params_;
    std::vector<std::vector<double>> velocity_;
    double lr_, momentum_;
};

// Greedy same-class NMS; boxes below score_threshold are dropped first, the
// rest are kept in descending score order (ties by lower input index) iff
// their IoU with every kept same-class box is below iou_threshold.
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& boxes, double iou_threshold,
                           double score_threshold);

ModelStats model_stats(const Model& model);

// Checkpoint directory: manifest.json (config echo, stats, seed) plus one
// tensor container per parameter under params/.
void save_checkpoint(const std::filesystem::path& dir, const Model& model);
Model load_checkpoint(const std::filesystem::path& dir);

}  // namespace scc
