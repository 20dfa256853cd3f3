#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scc/box.hpp"

namespace scc {

struct Detection {
    std::string image_id;
    int class_id = 0;
    BoxCxcywh box;
    double score = 0.0;
};

struct GroundTruthBox {
    std::string image_id;
    int class_id = 0;
    BoxCxcywh box;
};

struct EvalCounts {
    int64_t tp = 0, fp = 0, fn = 0;
};

// tp/(tp+fp), with the 0/0 case defined as 0.
double precision(const EvalCounts& counts);
// tp/(tp+fn), with the 0/0 case defined as 0.
double recall(const EvalCounts& counts);

struct MatchResult {
    std::vector<bool> tp_flags;  // one per detection, in input order
    EvalCounts counts;
};

// Greedy matching for the detections of one class on one image. Detections
// must already be sorted by descending score (ties keep input order); each one
// claims its best-IoU unmatched ground truth iff that IoU >= threshold.
MatchResult match_detections(const std::vector<BoxCxcywh>& dets, const std::vector<BoxCxcywh>& gts,
                             double iou_threshold);

// Literal replay of the greedy definition with no shortcuts; verification
// oracle for match_detections on small instances (at most 6x6).
MatchResult exhaustive_match_oracle(const std::vector<BoxCxcywh>& dets,
                                    const std::vector<BoxCxcywh>& gts, double iou_threshold);

enum class ApScheme { Points101, Points11 };

// Average precision from (score, tp) pairs: rank by descending score (stable),
// build the precision-recall curve, take the monotone envelope, and average it
// at 101 (or 11) evenly spaced recall points.
double average_precision(std::vector<std::pair<double, bool>> scored_flags, int64_t total_gts,
                         ApScheme scheme);

constexpr int kMapThresholdCount = 10;
// IoU thresholds 0.50, 0.55, ..., 0.95.
std::array<double, kMapThresholdCount> map_thresholds();

struct ClassApRow {
    int class_id = 0;
    int64_t gts = 0;
    double ap50 = 0.0;
    std::array<double, kMapThresholdCount> ap_per_threshold{};
    double ap50_95() const;
};

struct MapResult {
    double map50 = 0.0;
    double map50_95 = 0.0;
    std::vector<ClassApRow> per_class;  // classes with at least one ground truth
};

MapResult map_range(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    ApScheme scheme);

struct EvalReport {
    double map50 = 0.0;
    double map50_95 = 0.0;
    double precision = 0.0;  // at the fixed confidence threshold below
    double recall = 0.0;
    double conf_threshold = 0.25;
    double precision_best_f1 = 0.0;  // at the best-F1 point of the score sweep
    double recall_best_f1 = 0.0;
    double best_f1_score_threshold = 0.0;
    bool precision_degenerate = false;  // 0/0 fell back to the 0 convention
    bool recall_degenerate = false;
    std::vector<ClassApRow> per_class;
};

// Full evaluation protocol: mAP over the threshold range plus pooled
// precision/recall at IoU 0.5, reported both at a fixed confidence threshold
// and at the best-F1 point.
EvalReport evaluate_detections(const std::vector<Detection>& dets,
                               const std::vector<GroundTruthBox>& gts, ApScheme scheme,
                               double conf_threshold = 0.25);

struct ReportDelta {
    double map50 = 0.0, map50_95 = 0.0, precision = 0.0, recall = 0.0;
};

// Fieldwise b - a; requires identical class sets.
ReportDelta compare_reports(const EvalReport& a, const EvalReport& b);
std::string render_report_row(const std::string& label, const EvalReport& r);
std::string render_comparison(const std::string& label_a, const EvalReport& a,
                              const std::string& label_b, const EvalReport& b);

// One line per detection: <image_stem> <class> <score> <cx> <cy> <w> <h>
std::string write_detections_file(const std::vector<Detection>& dets);
std::vector<Detection> parse_detections_file(const std::string& text);

}  // namespace scc
