#include "scc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "scc/utils.hpp"

namespace scc {

double precision(const EvalCounts& c) {
    return c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
}

double recall(const EvalCounts& c) {
    return c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
}

MatchResult match_detections(const std::vector<BoxCxcywh>& dets, const std::vector<BoxCxcywh>& gts,
                             double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument(cat("match_detections: iou_threshold ", iou_threshold,
                                        " outside (0,1]"));
    MatchResult res;
    res.tp_flags.assign(dets.size(), false);
    std::vector<bool> matched(gts.size(), false);
    for (size_t d = 0; d < dets.size(); ++d) {
        double best = -1.0;
        size_t best_g = gts.size();
        for (size_t g = 0; g < gts.size(); ++g) {
            if (matched[g]) continue;
            const double v = iou(dets[d], gts[g]);
            if (v > best) {
                best = v;
                best_g = g;
            }
        }
        if (best_g < gts.size() && best >= iou_threshold) {
            matched[best_g] = true;
            res.tp_flags[d] = true;
            ++res.counts.tp;
        } else {
            ++res.counts.fp;
        }
    }
    for (bool m : matched)
        if (!m) ++res.counts.fn;
    return res;
}

MatchResult exhaustive_match_oracle(const std::vector<BoxCxcywh>& dets,
                                    const std::vector<BoxCxcywh>& gts, double iou_threshold) {
    if (dets.size() > 6 || gts.size() > 6)
        throw std::invalid_argument(cat("exhaustive_match_oracle: instance too large (",
                                        dets.size(), " dets x ", gts.size(), " gts)"));
    // Replay the definition literally: walk detections in order, recompute
    // every IoU from scratch, claim the best unmatched ground truth.
    MatchResult res;
    res.tp_flags.assign(dets.size(), false);
    std::set<size_t> taken;
    for (size_t d = 0; d < dets.size(); ++d) {
        bool found = false;
        size_t candidate = 0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (taken.count(g)) continue;
            if (!found || iou(dets[d], gts[g]) > iou(dets[d], gts[candidate])) {
                candidate = g;
                found = true;
            }
        }
        if (found && iou(dets[d], gts[candidate]) >= iou_threshold) {
            taken.insert(candidate);
            res.tp_flags[d] = true;
        }
    }
    for (bool f : res.tp_flags) f ? ++res.counts.tp : ++res.counts.fp;
    res.counts.fn = static_cast<int64_t>(gts.size() - taken.size());
    return res;
}

double average_precision(std::vector<std::pair<double, bool>> scored_flags, int64_t total_gts,
                         ApScheme scheme) {
    if (total_gts <= 0) return 0.0;
    std::stable_sort(scored_flags.begin(), scored_flags.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<double> prec(scored_flags.size()), rec(scored_flags.size());
    int64_t tp = 0, fp = 0;
    for (size_t i = 0; i < scored_flags.size(); ++i) {
        scored_flags[i].second ? ++tp : ++fp;
        prec[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
        rec[i] = static_cast<double>(tp) / static_cast<double>(total_gts);
    }
    // Monotone envelope from the right.
    for (size_t i = prec.size(); i-- > 1;) prec[i - 1] = std::max(prec[i - 1], prec[i]);

    const int points = scheme == ApScheme::Points101 ? 101 : 11;
    double acc = 0.0;
    size_t idx = 0;
    for (int p = 0; p < points; ++p) {
        const double r = static_cast<double>(p) / static_cast<double>(points - 1);
        while (idx < rec.size() && rec[idx] < r - 1e-12) ++idx;
        acc += idx < rec.size() ? prec[idx] : 0.0;
    }
    return acc / static_cast<double>(points);
}

std::array<double, kMapThresholdCount> map_thresholds() {
    std::array<double, kMapThresholdCount> t{};
    for (int i = 0; i < kMapThresholdCount; ++i) t[static_cast<size_t>(i)] = 0.50 + 0.05 * i;
    return t;
}

double ClassApRow::ap50_95() const {
    double acc = 0.0;
    for (double v : ap_per_threshold) acc += v;
    return acc / static_cast<double>(kMapThresholdCount);
}

namespace {

struct ClassGroup {
    // Per image: detections (already score-sorted) and ground truths.
    std::map<std::string, std::pair<std::vector<std::pair<double, BoxCxcywh>>,
                                    std::vector<BoxCxcywh>>>
        by_image;
    int64_t total_gts = 0;
};

std::map<int, ClassGroup> group_by_class(const std::vector<Detection>& dets,
                                         const std::vector<GroundTruthBox>& gts) {
    std::map<int, ClassGroup> classes;
    for (const auto& g : gts) {
        auto& grp = classes[g.class_id];
        grp.by_image[g.image_id].second.push_back(g.box);
        ++grp.total_gts;
    }
    for (const auto& d : dets)
        classes[d.class_id].by_image[d.image_id].first.emplace_back(d.score, d.box);
    for (auto& [cls, grp] : classes)
        for (auto& [img, pair] : grp.by_image)
            std::stable_sort(pair.first.begin(), pair.first.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
    return classes;
}

}  // namespace

MapResult map_range(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    ApScheme scheme) {
    const auto thresholds = map_thresholds();
    auto classes = group_by_class(dets, gts);

    MapResult result;
    for (auto& [cls, grp] : classes) {
        if (grp.total_gts == 0) continue;  // AP undefined without ground truths
        ClassApRow row;
        row.class_id = cls;
        row.gts = grp.total_gts;
        for (int t = 0; t < kMapThresholdCount; ++t) {
            std::vector<std::pair<double, bool>> pooled;
            for (auto& [img, pair] : grp.by_image) {
                std::vector<BoxCxcywh> boxes;
                boxes.reserve(pair.first.size());
                for (const auto& sd : pair.first) boxes.push_back(sd.second);
                const MatchResult m =
                    match_detections(boxes, pair.second, thresholds[static_cast<size_t>(t)]);
                for (size_t i = 0; i < boxes.size(); ++i)
                    pooled.emplace_back(pair.first[i].first, m.tp_flags[i]);
            }
            row.ap_per_threshold[static_cast<size_t>(t)] =
                average_precision(std::move(pooled), grp.total_gts, scheme);
        }
        row.ap50 = row.ap_per_threshold[0];
        result.per_class.push_back(row);
    }
    if (!result.per_class.empty()) {
        for (const auto& row : result.per_class) {
            result.map50 += row.ap50;
            result.map50_95 += row.ap50_95();
        }
        result.map50 /= static_cast<double>(result.per_class.size());
        result.map50_95 /= static_cast<double>(result.per_class.size());
    }
    return result;
}

namespace {

EvalCounts pooled_counts_at(const std::vector<Detection>& dets,
                            const std::vector<GroundTruthBox>& gts, double conf_threshold,
                            double iou_threshold) {
    std::vector<Detection> kept;
    for (const auto& d : dets)
        if (d.score >= conf_threshold) kept.push_back(d);
    auto classes = group_by_class(kept, gts);
    EvalCounts total;
    for (auto& [cls, grp] : classes) {
        for (auto& [img, pair] : grp.by_image) {
            std::vector<BoxCxcywh> boxes;
            for (const auto& sd : pair.first) boxes.push_back(sd.second);
            const MatchResult m = match_detections(boxes, pair.second, iou_threshold);
            total.tp += m.counts.tp;
            total.fp += m.counts.fp;
            total.fn += m.counts.fn;
        }
    }
    return total;
}

}  // namespace

EvalReport evaluate_detections(const std::vector<Detection>& dets,
                               const std::vector<GroundTruthBox>& gts, ApScheme scheme,
                               double conf_threshold) {
    EvalReport report;
    const MapResult m = map_range(dets, gts, scheme);
    report.map50 = m.map50;
    report.map50_95 = m.map50_95;
    report.per_class = m.per_class;
    report.conf_threshold = conf_threshold;

    const EvalCounts fixed = pooled_counts_at(dets, gts, conf_threshold, 0.5);
    report.precision = precision(fixed);
    report.recall = recall(fixed);
    report.precision_degenerate = fixed.tp + fixed.fp == 0;
    report.recall_degenerate = fixed.tp + fixed.fn == 0;

    // Best-F1 sweep over the detection scores themselves.
    std::vector<double> candidates;
    for (const auto& d : dets) candidates.push_back(d.score);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best_f1 = -1.0;
    for (double thr : candidates) {
        const EvalCounts c = pooled_counts_at(dets, gts, thr, 0.5);
        const double p = precision(c), r = recall(c);
        const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        if (f1 > best_f1 || (f1 == best_f1 && thr > report.best_f1_score_threshold)) {
            best_f1 = f1;
            report.precision_best_f1 = p;
            report.recall_best_f1 = r;
            report.best_f1_score_threshold = thr;
        }
    }
    return report;
}

ReportDelta compare_reports(const EvalReport& a, const EvalReport& b) {
    std::set<int> ca, cb;
    for (const auto& row : a.per_class) ca.insert(row.class_id);
    for (const auto& row : b.per_class) cb.insert(row.class_id);
    if (ca != cb) throw std::invalid_argument("compare_reports: class sets differ");
    return {b.map50 - a.map50, b.map50_95 - a.map50_95, b.precision - a.precision,
            b.recall - a.recall};
}

std::string render_report_row(const std::string& label, const EvalReport& r) {
    std::ostringstream os;
    os << label << "\t" << format_fixed(r.map50, 3) << "\t" << format_fixed(r.map50_95, 3) << "\t"
       << format_fixed(r.precision, 3) << "\t" << format_fixed(r.recall, 3);
    return os.str();
}

std::string render_comparison(const std::string& label_a, const EvalReport& a,
                              const std::string& label_b, const EvalReport& b) {
    const ReportDelta d = compare_reports(a, b);
    auto signed3 = [](double v) {
        return (v >= 0 ? "+" : "") + format_fixed(v, 3);
    };
    std::ostringstream os;
    os << "Model\tmAP50\tmAP50:95\tPrecision\tRecall\n";
    os << render_report_row(label_a, a) << "\n";
    os << render_report_row(label_b, b) << "\n";
    os << "delta\t" << signed3(d.map50) << "\t" << signed3(d.map50_95) << "\t"
       << signed3(d.precision) << "\t" << signed3(d.recall) << "\n";
    return os.str();
}

std::string write_detections_file(const std::vector<Detection>& dets) {
    std::ostringstream os;
    for (const auto& d : dets) {
        os << d.image_id << " " << d.class_id << " " << format_fixed(d.score, 6) << " "
           << format_fixed(d.box.cx, 6) << " " << format_fixed(d.box.cy, 6) << " "
           << format_fixed(d.box.w, 6) << " " << format_fixed(d.box.h, 6) << "\n";
    }
    return os.str();
}

std::vector<Detection> parse_detections_file(const std::string& text) {
    std::vector<Detection> dets;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Detection d;
        if (!(ls >> d.image_id >> d.class_id >> d.score >> d.box.cx >> d.box.cy >> d.box.w >>
              d.box.h))
            throw std::invalid_argument(cat("detections file line ", lineno, ": malformed"));
        std::string extra;
        if (ls >> extra)
            throw std::invalid_argument(cat("detections file line ", lineno, ": trailing fields"));
        dets.push_back(d);
    }
    return dets;
}

}  // namespace scc
