#include "omnidet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "omnidet/config.hpp"

namespace omnidet {

namespace {

std::vector<int> score_order(const std::vector<Detection>& detections) {
    std::vector<int> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return detections[a].score > detections[b].score;
    });
    return order;
}

void append_csv_number(std::string& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace

MatchResult match(const std::vector<Detection>& detections,
                  const std::vector<GroundTruthBox>& ground_truth, double overlap_threshold) {
    MatchResult result;
    result.overlap_threshold = overlap_threshold;
    result.matched_gt.assign(detections.size(), -1);
    std::vector<bool> taken(ground_truth.size(), false);

    for (const int di : score_order(detections)) {
        const Detection& det = detections[di];
        int best_gt = -1;
        double best_iou = 0.0;
        for (int gi = 0; gi < static_cast<int>(ground_truth.size()); ++gi) {
            if (taken[gi]) continue;
            if (ground_truth[gi].class_label != det.class_label) continue;
            const double overlap = iou(det.box, ground_truth[gi].box);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_gt = gi;
            }
        }
        if (best_gt >= 0 && best_iou >= overlap_threshold) {
            taken[best_gt] = true;
            result.matched_gt[di] = best_gt;
            ++result.tp;
        } else {
            ++result.fp;
        }
    }
    result.fn = static_cast<int>(ground_truth.size()) - result.tp;
    return result;
}

std::pair<double, double> precision_recall(long tp, long fp, long fn) {
    if (tp < 0 || fp < 0 || fn < 0) throw std::invalid_argument("precision_recall: negative count");
    const double pr = (tp + fp == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double re = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    return {pr, re};
}

PrCurve pr_curve(const std::vector<EvalSample>& samples, double overlap_threshold,
                 const std::string& class_label) {
    PrCurve curve;
    curve.class_label = class_label;
    curve.overlap_threshold = overlap_threshold;

    // Per-image greedy matching; truncating at a score threshold afterwards is
    // equivalent to matching the truncated set because matches of higher
    // scored detections never depend on lower scored ones.
    struct Outcome {
        double score;
        bool is_tp;
    };
    std::vector<Outcome> outcomes;
    long total_gt = 0;
    for (const auto& sample : samples) {
        std::vector<Detection> dets;
        for (const auto& d : sample.detections) {
            if (d.class_label == class_label) dets.push_back(d);
        }
        std::vector<GroundTruthBox> gt;
        for (const auto& g : sample.ground_truth) {
            if (g.class_label == class_label) gt.push_back(g);
        }
        total_gt += static_cast<long>(gt.size());
        const MatchResult m = match(dets, gt, overlap_threshold);
        for (std::size_t i = 0; i < dets.size(); ++i) {
            outcomes.push_back({dets[i].score, m.matched_gt[i] >= 0});
        }
    }

    std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) {
        return a.score > b.score;
    });

    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < outcomes.size()) {
        const double threshold = outcomes[i].score;
        for (; i < outcomes.size() && outcomes[i].score == threshold; ++i) {
            outcomes[i].is_tp ? ++tp : ++fp;
        }
        const auto [pr, re] = precision_recall(tp, fp, total_gt - tp);
        curve.points.push_back({threshold, pr, re});
    }
    return curve;
}

ApResult average_precision(const PrCurve& curve, const std::string& method) {
    ApResult result;
    result.class_label = curve.class_label;
    result.overlap_threshold = curve.overlap_threshold;
    result.method = method;
    if (curve.points.empty()) return result;

    const std::size_t n = curve.points.size();
    std::vector<double> envelope(n);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        running = std::max(running, curve.points[i].precision);
        envelope[i] = running;
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ap += (curve.points[i].recall - prev_recall) * envelope[i];
        prev_recall = curve.points[i].recall;
    }
    result.ap = ap;
    return result;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path.string());
    const auto base = path.parent_path();
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        std::istringstream tokens{std::string(view)};
        std::string image_id, det_path, gt_path, extra;
        if (!(tokens >> image_id)) continue;
        if (!(tokens >> det_path >> gt_path) || (tokens >> extra)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected `image_id detections_path gt_path`");
        }
        auto resolve = [&](const std::string& p) {
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp : base / fp;
        };
        entries.push_back({image_id, resolve(det_path), resolve(gt_path)});
    }
    return entries;
}

BenchmarkReport run_benchmark(const std::vector<ManifestEntry>& entries,
                              const std::vector<BenchmarkMethod>& methods,
                              double overlap_threshold) {
    for (const auto& method : methods) method.params.validate();  // before any parallel work
    BenchmarkReport report;

    struct Loaded {
        EvalSample sample;
        bool ok = false;
        std::string error;
    };
    std::vector<Loaded> loaded(entries.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
        try {
            loaded[i].sample.detections = read_detections(entries[i].detections_path);
            loaded[i].sample.ground_truth = read_ground_truth(entries[i].gt_path);
            loaded[i].ok = true;
        } catch (const std::exception& err) {
            loaded[i].error = entries[i].image_id + ": " + err.what();
        }
    }
    std::vector<const EvalSample*> usable;
    for (const auto& l : loaded) {
        if (l.ok) {
            usable.push_back(&l.sample);
        } else {
            report.errors.push_back(l.error);
            report.partial = true;
        }
    }

    std::set<std::string> classes;
    for (const auto* sample : usable) {
        for (const auto& g : sample->ground_truth) classes.insert(g.class_label);
    }
    if (classes.empty() && !usable.empty()) classes.insert("person");

    for (const auto& method : methods) {
        std::vector<EvalSample> fused(usable.size());
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < static_cast<int>(usable.size()); ++i) {
            fused[i].ground_truth = usable[i]->ground_truth;
            fused[i].detections = method.apply_fusion ? fuse(usable[i]->detections, method.params)
                                                      : usable[i]->detections;
        }
        for (const auto& cls : classes) {
            PrCurve curve = pr_curve(fused, overlap_threshold, cls);
            report.rows.push_back(average_precision(curve, method.tag));
            report.curves.push_back(std::move(curve));
        }
    }
    return report;
}

void write_pr_csv(const PrCurve& curve, std::ostream& out) {
    out << "threshold,precision,recall\n";
    std::string line;
    for (const auto& p : curve.points) {
        line.clear();
        append_csv_number(line, p.threshold);
        line += ',';
        append_csv_number(line, p.precision);
        line += ',';
        append_csv_number(line, p.recall);
        line += '\n';
        out << line;
    }
}

void write_ap_csv(const std::vector<ApResult>& rows, std::ostream& out, bool partial) {
    out << "# ap_interpolation=all_points\n";
    if (partial) out << "# partial_results=true\n";
    out << "method,class,O_t,ap\n";
    std::string line;
    for (const auto& row : rows) {
        line.clear();
        line += row.method;
        line += ',';
        line += row.class_label;
        line += ',';
        append_csv_number(line, row.overlap_threshold);
        line += ',';
        append_csv_number(line, row.ap);
        line += '\n';
        out << line;
    }
}

}  // namespace omnidet
