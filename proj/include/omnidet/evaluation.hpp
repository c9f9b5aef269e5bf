#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "omnidet/box_geometry.hpp"
#include "omnidet/fusion.hpp"

namespace omnidet {

/// Greedy matching outcome for one image.
struct MatchResult {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    /// Matched ground-truth index per detection (input order), -1 when FP.
    std::vector<int> matched_gt;
    double overlap_threshold = 0.5;
};

/// Detections are taken in descending score order (ties: input order); each
/// matches the unmatched same-class ground-truth box of highest IoU when
/// that IoU reaches the threshold, otherwise it counts as a false positive.
MatchResult match(const std::vector<Detection>& detections,
                  const std::vector<GroundTruthBox>& ground_truth, double overlap_threshold);

/// pr = tp/(tp+fp), re = tp/(tp+fn); the empty cases define pr = 1 when
/// tp+fp = 0 and re = 1 when tp+fn = 0.
std::pair<double, double> precision_recall(long tp, long fp, long fn);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Points ordered by descending threshold, one per distinct detection score.
struct PrCurve {
    std::vector<PrPoint> points;
    std::string class_label;
    double overlap_threshold = 0.5;
};

/// One image worth of detections and ground truth.
struct EvalSample {
    std::vector<Detection> detections;
    std::vector<GroundTruthBox> ground_truth;
};

/// Dataset-global curve for one class: thresholds sweep the distinct scores,
/// TP/FP counts accumulate over all samples, matching stays per-image.
PrCurve pr_curve(const std::vector<EvalSample>& samples, double overlap_threshold,
                 const std::string& class_label);

struct ApResult {
    double ap = 0.0;
    std::string class_label;
    double overlap_threshold = 0.5;
    std::string method;
};

/// Area under the precision envelope (all-point interpolation: precision at
/// recall r is the maximum precision at any recall >= r).
ApResult average_precision(const PrCurve& curve, const std::string& method = {});

/// Manifest line: `image_id detections_path gt_path`. Relative paths resolve
/// against the manifest's directory.
struct ManifestEntry {
    std::string image_id;
    std::filesystem::path detections_path;
    std::filesystem::path gt_path;
};
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct BenchmarkMethod {
    std::string tag;
    FusionParams params;
    /// When false, detections are evaluated as-is (already fused).
    bool apply_fusion = true;
};

struct BenchmarkReport {
    std::vector<ApResult> rows;
    std::vector<PrCurve> curves;  // parallel to rows
    std::vector<std::string> errors;
    bool partial = false;
};

/// Fuses and evaluates every manifest entry per method. Unreadable entries
/// are recorded in errors and skipped; the report is then flagged partial.
BenchmarkReport run_benchmark(const std::vector<ManifestEntry>& entries,
                              const std::vector<BenchmarkMethod>& methods,
                              double overlap_threshold);

/// CSV: header `threshold,precision,recall`, '\n' endings, '.' decimals.
void write_pr_csv(const PrCurve& curve, std::ostream& out);
/// CSV: comment header noting the interpolation rule (and partial results),
/// then `method,class,O_t,ap` rows.
void write_ap_csv(const std::vector<ApResult>& rows, std::ostream& out, bool partial = false);

}  // namespace omnidet
