#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "omnidet/evaluation.hpp"
#include "omnidet/synthetic.hpp"
#include "omnidet/view_synthesis.hpp"

namespace omnidet::pipeline {

/// Camera and grid defaults shared by the synthetic pipeline and the CLI:
/// a 600x600 equidistant ceiling camera and the 128-view sweep
/// (elevation 0.0..0.9 step 0.3, azimuth -3.14..3.14 step 0.2, c = f = 100).
FisheyeCamera default_omni_camera();
ViewGridSpec default_view_grid();

struct ViewsOptions {
    std::filesystem::path out_dir;
    bool write_luts = false;
    Interpolation interpolation = Interpolation::bilinear;
};

struct ViewsSummary {
    int view_count = 0;
    std::filesystem::path manifest_path;
};

/// Renders every view to `<out_dir>/<view_id>.pgm|ppm` (plus `.olut` files
/// when asked) and writes views.manifest listing the view ids in grid order.
/// Views render concurrently; outputs do not depend on the thread count.
ViewsSummary render_views(const Image& omni_image, const FisheyeCamera& omni,
                          const std::vector<VirtualView>& views, const ViewsOptions& options);

struct BackprojectSummary {
    int kept = 0;
    int dropped = 0;  // boxes whose samples left the fisheye FOV
};

/// Back-projects per-view detections into the omnidirectional frame
/// (view_id becomes "omni"). Unknown view ids raise ParseError naming the
/// offending line of the source file.
BackprojectSummary backproject_detections(const std::vector<ParsedDetection>& detections,
                                          const std::string& source_name,
                                          const std::vector<VirtualView>& views,
                                          const FisheyeCamera& omni, BackprojectMode mode,
                                          int edge_samples, std::vector<Detection>& pooled);

struct SyntheticOptions {
    FisheyeCamera omni = default_omni_camera();
    ViewGridSpec grid = default_view_grid();
    NoiseModel view_noise = NoiseModel::defaults();
    NoiseModel omni_noise = NoiseModel::omni_baseline();
    std::uint64_t seed = 0;
    int scene_count = 20;
    SceneParams scene_params;
    BackprojectMode mode = BackprojectMode::corners;
    int edge_samples = 8;
    double overlap_threshold = 0.5;  // O_t for evaluation
};

struct SyntheticDataset {
    /// Pooled back-projected raw detections per scene, paired with its GT.
    std::vector<EvalSample> pooled;
    /// Direct omnidirectional detections per scene (the "Omni" baseline).
    std::vector<EvalSample> omni;
    /// Raw per-view detections per scene, for file output.
    std::vector<std::vector<ViewDetections>> raw_views;
    std::vector<SyntheticScene> scenes;
};

/// Deterministic in options.seed; scene i draws from seed + i.
SyntheticDataset generate_synthetic_dataset(const SyntheticOptions& options);

/// The Table-1-shaped method list: nms, soft_gaussian, soft_linear (pooled)
/// and nms for the omni baseline.
std::vector<BenchmarkMethod> table_methods(double nt, double sigma, double ct);

struct SyntheticRunResult {
    BenchmarkReport report;
    std::filesystem::path ap_csv_path;
    std::vector<std::filesystem::path> pr_csv_paths;
};

/// Full synthetic pipeline: writes per-scene detection/GT files, both
/// manifests, per-method PR CSVs and the AP table under out_dir. Every
/// output is a pure function of the options, byte for byte.
SyntheticRunResult run_synthetic_pipeline(const SyntheticOptions& options,
                                          const std::vector<BenchmarkMethod>& pooled_methods,
                                          const std::vector<BenchmarkMethod>& omni_methods,
                                          const std::filesystem::path& out_dir,
                                          bool write_masks = false);

}  // namespace omnidet::pipeline
