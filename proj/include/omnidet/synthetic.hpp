#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "omnidet/box_geometry.hpp"
#include "omnidet/geometry.hpp"
#include "omnidet/image.hpp"
#include "omnidet/view_synthesis.hpp"

namespace omnidet {

/// Deterministic random stream: std::mt19937_64 with the transforms below,
/// fixed so other implementations can reproduce files byte-exactly.
///   uniform01: (next() >> 11) * 2^-53
///   normal:    Box-Muller, sqrt(-2 ln u1) * cos(2 pi u2) with u1 in (0,1]
///   ints:      min + floor(uniform01 * span), clamped to max
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double normal();
    int uniform_int(int lo, int hi);
    bool bernoulli(double p) { return uniform01() < p; }

  private:
    std::mt19937_64 engine_;
};

/// Upright person stand-in: a vertical segment from the foot point (z grows
/// away from the ceiling camera) with a silhouette width proportional to the
/// height.
struct PersonProxy {
    Point3 foot;
    double height = 1.75;  // metres
};

struct SyntheticScene {
    FisheyeCamera omni;
    std::vector<PersonProxy> proxies;
    std::uint64_t seed = 0;
    double width_ratio = 0.45;  // silhouette width / height
};

struct NoiseModel {
    double score_mean = 0.8;  // detector confidence for true positives
    double score_spread = 0.0;
    double detect_prob = 1.0;          // per view and proxy
    double center_jitter_px = 0.0;     // std-dev of the box-centre offset
    double scale_jitter = 0.0;         // std-dev of the relative size change
    double false_positive_rate = 0.0;  // probability of one spurious box per view
    int duplicates_min = 1;            // boxes emitted per successful detection
    int duplicates_max = 1;
    /// A proxy counts as visible only when its box lies inside the centred
    /// window of this fraction of the view. The default 0.5 window matches
    /// the view's nominal field of view, 2*atan(cx / 2fx).
    double visibility_margin = 0.5;

    void validate() const;  // throws std::invalid_argument

    static NoiseModel zero();
    static NoiseModel defaults();
    static NoiseModel omni_baseline();
};

/// 16 silhouette sample points: 8 levels along the segment, two horizontal
/// extremes each, oriented broadside to the camera.
std::vector<Point3> silhouette_points(const PersonProxy& proxy, double width_ratio);

/// Ground truth in omnidirectional pixels: per proxy, the enclosure of its
/// projected silhouette points. Throws when a proxy leaves the camera FOV.
std::vector<GroundTruthBox> render_gt(const SyntheticScene& scene);

struct ViewDetections {
    std::string view_id;
    std::vector<Detection> detections;
};

/// Noisy per-view detections for every view where a proxy is fully visible.
/// Fully deterministic in scene.seed; the random stream consumption order is
/// fixed (views in input order, proxies in scene order, then the
/// false-positive draw per view).
std::vector<ViewDetections> synth_detections(const SyntheticScene& scene,
                                             const std::vector<VirtualView>& views,
                                             const NoiseModel& noise);

/// Detections emitted directly in the omnidirectional frame (the "Omni"
/// baseline): one pass over the proxies with the same noise semantics.
/// Uses the derived stream seed scene.seed ^ 0x6f6d6e69.
std::vector<Detection> synth_omni_detections(const SyntheticScene& scene, const NoiseModel& noise);

/// Flat-shaded scene preview: checkerboard floor, white proxy cylinders,
/// black outside the fisheye FOV. Grayscale, omni camera resolution.
Image render_mask(const SyntheticScene& scene);

struct SceneParams {
    int proxies_min = 2;
    int proxies_max = 5;
    double theta_min = 0.25;  // foot angle from the optical axis
    double theta_max = 0.80;
    double height_min = 1.5;
    double height_max = 1.9;
    double mount_height = 2.8;  // metres from camera to floor
    /// Placements are rejection-sampled until the ground-truth boxes of
    /// distinct proxies overlap at most this much (people cannot interpenetrate
    /// and the harness does not model occlusion).
    double max_gt_overlap = 0.15;
    int placement_attempts = 200;
};

/// Scene with uniformly placed, non-interpenetrating proxies; deterministic
/// in the seed. Proxies that cannot be placed within the attempt budget are
/// skipped, so a scene may end up with fewer proxies than drawn.
SyntheticScene random_scene(std::uint64_t seed, const FisheyeCamera& omni,
                            const SceneParams& params = {});

/// Scene config file: keys camera (path to a camera config, resolved against
/// the scene file), seed, width_ratio, and one `proxy = x y z height` line
/// per person.
SyntheticScene load_scene(const std::filesystem::path& path);

}  // namespace omnidet
