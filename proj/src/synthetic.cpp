#include "omnidet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "omnidet/config.hpp"

namespace omnidet {

namespace {

constexpr std::uint64_t kOmniStreamSalt = 0x6f6d6e69;  // "omni"

struct ViewFrame {
    Rotation omni_from_view;
    Rotation view_from_omni;
};

ViewFrame view_frame(const VirtualView& view) {
    const Rotation r = rotation_from_azimuth_elevation(view.azimuth, view.elevation);
    return {r, r.transposed()};
}

/// Perspective box of the proxy in the view, or nullopt when any silhouette
/// point lies behind the camera or the box leaves the visibility window.
std::optional<BoundingBox> proxy_view_box(const std::vector<Point3>& silhouette,
                                          const VirtualView& view, const ViewFrame& frame,
                                          double visibility_margin) {
    BoundingBox box{std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (const Point3& p : silhouette) {
        const Point3 in_view = frame.view_from_omni.apply(p);
        if (!(in_view.z > 0.0)) return std::nullopt;
        const Point2 px = project_pinhole(in_view, view.intrinsics);
        box.x_min = std::min(box.x_min, px.x);
        box.y_min = std::min(box.y_min, px.y);
        box.x_max = std::max(box.x_max, px.x);
        box.y_max = std::max(box.y_max, px.y);
    }
    const double inset_x = 0.5 * (1.0 - visibility_margin) * view.width;
    const double inset_y = 0.5 * (1.0 - visibility_margin) * view.height;
    if (box.x_min < inset_x || box.y_min < inset_y || box.x_max > view.width - inset_x ||
        box.y_max > view.height - inset_y) {
        return std::nullopt;
    }
    return box;
}

double clamp_score(double s) { return std::clamp(s, 0.0, 1.0); }

/// One jittered copy of a true box, clipped to the image rectangle.
std::optional<BoundingBox> jitter_box(const BoundingBox& box, const NoiseModel& noise, Rng& rng,
                                      double width, double height) {
    const double dx = noise.center_jitter_px * rng.normal();
    const double dy = noise.center_jitter_px * rng.normal();
    const double sx = 1.0 + noise.scale_jitter * rng.normal();
    const double sy = 1.0 + noise.scale_jitter * rng.normal();
    const double cx = 0.5 * (box.x_min + box.x_max) + dx;
    const double cy = 0.5 * (box.y_min + box.y_max) + dy;
    const double hw = 0.5 * box.width() * std::abs(sx);
    const double hh = 0.5 * box.height() * std::abs(sy);
    const auto clipped = clip_box({cx - hw, cy - hh, cx + hw, cy + hh}, width, height);
    if (!clipped || clipped->area() <= 0.0) return std::nullopt;
    return clipped;
}

std::optional<BoundingBox> random_false_box(Rng& rng, double width, double height) {
    const double cx = rng.uniform(0.05, 0.95) * width;
    const double cy = rng.uniform(0.05, 0.95) * height;
    const double hw = 0.5 * rng.uniform(0.08, 0.35) * width;
    const double hh = 0.5 * rng.uniform(0.15, 0.55) * height;
    const auto clipped = clip_box({cx - hw, cy - hh, cx + hw, cy + hh}, width, height);
    if (!clipped || clipped->area() <= 0.0) return std::nullopt;
    return clipped;
}

/// Emits the true-detection boxes for one visible proxy into `out`.
template <typename EmitFn>
void emit_true_detections(const BoundingBox& box, const NoiseModel& noise, Rng& rng, double width,
                          double height, EmitFn&& emit) {
    if (!rng.bernoulli(noise.detect_prob)) return;
    const int count = rng.uniform_int(noise.duplicates_min, noise.duplicates_max);
    for (int k = 0; k < count; ++k) {
        const auto jittered = jitter_box(box, noise, rng, width, height);
        const double score = clamp_score(noise.score_mean + noise.score_spread * rng.normal());
        if (jittered) emit(*jittered, score);
    }
}

}  // namespace

double Rng::normal() {
    // Box-Muller; u1 shifted into (0,1] so the log stays finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

int Rng::uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniform_int: empty range");
    const double span = static_cast<double>(hi) - lo + 1.0;
    const int v = lo + static_cast<int>(uniform01() * span);
    return std::min(v, hi);
}

void NoiseModel::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(detect_prob) || !prob(false_positive_rate) || !prob(score_mean)) {
        throw std::invalid_argument("noise model: probabilities must lie in [0,1]");
    }
    if (score_spread < 0.0 || center_jitter_px < 0.0 || scale_jitter < 0.0) {
        throw std::invalid_argument("noise model: spreads must be non-negative");
    }
    if (!(visibility_margin > 0.0) || visibility_margin > 1.0) {
        throw std::invalid_argument("noise model: visibility margin must lie in (0,1]");
    }
    if (duplicates_min < 1 || duplicates_max < duplicates_min) {
        throw std::invalid_argument("noise model: duplicate counts must satisfy 1 <= min <= max");
    }
}

NoiseModel NoiseModel::zero() { return NoiseModel{}; }

NoiseModel NoiseModel::defaults() {
    NoiseModel noise;
    noise.score_mean = 0.8;
    noise.score_spread = 0.12;
    noise.detect_prob = 0.85;
    noise.center_jitter_px = 6.0;
    noise.scale_jitter = 0.10;
    noise.false_positive_rate = 0.04;
    noise.duplicates_min = 2;
    noise.duplicates_max = 5;
    return noise;
}

NoiseModel NoiseModel::omni_baseline() {
    // High-miss single-shot profile: accurate localization, many false
    // negatives, the behaviour a perspective-trained detector shows on
    // strongly distorted omnidirectional images.
    NoiseModel noise;
    noise.score_mean = 0.75;
    noise.score_spread = 0.12;
    noise.detect_prob = 0.45;
    noise.center_jitter_px = 3.0;
    noise.scale_jitter = 0.05;
    noise.false_positive_rate = 0.1;
    noise.duplicates_min = 1;
    noise.duplicates_max = 1;
    return noise;
}

std::vector<Point3> silhouette_points(const PersonProxy& proxy, double width_ratio) {
    // Broadside direction: horizontal, perpendicular to the radial direction
    // from the optical axis; duplicates the visual width of an upright person.
    double ux = 1.0, uy = 0.0;
    const double planar = std::hypot(proxy.foot.x, proxy.foot.y);
    if (planar > 0.0) {
        ux = -proxy.foot.y / planar;
        uy = proxy.foot.x / planar;
    }
    const double half_width = 0.5 * width_ratio * proxy.height;
    std::vector<Point3> points;
    points.reserve(16);
    for (int level = 0; level < 8; ++level) {
        const double t = static_cast<double>(level) / 7.0;
        const double z = proxy.foot.z - t * proxy.height;
        points.push_back({proxy.foot.x - half_width * ux, proxy.foot.y - half_width * uy, z});
        points.push_back({proxy.foot.x + half_width * ux, proxy.foot.y + half_width * uy, z});
    }
    return points;
}

std::vector<GroundTruthBox> render_gt(const SyntheticScene& scene) {
    scene.omni.validate();
    std::vector<GroundTruthBox> out;
    for (std::size_t i = 0; i < scene.proxies.size(); ++i) {
        BoundingBox box{std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
        for (const Point3& p : silhouette_points(scene.proxies[i], scene.width_ratio)) {
            const auto px = project_fisheye(p, scene.omni);
            if (!px) {
                throw std::invalid_argument("render_gt: proxy " + std::to_string(i) +
                                            " leaves the camera field of view");
            }
            box.x_min = std::min(box.x_min, px->x);
            box.y_min = std::min(box.y_min, px->y);
            box.x_max = std::max(box.x_max, px->x);
            box.y_max = std::max(box.y_max, px->y);
        }
        out.push_back({box, "person", "omni"});
    }
    return out;
}

std::vector<ViewDetections> synth_detections(const SyntheticScene& scene,
                                             const std::vector<VirtualView>& views,
                                             const NoiseModel& noise) {
    noise.validate();
    scene.omni.validate();
    Rng rng(scene.seed);

    std::vector<std::vector<Point3>> silhouettes;
    silhouettes.reserve(scene.proxies.size());
    for (const auto& proxy : scene.proxies) {
        silhouettes.push_back(silhouette_points(proxy, scene.width_ratio));
    }

    std::vector<ViewDetections> out;
    out.reserve(views.size());
    for (const auto& view : views) {
        const ViewFrame frame = view_frame(view);
        ViewDetections vd;
        vd.view_id = view.view_id;
        for (const auto& silhouette : silhouettes) {
            const auto box = proxy_view_box(silhouette, view, frame, noise.visibility_margin);
            if (!box) continue;
            emit_true_detections(*box, noise, rng, view.width, view.height,
                                 [&](const BoundingBox& b, double score) {
                                     vd.detections.push_back({b, score, "person", view.view_id});
                                 });
        }
        if (rng.bernoulli(noise.false_positive_rate)) {
            const auto fp_box = random_false_box(rng, view.width, view.height);
            const double score = clamp_score(rng.uniform01() * noise.score_mean);
            if (fp_box) vd.detections.push_back({*fp_box, score, "person", view.view_id});
        }
        out.push_back(std::move(vd));
    }
    return out;
}

std::vector<Detection> synth_omni_detections(const SyntheticScene& scene, const NoiseModel& noise) {
    noise.validate();
    Rng rng(scene.seed ^ kOmniStreamSalt);
    const auto gt = render_gt(scene);
    std::vector<Detection> out;
    for (const auto& g : gt) {
        emit_true_detections(g.box, noise, rng, scene.omni.width, scene.omni.height,
                             [&](const BoundingBox& b, double score) {
                                 out.push_back({b, score, "person", "omni"});
                             });
    }
    if (rng.bernoulli(noise.false_positive_rate)) {
        const auto fp_box = random_false_box(rng, scene.omni.width, scene.omni.height);
        const double score = clamp_score(rng.uniform01() * noise.score_mean);
        if (fp_box) out.push_back({*fp_box, score, "person", "omni"});
    }
    return out;
}

Image render_mask(const SyntheticScene& scene) {
    scene.omni.validate();
    Image img = Image::constant(scene.omni.width, scene.omni.height, 1, 0);
    const double floor_z = scene.proxies.empty() ? 2.8 : scene.proxies.front().foot.z;

    struct Cylinder {
        double cx, cy, radius, z_top, z_bottom;
    };
    std::vector<Cylinder> cylinders;
    for (const auto& proxy : scene.proxies) {
        cylinders.push_back({proxy.foot.x, proxy.foot.y, 0.5 * scene.width_ratio * proxy.height,
                             proxy.foot.z - proxy.height, proxy.foot.z});
    }

#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const auto ray = unproject_fisheye({static_cast<double>(x), static_cast<double>(y)},
                                               scene.omni);
            if (!ray) continue;  // outside the fisheye circle: black
            std::uint8_t shade = 0;
            if (ray->z > 1e-9) {
                // checkerboard floor
                const double t = floor_z / ray->z;
                const double fx = t * ray->x;
                const double fy = t * ray->y;
                const bool odd = (static_cast<long long>(std::floor(fx)) +
                                  static_cast<long long>(std::floor(fy))) & 1;
                shade = odd ? 60 : 110;
            }
            for (const auto& cyl : cylinders) {
                // ray-cylinder intersection in the horizontal plane
                const double a = ray->x * ray->x + ray->y * ray->y;
                const double c = cyl.cx * cyl.cx + cyl.cy * cyl.cy - cyl.radius * cyl.radius;
                if (a < 1e-12) {
                    // vertical ray: inside the cylinder footprint iff c <= 0
                    if (c <= 0.0 && ray->z > 0.0 && cyl.z_bottom > 0.0) shade = 230;
                    continue;
                }
                const double b = -2.0 * (ray->x * cyl.cx + ray->y * cyl.cy);
                const double disc = b * b - 4.0 * a * c;
                if (disc < 0.0 || !(ray->z > 1e-12)) continue;
                const double sqrt_disc = std::sqrt(disc);
                // solid cylinder: the ray is inside the infinite cylinder for
                // t in [t1, t2]; intersect that with the slab z in [top, bottom]
                const double t1 = (-b - sqrt_disc) / (2.0 * a);
                const double t2 = (-b + sqrt_disc) / (2.0 * a);
                const double t_lo = std::max({t1, cyl.z_top / ray->z, 0.0});
                const double t_hi = std::min(t2, cyl.z_bottom / ray->z);
                if (t_lo <= t_hi) shade = 230;
            }
            img.at(x, y) = shade;
        }
    }
    return img;
}

SyntheticScene random_scene(std::uint64_t seed, const FisheyeCamera& omni, const SceneParams& params) {
    // placement uses a salted stream so detection noise (seeded with the raw
    // seed) never replays the same values
    Rng rng(seed ^ 0x7363656e);  // "scen"
    SyntheticScene scene;
    scene.omni = omni;
    scene.seed = seed;

    auto gt_box = [&](const PersonProxy& proxy) {
        BoundingBox box{std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
        for (const Point3& p : silhouette_points(proxy, scene.width_ratio)) {
            const auto px = project_fisheye(p, omni);
            if (!px) return std::optional<BoundingBox>{};
            box.x_min = std::min(box.x_min, px->x);
            box.y_min = std::min(box.y_min, px->y);
            box.x_max = std::max(box.x_max, px->x);
            box.y_max = std::max(box.y_max, px->y);
        }
        return std::optional<BoundingBox>{box};
    };

    std::vector<BoundingBox> placed_boxes;
    const int count = rng.uniform_int(params.proxies_min, params.proxies_max);
    for (int i = 0; i < count; ++i) {
        for (int attempt = 0; attempt < params.placement_attempts; ++attempt) {
            const double theta = rng.uniform(params.theta_min, params.theta_max);
            const double phi = rng.uniform(-kPi, kPi);
            const double height = rng.uniform(params.height_min, params.height_max);
            const double d = params.mount_height * std::tan(theta);
            const PersonProxy candidate{{d * std::cos(phi), d * std::sin(phi), params.mount_height},
                                        height};
            const auto box = gt_box(candidate);
            if (!box) continue;
            bool separated = true;
            for (const auto& other : placed_boxes) {
                if (iou(*box, other) > params.max_gt_overlap) {
                    separated = false;
                    break;
                }
            }
            if (!separated) continue;
            scene.proxies.push_back(candidate);
            placed_boxes.push_back(*box);
            break;
        }
    }
    return scene;
}

SyntheticScene load_scene(const std::filesystem::path& path) {
    const KeyValueFile kv = KeyValueFile::load(path);
    kv.require_known_keys({"camera", "seed", "width_ratio", "proxy"});
    SyntheticScene scene;
    std::filesystem::path camera_path = kv.get_string("camera");
    if (!camera_path.is_absolute()) camera_path = path.parent_path() / camera_path;
    scene.omni = load_fisheye_camera(camera_path);
    scene.seed = kv.get_uint64("seed", 0);
    scene.width_ratio = kv.get_double("width_ratio", 0.35);
    for (const auto& value : kv.get_all("proxy")) {
        std::istringstream tokens(value);
        PersonProxy proxy;
        if (!(tokens >> proxy.foot.x >> proxy.foot.y >> proxy.foot.z >> proxy.height)) {
            throw ConfigError(path.string() + ": proxy expects `x y z height`, got '" + value + "'");
        }
        scene.proxies.push_back(proxy);
    }
    return scene;
}

}  // namespace omnidet
