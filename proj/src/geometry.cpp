#include "omnidet/geometry.hpp"

#include <cstdio>
#include <fstream>

#include "omnidet/config.hpp"

namespace omnidet {

namespace {

constexpr double kOrthoTol = 1e-9;

bool finite(double v) { return std::isfinite(v); }

void require_finite(const Point3& p, const char* what) {
    if (!finite(p.x) || !finite(p.y) || !finite(p.z)) {
        throw std::invalid_argument(std::string(what) + ": coordinates must be finite");
    }
}

void require_finite(const Point2& p, const char* what) {
    if (!finite(p.x) || !finite(p.y)) {
        throw std::invalid_argument(std::string(what) + ": coordinates must be finite");
    }
}

/// Forward radial profile r(theta) in pixels.
double radius_of_theta(double theta, const FisheyeCamera& cam) {
    switch (cam.projection) {
        case FisheyeProjection::equidistant:
            return cam.focal * theta;
        case FisheyeProjection::equisolid:
            return 2.0 * cam.focal * std::sin(theta / 2.0);
        case FisheyeProjection::stereographic:
            return 2.0 * cam.focal * std::tan(theta / 2.0);
        case FisheyeProjection::orthographic:
            return cam.focal * std::sin(theta);
    }
    throw std::logic_error("unreachable projection kind");
}

/// Inverse radial profile; nullopt when r lies outside the invertible domain.
std::optional<double> theta_of_radius(double r, const FisheyeCamera& cam) {
    switch (cam.projection) {
        case FisheyeProjection::equidistant:
            return r / cam.focal;
        case FisheyeProjection::equisolid: {
            const double s = r / (2.0 * cam.focal);
            if (s > 1.0) return std::nullopt;
            return 2.0 * std::asin(s);
        }
        case FisheyeProjection::stereographic:
            return 2.0 * std::atan(r / (2.0 * cam.focal));
        case FisheyeProjection::orthographic: {
            const double s = r / cam.focal;
            if (s > 1.0) return std::nullopt;
            return std::asin(s);
        }
    }
    throw std::logic_error("unreachable projection kind");
}

}  // namespace

void PinholeIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("pinhole focal lengths must be positive");
    if (!(cx > 0.0) || !(cy > 0.0)) throw std::invalid_argument("pinhole principal point must be positive");
    if (!finite(skew)) throw std::invalid_argument("pinhole skew must be finite");
}

Rotation::Rotation(const std::array<double, 9>& entries) : m_(entries) {
    // R * R^T = I
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m_[i * 3 + k] * m_[j * 3 + k];
            const double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(acc - expect) > kOrthoTol) {
                throw std::invalid_argument("rotation entries are not orthonormal");
            }
        }
    }
    const double det = m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) -
                       m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
                       m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
    if (std::abs(det - 1.0) > kOrthoTol) {
        throw std::invalid_argument("rotation determinant must be +1");
    }
}

Rotation Rotation::about_x(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return Rotation({1, 0, 0, 0, c, -s, 0, s, c}, Unchecked{});
}

Rotation Rotation::about_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return Rotation({c, -s, 0, s, c, 0, 0, 0, 1}, Unchecked{});
}

Rotation Rotation::transposed() const {
    return Rotation({m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]}, Unchecked{});
}

Rotation Rotation::operator*(const Rotation& rhs) const {
    std::array<double, 9> out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m_[i * 3 + k] * rhs.m_[k * 3 + j];
            out[i * 3 + j] = acc;
        }
    }
    return Rotation(out, Unchecked{});
}

Rotation rotation_from_azimuth_elevation(double azimuth, double elevation) {
    return Rotation::about_z(azimuth) * Rotation::about_x(elevation);
}

Point3 Extrinsics::camera_center() const {
    const Rotation rt = rotation.transposed();
    const Point3 c = rt.apply(translation);
    return {-c.x, -c.y, -c.z};
}

std::string to_string(FisheyeProjection kind) {
    switch (kind) {
        case FisheyeProjection::equidistant: return "equidistant";
        case FisheyeProjection::equisolid: return "equisolid";
        case FisheyeProjection::stereographic: return "stereographic";
        case FisheyeProjection::orthographic: return "orthographic";
    }
    throw std::logic_error("unreachable projection kind");
}

FisheyeProjection fisheye_projection_from_string(std::string_view name) {
    if (name == "equidistant") return FisheyeProjection::equidistant;
    if (name == "equisolid") return FisheyeProjection::equisolid;
    if (name == "stereographic") return FisheyeProjection::stereographic;
    if (name == "orthographic") return FisheyeProjection::orthographic;
    throw ConfigError("unknown fisheye projection model '" + std::string(name) + "'");
}

void FisheyeCamera::validate() const {
    if (!(focal > 0.0)) throw std::invalid_argument("fisheye focal must be positive");
    if (!(theta_max > 0.0) || !(theta_max <= kPi)) {
        throw std::invalid_argument("theta_max must lie in (0, pi]");
    }
    if (projection == FisheyeProjection::orthographic && theta_max > kPi / 2) {
        throw std::invalid_argument("orthographic projection requires theta_max <= pi/2");
    }
    if (width <= 0 || height <= 0) throw std::invalid_argument("fisheye image size must be positive");
    if (!(cx >= 0.0) || !(cx <= width - 1.0) || !(cy >= 0.0) || !(cy <= height - 1.0)) {
        throw std::invalid_argument("fisheye principal point must lie inside the image");
    }
}

Point2 project_pinhole(const Point3& p, const PinholeIntrinsics& K) {
    require_finite(p, "project_pinhole");
    if (!(p.z > 0.0)) throw std::invalid_argument("project_pinhole: point is behind the camera (z <= 0)");
    const double xn = p.x / p.z;
    const double yn = p.y / p.z;
    return {K.fx * xn + K.skew * yn + K.cx, K.fy * yn + K.cy};
}

Point3 unproject_pinhole(const Point2& px, const PinholeIntrinsics& K) {
    require_finite(px, "unproject_pinhole");
    const double yn = (px.y - K.cy) / K.fy;
    const double xn = (px.x - K.cx - K.skew * yn) / K.fx;
    return Point3{xn, yn, 1.0}.normalized();
}

std::optional<Point2> project_fisheye(const Point3& ray, const FisheyeCamera& cam) {
    require_finite(ray, "project_fisheye");
    const double planar = std::hypot(ray.x, ray.y);
    const double len = std::hypot(planar, ray.z);
    if (len == 0.0) throw std::invalid_argument("project_fisheye: zero-length ray");
    const double theta = std::atan2(planar, ray.z);
    if (theta > cam.theta_max) return std::nullopt;
    if (planar == 0.0) return Point2{cam.cx, cam.cy};
    const double r = radius_of_theta(theta, cam);
    return Point2{cam.cx + r * ray.x / planar, cam.cy + r * ray.y / planar};
}

std::optional<Point3> unproject_fisheye(const Point2& px, const FisheyeCamera& cam) {
    require_finite(px, "unproject_fisheye");
    const double dx = px.x - cam.cx;
    const double dy = px.y - cam.cy;
    const double r = std::hypot(dx, dy);
    if (r == 0.0) return Point3{0.0, 0.0, 1.0};
    const auto theta = theta_of_radius(r, cam);
    if (!theta || *theta > cam.theta_max) return std::nullopt;
    const double s = std::sin(*theta);
    return Point3{s * dx / r, s * dy / r, std::cos(*theta)};
}

double fov_h(const PinholeIntrinsics& K) { return 2.0 * std::atan(K.cx / (2.0 * K.fx)); }

double fov_v(const PinholeIntrinsics& K) { return 2.0 * std::atan(K.cy / (2.0 * K.fy)); }

double fov_d(const PinholeIntrinsics& K) {
    const double c = std::sqrt(K.cx * K.cx + K.cy * K.cy);
    const double f = std::sqrt(K.fx * K.fx + K.fy * K.fy);
    return 2.0 * std::atan(c / (2.0 * f));
}

FisheyeCamera parse_fisheye_camera(std::istream& in, std::string source_name) {
    const KeyValueFile kv = KeyValueFile::parse(in, std::move(source_name));
    kv.require_known_keys({"model", "focal", "cx", "cy", "width", "height", "theta_max"});
    FisheyeCamera cam;
    cam.projection = fisheye_projection_from_string(kv.get_string("model", "equidistant"));
    cam.focal = kv.get_double("focal");
    cam.cx = kv.get_double("cx");
    cam.cy = kv.get_double("cy");
    cam.width = kv.get_int("width");
    cam.height = kv.get_int("height");
    cam.theta_max = kv.get_double("theta_max", kPi / 2);
    try {
        cam.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(kv.source() + ": " + err.what());
    }
    return cam;
}

FisheyeCamera load_fisheye_camera(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open camera config: " + path.string());
    return parse_fisheye_camera(in, path.string());
}

void write_fisheye_camera(const FisheyeCamera& cam, std::ostream& out) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "model=%s\nfocal=%.17g\ncx=%.17g\ncy=%.17g\nwidth=%d\nheight=%d\ntheta_max=%.17g\n",
                  to_string(cam.projection).c_str(), cam.focal, cam.cx, cam.cy, cam.width,
                  cam.height, cam.theta_max);
    out << buf;
}

}  // namespace omnidet
