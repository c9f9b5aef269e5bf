#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>

#include "omnidet/errors.hpp"

namespace omnidet {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Point3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Pinhole intrinsics: focal scales, skew and principal point, all in pixels.
struct PinholeIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double skew = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    void validate() const;  // throws std::invalid_argument
};

/// 3x3 orthonormal rotation, row-major. Construct through the factories;
/// the raw-entry constructor checks R*R^T = I and det(R) = +1 to 1e-9.
class Rotation {
  public:
    Rotation() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
    explicit Rotation(const std::array<double, 9>& entries);

    static Rotation identity() { return Rotation(); }
    static Rotation about_x(double angle);
    static Rotation about_z(double angle);

    Point3 apply(const Point3& p) const {
        return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z,
                m_[3] * p.x + m_[4] * p.y + m_[5] * p.z,
                m_[6] * p.x + m_[7] * p.y + m_[8] * p.z};
    }
    Rotation transposed() const;
    Rotation operator*(const Rotation& rhs) const;
    double at(int row, int col) const { return m_[row * 3 + col]; }

  private:
    struct Unchecked {};
    Rotation(const std::array<double, 9>& entries, Unchecked) : m_(entries) {}

    std::array<double, 9> m_;
};

/// R = R_z(azimuth) * R_x(elevation): elevation tilts the optical axis first,
/// azimuth then sweeps it around the z-axis.
Rotation rotation_from_azimuth_elevation(double azimuth, double elevation);

struct Extrinsics {
    Rotation rotation;
    Point3 translation;

    /// C = -R^T * t
    Point3 camera_center() const;
};

enum class FisheyeProjection { equidistant, equisolid, stereographic, orthographic };

std::string to_string(FisheyeProjection kind);
FisheyeProjection fisheye_projection_from_string(std::string_view name);

/// Central fisheye camera with a radially symmetric projection r(theta).
struct FisheyeCamera {
    double focal = 0.0;  // pixels
    double cx = 0.0;
    double cy = 0.0;
    FisheyeProjection projection = FisheyeProjection::equidistant;
    double theta_max = kPi / 2;  // half field of view, radians
    int width = 0;
    int height = 0;

    void validate() const;  // throws std::invalid_argument
};

/// Central projection through K; requires p.z > 0.
Point2 project_pinhole(const Point3& p, const PinholeIntrinsics& K);

/// Unit ray through the pixel; project_pinhole(unproject_pinhole(px)) == px.
Point3 unproject_pinhole(const Point2& px, const PinholeIntrinsics& K);

/// Pixel for a camera-frame ray, or nullopt when the ray falls outside
/// theta_max. Throws on a zero-length ray.
std::optional<Point2> project_fisheye(const Point3& ray, const FisheyeCamera& cam);

/// Unit ray for a pixel, or nullopt when the pixel radius implies
/// theta > theta_max (or lies outside the model's invertible domain).
std::optional<Point3> unproject_fisheye(const Point2& px, const FisheyeCamera& cam);

double fov_h(const PinholeIntrinsics& K);
double fov_v(const PinholeIntrinsics& K);
double fov_d(const PinholeIntrinsics& K);

/// Camera config file: key=value with keys
/// model, focal, cx, cy, width, height, theta_max.
FisheyeCamera parse_fisheye_camera(std::istream& in, std::string source_name);
FisheyeCamera load_fisheye_camera(const std::filesystem::path& path);
void write_fisheye_camera(const FisheyeCamera& cam, std::ostream& out);

}  // namespace omnidet
