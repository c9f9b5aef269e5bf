#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "omnidet/geometry.hpp"
#include "omnidet/image.hpp"

namespace omnidet {

/// One virtual perspective camera. The image size is tied to the principal
/// point: width = round(2*cx), height = round(2*cy).
struct VirtualView {
    std::string view_id;
    double azimuth = 0.0;
    double elevation = 0.0;
    PinholeIntrinsics intrinsics;
    int width = 0;
    int height = 0;
};

/// "e{elevation:.2f}_a{azimuth:+.2f}" — stable key used in detection files.
std::string make_view_id(double elevation, double azimuth);

VirtualView make_virtual_view(double azimuth, double elevation, const PinholeIntrinsics& intrinsics);

struct ViewGridSpec {
    double azimuth_start = 0.0;
    double azimuth_end = 0.0;
    double azimuth_step = 1.0;
    double elevation_start = 0.0;
    double elevation_end = 0.0;
    double elevation_step = 1.0;
    PinholeIntrinsics intrinsics;

    void validate() const;  // throws ConfigError
};

/// Grid values are start + k*step for k >= 0 while the value stays within
/// end + 1e-12. Ordering is elevation-major, azimuth ascending within.
std::vector<double> grid_values(double start, double end, double step);
std::vector<VirtualView> enumerate_views(const ViewGridSpec& spec);

/// Per-target-pixel source coordinates into the omnidirectional image.
/// Invalid entries carry src (0,0).
struct LookupTable {
    int width = 0;
    int height = 0;
    std::vector<double> src_x;
    std::vector<double> src_y;
    std::vector<std::uint8_t> valid;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    std::size_t valid_count() const;
    static LookupTable invalid_filled(int width, int height);
};

enum class Interpolation { nearest, bilinear };

/// Maps one view pixel to omnidirectional coordinates; same math as
/// build_lut but evaluated at a single sub-pixel point. Returns nullopt
/// when the ray leaves the fisheye field of view. The pixel must lie in
/// [0,width] x [0,height] of the view.
std::optional<Point2> map_point_to_omni(const Point2& px, const VirtualView& view,
                                        const FisheyeCamera& omni);

/// LUT over the view's pixel centers; entries are invalid when the ray is
/// outside theta_max or the source sample falls outside the omni image.
LookupTable build_lut(const VirtualView& view, const FisheyeCamera& omni);

/// Resamples the omnidirectional image through the LUT. Invalid entries
/// render black. Bilinear accumulates in double and rounds half away from
/// zero. Throws std::invalid_argument when a valid entry lies outside the
/// given image.
Image remap(const Image& omni_image, const LookupTable& lut,
            Interpolation interpolation = Interpolation::bilinear);

/// Serial implementations kept as the reference for the parallel kernels.
namespace reference {
LookupTable build_lut(const VirtualView& view, const FisheyeCamera& omni);
Image remap(const Image& omni_image, const LookupTable& lut,
            Interpolation interpolation = Interpolation::bilinear);
}  // namespace reference

/// Binary LUT format, little-endian:
/// magic "OLUT", u16 version=1, u32 width, u32 height,
/// then width*height row-major entries of (f32 src_x, f32 src_y, u8 valid).
std::vector<std::uint8_t> export_lut(const LookupTable& lut);
LookupTable import_lut(const std::vector<std::uint8_t>& bytes, const std::string& source_name = "lut");
void save_lut(const LookupTable& lut, const std::filesystem::path& path);
LookupTable load_lut(const std::filesystem::path& path);

}  // namespace omnidet
