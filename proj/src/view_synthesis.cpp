#include "omnidet/view_synthesis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace omnidet {

namespace {

constexpr double kGridEps = 1e-12;

bool inside_source(const Point2& p, const FisheyeCamera& omni) {
    return p.x >= 0.0 && p.x <= omni.width - 1.0 && p.y >= 0.0 && p.y <= omni.height - 1.0;
}

std::optional<Point2> view_pixel_to_omni(const Point2& px, const PinholeIntrinsics& K,
                                         const Rotation& rot, const FisheyeCamera& omni) {
    const Point3 ray_view = unproject_pinhole(px, K);
    return project_fisheye(rot.apply(ray_view), omni);
}

void fill_lut_row(LookupTable& lut, int y, const PinholeIntrinsics& K, const Rotation& rot,
                  const FisheyeCamera& omni) {
    for (int x = 0; x < lut.width; ++x) {
        const auto src = view_pixel_to_omni({static_cast<double>(x), static_cast<double>(y)}, K,
                                            rot, omni);
        const std::size_t i = lut.index(x, y);
        if (src && inside_source(*src, omni)) {
            lut.src_x[i] = src->x;
            lut.src_y[i] = src->y;
            lut.valid[i] = 1;
        }
    }
}

std::uint8_t sample_nearest(const Image& img, double sx, double sy, int c) {
    const int xi = std::clamp(static_cast<int>(std::floor(sx + 0.5)), 0, img.width - 1);
    const int yi = std::clamp(static_cast<int>(std::floor(sy + 0.5)), 0, img.height - 1);
    return img.at(xi, yi, c);
}

std::uint8_t sample_bilinear(const Image& img, double sx, double sy, int c) {
    const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, img.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, img.height - 1);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
    const double bot = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
    const double v = (1.0 - fy) * top + fy * bot;
    // round half away from zero; v is non-negative here
    return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

void remap_row(Image& out, const Image& src, const LookupTable& lut, int y,
               Interpolation interpolation) {
    for (int x = 0; x < lut.width; ++x) {
        const std::size_t i = lut.index(x, y);
        if (!lut.valid[i]) continue;  // output pre-filled black
        for (int c = 0; c < src.channels; ++c) {
            out.at(x, y, c) = (interpolation == Interpolation::bilinear)
                                  ? sample_bilinear(src, lut.src_x[i], lut.src_y[i], c)
                                  : sample_nearest(src, lut.src_x[i], lut.src_y[i], c);
        }
    }
}

void check_remap_inputs(const Image& omni_image, const LookupTable& lut) {
    if (omni_image.channels != 1 && omni_image.channels != 3) {
        throw std::invalid_argument("remap: image channels must be 1 or 3");
    }
    if (omni_image.data.size() != static_cast<std::size_t>(omni_image.width) * omni_image.height *
                                      omni_image.channels) {
        throw std::invalid_argument("remap: pixel buffer does not match image dimensions");
    }
    const double max_x = omni_image.width - 1.0;
    const double max_y = omni_image.height - 1.0;
    for (std::size_t i = 0; i < lut.valid.size(); ++i) {
        if (!lut.valid[i]) continue;
        if (lut.src_x[i] < 0.0 || lut.src_x[i] > max_x || lut.src_y[i] < 0.0 ||
            lut.src_y[i] > max_y) {
            throw std::invalid_argument(
                "remap: image dimensions do not match the LUT source bounds");
        }
    }
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void append_f32(std::vector<std::uint8_t>& out, float v) {
    append_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float read_f32(const std::uint8_t* p) { return std::bit_cast<float>(read_u32(p)); }

}  // namespace

std::string make_view_id(double elevation, double azimuth) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "e%.2f_a%+.2f", elevation, azimuth);
    return buf;
}

VirtualView make_virtual_view(double azimuth, double elevation, const PinholeIntrinsics& intrinsics) {
    intrinsics.validate();
    VirtualView view;
    view.view_id = make_view_id(elevation, azimuth);
    view.azimuth = azimuth;
    view.elevation = elevation;
    view.intrinsics = intrinsics;
    view.width = static_cast<int>(std::lround(2.0 * intrinsics.cx));
    view.height = static_cast<int>(std::lround(2.0 * intrinsics.cy));
    if (view.width <= 0 || view.height <= 0) {
        throw std::invalid_argument("virtual view resolution 2*cx x 2*cy must be positive");
    }
    return view;
}

void ViewGridSpec::validate() const {
    try {
        intrinsics.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("view grid intrinsics: ") + err.what());
    }
    if (!(azimuth_step > 0.0) || !(elevation_step > 0.0)) {
        throw ConfigError("view grid steps must be positive");
    }
    if (azimuth_start > azimuth_end || elevation_start > elevation_end) {
        throw ConfigError("view grid start must not exceed end");
    }
}

std::vector<double> grid_values(double start, double end, double step) {
    if ((end - start) / step > 1e6) {
        throw ConfigError("grid step produces more than a million values");
    }
    std::vector<double> values;
    for (int k = 0;; ++k) {
        const double v = start + k * step;
        if (v > end + kGridEps) break;
        values.push_back(v);
    }
    return values;
}

std::vector<VirtualView> enumerate_views(const ViewGridSpec& spec) {
    spec.validate();
    const auto elevations = grid_values(spec.elevation_start, spec.elevation_end, spec.elevation_step);
    const auto azimuths = grid_values(spec.azimuth_start, spec.azimuth_end, spec.azimuth_step);
    if (elevations.empty() || azimuths.empty()) throw ConfigError("view grid is empty");
    if (elevations.size() * azimuths.size() > 100000) {
        throw ConfigError("view grid exceeds 100000 views; use coarser steps");
    }

    std::vector<VirtualView> views;
    views.reserve(elevations.size() * azimuths.size());
    std::unordered_set<std::string> ids;
    for (const double elevation : elevations) {
        for (const double azimuth : azimuths) {
            views.push_back(make_virtual_view(azimuth, elevation, spec.intrinsics));
            if (!ids.insert(views.back().view_id).second) {
                throw ConfigError("view grid produces duplicate view_id '" +
                                  views.back().view_id + "'; use coarser steps");
            }
        }
    }
    return views;
}

std::size_t LookupTable::valid_count() const {
    std::size_t n = 0;
    for (const auto v : valid) n += v;
    return n;
}

LookupTable LookupTable::invalid_filled(int width, int height) {
    LookupTable lut;
    lut.width = width;
    lut.height = height;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    lut.src_x.assign(n, 0.0);
    lut.src_y.assign(n, 0.0);
    lut.valid.assign(n, 0);
    return lut;
}

std::optional<Point2> map_point_to_omni(const Point2& px, const VirtualView& view,
                                        const FisheyeCamera& omni) {
    if (px.x < 0.0 || px.x > view.width || px.y < 0.0 || px.y > view.height) {
        throw std::invalid_argument("map_point_to_omni: pixel outside the view");
    }
    const Rotation rot = rotation_from_azimuth_elevation(view.azimuth, view.elevation);
    return view_pixel_to_omni(px, view.intrinsics, rot, omni);
}

LookupTable build_lut(const VirtualView& view, const FisheyeCamera& omni) {
    view.intrinsics.validate();
    omni.validate();
    const Rotation rot = rotation_from_azimuth_elevation(view.azimuth, view.elevation);
    LookupTable lut = LookupTable::invalid_filled(view.width, view.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < lut.height; ++y) {
        fill_lut_row(lut, y, view.intrinsics, rot, omni);
    }
    return lut;
}

Image remap(const Image& omni_image, const LookupTable& lut, Interpolation interpolation) {
    check_remap_inputs(omni_image, lut);
    Image out = Image::constant(lut.width, lut.height, omni_image.channels, 0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < lut.height; ++y) {
        remap_row(out, omni_image, lut, y, interpolation);
    }
    return out;
}

namespace reference {

LookupTable build_lut(const VirtualView& view, const FisheyeCamera& omni) {
    view.intrinsics.validate();
    omni.validate();
    const Rotation rot = rotation_from_azimuth_elevation(view.azimuth, view.elevation);
    LookupTable lut = LookupTable::invalid_filled(view.width, view.height);
    for (int y = 0; y < lut.height; ++y) {
        fill_lut_row(lut, y, view.intrinsics, rot, omni);
    }
    return lut;
}

Image remap(const Image& omni_image, const LookupTable& lut, Interpolation interpolation) {
    check_remap_inputs(omni_image, lut);
    Image out = Image::constant(lut.width, lut.height, omni_image.channels, 0);
    for (int y = 0; y < lut.height; ++y) {
        remap_row(out, omni_image, lut, y, interpolation);
    }
    return out;
}

}  // namespace reference

std::vector<std::uint8_t> export_lut(const LookupTable& lut) {
    std::vector<std::uint8_t> bytes;
    const std::size_t n = static_cast<std::size_t>(lut.width) * lut.height;
    bytes.reserve(14 + 9 * n);
    for (const char c : {'O', 'L', 'U', 'T'}) bytes.push_back(static_cast<std::uint8_t>(c));
    append_u16(bytes, 1);
    append_u32(bytes, static_cast<std::uint32_t>(lut.width));
    append_u32(bytes, static_cast<std::uint32_t>(lut.height));
    for (std::size_t i = 0; i < n; ++i) {
        append_f32(bytes, static_cast<float>(lut.src_x[i]));
        append_f32(bytes, static_cast<float>(lut.src_y[i]));
        bytes.push_back(lut.valid[i] ? 1 : 0);
    }
    return bytes;
}

LookupTable import_lut(const std::vector<std::uint8_t>& bytes, const std::string& source_name) {
    if (bytes.size() < 14 || std::memcmp(bytes.data(), "OLUT", 4) != 0) {
        throw ParseError(source_name + ": bad LUT magic");
    }
    const std::uint16_t version = read_u16(bytes.data() + 4);
    if (version != 1) {
        throw ParseError(source_name + ": unsupported LUT version " + std::to_string(version));
    }
    const std::uint32_t width = read_u32(bytes.data() + 6);
    const std::uint32_t height = read_u32(bytes.data() + 10);
    if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20)) {
        throw ParseError(source_name + ": bad LUT dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (bytes.size() != 14 + 9 * n) {
        throw ParseError(source_name + ": truncated LUT payload");
    }
    LookupTable lut = LookupTable::invalid_filled(static_cast<int>(width), static_cast<int>(height));
    const std::uint8_t* p = bytes.data() + 14;
    for (std::size_t i = 0; i < n; ++i, p += 9) {
        lut.src_x[i] = read_f32(p);
        lut.src_y[i] = read_f32(p + 4);
        const std::uint8_t flag = p[8];
        if (flag > 1) throw ParseError(source_name + ": bad validity flag");
        lut.valid[i] = flag;
    }
    return lut;
}

void save_lut(const LookupTable& lut, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write LUT: " + path.string());
    const auto bytes = export_lut(lut);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

LookupTable load_lut(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open LUT: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return import_lut(bytes, path.string());
}

}  // namespace omnidet
