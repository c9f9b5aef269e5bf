#include <cmath>
#include <random>

#include "doctest.h"
#include "omnidet/view_synthesis.hpp"

using namespace omnidet;

namespace {

PinholeIntrinsics view_intrinsics() { return {100.0, 100.0, 0.0, 100.0, 100.0}; }

FisheyeCamera omni_camera() {
    FisheyeCamera cam;
    cam.focal = 190.0;
    cam.cx = 299.5;
    cam.cy = 299.5;
    cam.width = 600;
    cam.height = 600;
    cam.theta_max = kPi / 2;
    return cam;
}

ViewGridSpec sweep_grid() {
    ViewGridSpec spec;
    spec.azimuth_start = -3.14;
    spec.azimuth_end = 3.14;
    spec.azimuth_step = 0.2;
    spec.elevation_start = 0.0;
    spec.elevation_end = 0.9;
    spec.elevation_step = 0.3;
    spec.intrinsics = view_intrinsics();
    return spec;
}

}  // namespace

TEST_CASE("grid_values includes endpoints reached within 1e-12") {
    CHECK(grid_values(0.0, 0.9, 0.3).size() == 4);
    CHECK(grid_values(-3.14, 3.14, 0.2).size() == 32);
    CHECK(grid_values(0.5, 0.5, 1.0).size() == 1);
}

TEST_CASE("enumerate_views yields the 128-view grid, elevation-major") {
    const auto views = enumerate_views(sweep_grid());
    REQUIRE(views.size() == 128);
    CHECK(views.front().view_id == "e0.00_a-3.14");
    CHECK(views[31].view_id == "e0.00_a+3.06");
    CHECK(views[32].view_id == "e0.30_a-3.14");
    CHECK(views.back().view_id == "e0.90_a+3.06");
    for (const auto& v : views) {
        CHECK(v.width == 200);
        CHECK(v.height == 200);
    }
}

TEST_CASE("enumerate_views single cell") {
    ViewGridSpec spec = sweep_grid();
    spec.azimuth_start = spec.azimuth_end = 0.4;
    spec.elevation_start = spec.elevation_end = 0.3;
    const auto views = enumerate_views(spec);
    REQUIRE(views.size() == 1);
    CHECK(views[0].view_id == "e0.30_a+0.40");
}

TEST_CASE("enumerate_views rejects bad grids") {
    ViewGridSpec spec = sweep_grid();
    spec.azimuth_step = 0.0;
    CHECK_THROWS_AS(enumerate_views(spec), ConfigError);
    spec = sweep_grid();
    spec.elevation_start = 1.0;
    spec.elevation_end = 0.0;
    CHECK_THROWS_AS(enumerate_views(spec), ConfigError);
}

TEST_CASE("aligned view maps its center to the omni principal point") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 0.0, view_intrinsics());
    const auto lut = build_lut(view, omni);
    const auto i = lut.index(100, 100);
    REQUIRE(lut.valid[i] == 1);
    CHECK(lut.src_x[i] == doctest::Approx(omni.cx).epsilon(1e-12));
    CHECK(lut.src_y[i] == doctest::Approx(omni.cy).epsilon(1e-12));
}

TEST_CASE("high-elevation view straddles theta_max") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 1.4, view_intrinsics());
    const auto lut = build_lut(view, omni);
    const std::size_t valid = lut.valid_count();
    CHECK(valid > 0);
    CHECK(valid < lut.valid.size());
}

TEST_CASE("map_point_to_omni agrees with LUT entries") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.8, 0.6, view_intrinsics());
    const auto lut = build_lut(view, omni);
    for (int y = 0; y < view.height; y += 17) {
        for (int x = 0; x < view.width; x += 13) {
            const auto p = map_point_to_omni({static_cast<double>(x), static_cast<double>(y)},
                                             view, omni);
            const auto i = lut.index(x, y);
            if (lut.valid[i]) {
                REQUIRE(p.has_value());
                CHECK(std::abs(p->x - lut.src_x[i]) < 1e-9);
                CHECK(std::abs(p->y - lut.src_y[i]) < 1e-9);
            }
        }
    }
}

TEST_CASE("map_point_to_omni rejects pixels outside the view") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 0.0, view_intrinsics());
    CHECK_THROWS_AS(map_point_to_omni({-1.0, 5.0}, view, omni), std::invalid_argument);
    CHECK_THROWS_AS(map_point_to_omni({5.0, 201.0}, view, omni), std::invalid_argument);
}

TEST_CASE("high-elevation view corners fall out of the field of view") {
    // elevation tilts the axis toward -y, so the y=0 edge tips past theta_max
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 1.5, view_intrinsics());
    CHECK_FALSE(map_point_to_omni({0.0, 0.0}, view, omni).has_value());
}

TEST_CASE("full view-loop closure within 1e-4 px") {
    const auto omni = omni_camera();
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> upix(0.0, 199.0);
    std::uniform_real_distribution<double> uaz(-3.14, 3.14);
    std::uniform_real_distribution<double> uel(0.0, 0.9);
    for (int i = 0; i < 500; ++i) {
        const auto view = make_virtual_view(uaz(rng), uel(rng), view_intrinsics());
        const Point2 px{upix(rng), upix(rng)};
        const auto src = map_point_to_omni(px, view, omni);
        if (!src) continue;
        const auto ray_omni = unproject_fisheye(*src, omni);
        REQUIRE(ray_omni.has_value());
        const Rotation rot = rotation_from_azimuth_elevation(view.azimuth, view.elevation);
        const Point3 ray_view = rot.transposed().apply(*ray_omni);
        const Point2 back = project_pinhole(ray_view, view.intrinsics);
        CHECK(std::abs(back.x - px.x) < 1e-4);
        CHECK(std::abs(back.y - px.y) < 1e-4);
    }
}

TEST_CASE("parallel LUT construction matches the serial reference exactly") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(-1.2, 0.9, view_intrinsics());
    const auto par = build_lut(view, omni);
    const auto ser = reference::build_lut(view, omni);
    REQUIRE(par.valid.size() == ser.valid.size());
    CHECK(par.valid == ser.valid);
    CHECK(par.src_x == ser.src_x);
    CHECK(par.src_y == ser.src_y);
}

TEST_CASE("remap of a constant image is constant on the valid region") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.5, 0.6, view_intrinsics());
    const auto lut = build_lut(view, omni);
    const Image src = Image::constant(omni.width, omni.height, 1, 77);
    const Image out = remap(src, lut);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const auto expected = lut.valid[lut.index(x, y)] ? 77 : 0;
            REQUIRE(out.at(x, y) == expected);
        }
    }
}

TEST_CASE("identity LUT reproduces the input crop") {
    Image src = Image::constant(16, 16, 1, 0);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) src.at(x, y) = static_cast<std::uint8_t>(16 * y + x);
    }
    LookupTable lut = LookupTable::invalid_filled(8, 8);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const auto i = lut.index(x, y);
            lut.src_x[i] = x;
            lut.src_y[i] = y;
            lut.valid[i] = 1;
        }
    }
    const Image out = remap(src, lut, Interpolation::bilinear);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) REQUIRE(out.at(x, y) == src.at(x, y));
    }
}

TEST_CASE("bilinear at a half-integer rounds half away from zero") {
    Image src = Image::constant(2, 1, 1, 0);
    src.at(1, 0) = 255;
    LookupTable lut = LookupTable::invalid_filled(1, 1);
    lut.src_x[0] = 0.5;
    lut.src_y[0] = 0.0;
    lut.valid[0] = 1;
    const Image out = remap(src, lut, Interpolation::bilinear);
    CHECK(out.at(0, 0) == 128);  // 127.5 rounds away from zero
}

TEST_CASE("remap rejects an image that does not cover the LUT sources") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 0.3, view_intrinsics());
    const auto lut = build_lut(view, omni);
    const Image wrong = Image::constant(300, 300, 1, 0);
    CHECK_THROWS_AS(remap(wrong, lut), std::invalid_argument);
}

TEST_CASE("parallel remap matches the serial reference bit-exactly") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(2.0, 0.6, view_intrinsics());
    const auto lut = build_lut(view, omni);
    Image src = Image::constant(omni.width, omni.height, 3, 0);
    std::mt19937 rng(31);
    for (auto& b : src.data) b = static_cast<std::uint8_t>(rng());
    for (auto interp : {Interpolation::bilinear, Interpolation::nearest}) {
        const Image a = remap(src, lut, interp);
        const Image b = reference::remap(src, lut, interp);
        REQUIRE(a.data == b.data);
    }
}

TEST_CASE("remap twice yields bit-identical output") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(-0.4, 0.3, view_intrinsics());
    const auto lut = build_lut(view, omni);
    Image src = Image::constant(omni.width, omni.height, 1, 0);
    std::mt19937 rng(37);
    for (auto& b : src.data) b = static_cast<std::uint8_t>(rng());
    const Image a = remap(src, lut);
    const Image b = remap(src, lut);
    CHECK(a.data == b.data);
}

TEST_CASE("adjacent azimuth views share at least 70% of their valid pixels") {
    const auto omni = omni_camera();
    const auto a = build_lut(make_virtual_view(0.4, 0.6, view_intrinsics()), omni);
    const auto b = build_lut(make_virtual_view(0.6, 0.6, view_intrinsics()), omni);
    // a bilinear remap reads the four neighbours of every valid source sample
    auto referenced = [&](const LookupTable& lut) {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(omni.width) * omni.height, 0);
        for (std::size_t i = 0; i < lut.valid.size(); ++i) {
            if (!lut.valid[i]) continue;
            const int x0 = static_cast<int>(std::floor(lut.src_x[i]));
            const int y0 = static_cast<int>(std::floor(lut.src_y[i]));
            for (int dy = 0; dy <= 1; ++dy) {
                for (int dx = 0; dx <= 1; ++dx) {
                    const int x = std::min(x0 + dx, omni.width - 1);
                    const int y = std::min(y0 + dy, omni.height - 1);
                    mask[static_cast<std::size_t>(y) * omni.width + x] = 1;
                }
            }
        }
        return mask;
    };
    const auto ma = referenced(a);
    const auto mb = referenced(b);
    std::size_t na = 0, nb = 0, shared = 0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
        na += ma[i];
        nb += mb[i];
        shared += (ma[i] & mb[i]);
    }
    REQUIRE(na > 0);
    REQUIRE(nb > 0);
    CHECK(static_cast<double>(shared) / na >= 0.7);
    CHECK(static_cast<double>(shared) / nb >= 0.7);
}

TEST_CASE("LUT export/import round-trip") {
    const auto omni = omni_camera();
    auto lut = build_lut(make_virtual_view(0.2, 0.9, view_intrinsics()), omni);
    // quantize through the file format once; a second pass must be identity
    lut = import_lut(export_lut(lut));
    const auto bytes = export_lut(lut);
    const auto back = import_lut(bytes);
    CHECK(back.width == lut.width);
    CHECK(back.height == lut.height);
    CHECK(back.valid == lut.valid);
    CHECK(back.src_x == lut.src_x);
    CHECK(back.src_y == lut.src_y);
    CHECK(export_lut(back) == bytes);
}

TEST_CASE("1x1 LUT serializes to 23 bytes") {
    const auto lut = LookupTable::invalid_filled(1, 1);
    CHECK(export_lut(lut).size() == 23);
}

TEST_CASE("LUT import rejects corrupted payloads") {
    auto bytes = export_lut(LookupTable::invalid_filled(2, 2));
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(import_lut(bad_magic), doctest::Contains("magic"), ParseError);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_WITH_AS(import_lut(truncated), doctest::Contains("truncated"), ParseError);

    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(import_lut(bad_version), ParseError);
}
