#include <random>
#include <sstream>

#include "doctest.h"
#include "omnidet/box_geometry.hpp"

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

BoundingBox random_box(std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
    return {std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
}

}  // namespace

TEST_CASE("iou identities") {
    const BoundingBox a{0, 0, 10, 10};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, {20, 20, 30, 30}) == 0.0);
    CHECK(iou(a, {10, 0, 20, 10}) == 0.0);  // touching edges share no area
}

TEST_CASE("iou hand value 1/7") {
    const double v = iou({0, 0, 10, 10}, {5, 5, 15, 15});
    CHECK(v == doctest::Approx(0.14285714285714285).epsilon(1e-15));
}

TEST_CASE("iou of degenerate boxes is zero") {
    const BoundingBox line{5, 5, 5, 9};
    CHECK(iou(line, line) == 0.0);
    CHECK(iou(line, {0, 0, 10, 10}) == 0.0);
}

TEST_CASE("iou is symmetric and scale/translation invariant") {
    std::mt19937 rng(41);
    for (int i = 0; i < 500; ++i) {
        const BoundingBox a = random_box(rng, -50, 50);
        const BoundingBox b = random_box(rng, -50, 50);
        if (a.area() > 0.0) CHECK(iou(a, a) == 1.0);
        const double ab = iou(a, b);
        CHECK(ab == iou(b, a));

        std::uniform_real_distribution<double> us(0.2, 4.0);
        std::uniform_real_distribution<double> ut(-30.0, 30.0);
        const double s = us(rng), tx = ut(rng), ty = ut(rng);
        auto transform = [&](const BoundingBox& box) {
            return BoundingBox{s * box.x_min + tx, s * box.y_min + ty, s * box.x_max + tx,
                               s * box.y_max + ty};
        };
        CHECK(std::abs(iou(transform(a), transform(b)) - ab) < 1e-12);
    }
}

TEST_CASE("clip_box basics") {
    const BoundingBox inside{10, 10, 50, 60};
    const auto kept = clip_box(inside, 600, 600);
    REQUIRE(kept.has_value());
    CHECK(kept->x_min == 10.0);
    CHECK(kept->y_max == 60.0);

    CHECK_FALSE(clip_box({700, 700, 800, 800}, 600, 600).has_value());

    const auto partial = clip_box({-10, -10, 20, 20}, 600, 600);
    REQUIRE(partial.has_value());
    CHECK(partial->x_min == 0.0);
    CHECK(partial->y_min == 0.0);
    CHECK(partial->x_max == 20.0);
    CHECK(partial->y_max == 20.0);
}

TEST_CASE("backproject of a centered box in the aligned view contains the principal point") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 0.0, view_intrinsics());
    const auto result = backproject_box({90, 90, 110, 110}, view, omni);
    REQUIRE(result);
    CHECK(result.box->x_min < omni.cx);
    CHECK(result.box->x_max > omni.cx);
    CHECK(result.box->y_min < omni.cy);
    CHECK(result.box->y_max > omni.cy);
}

TEST_CASE("backproject encloses every mapped sample") {
    const auto omni = omni_camera();
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> uaz(-3.14, 3.14);
    std::uniform_real_distribution<double> uel(0.0, 0.9);
    for (int i = 0; i < 200; ++i) {
        const auto view = make_virtual_view(uaz(rng), uel(rng), view_intrinsics());
        const BoundingBox box = random_box(rng, 10.0, 190.0);
        for (auto mode : {BackprojectMode::corners, BackprojectMode::edge_sampled}) {
            const auto result = backproject_box(box, view, omni, mode, 8);
            if (!result) continue;
            const Point2 pts[4] = {{box.x_min, box.y_min},
                                   {box.x_max, box.y_min},
                                   {box.x_max, box.y_max},
                                   {box.x_min, box.y_max}};
            for (const auto& p : pts) {
                const auto mapped = map_point_to_omni(p, view, omni);
                REQUIRE(mapped.has_value());
                CHECK(mapped->x >= result.box->x_min - 1e-9);
                CHECK(mapped->x <= result.box->x_max + 1e-9);
                CHECK(mapped->y >= result.box->y_min - 1e-9);
                CHECK(mapped->y <= result.box->y_max + 1e-9);
            }
        }
    }
}

// The edge-sampled enclosure maps a superset of the corner points, so it can
// only grow: corners-mode area <= edge-sampled area.
TEST_CASE("edge-sampled enclosure is never smaller than the corner enclosure") {
    const auto omni = omni_camera();
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> uaz(-3.14, 3.14);
    std::uniform_real_distribution<double> uel(0.0, 0.9);
    int compared = 0;
    for (int i = 0; i < 300; ++i) {
        const auto view = make_virtual_view(uaz(rng), uel(rng), view_intrinsics());
        const BoundingBox box = random_box(rng, 5.0, 195.0);
        const auto corners = backproject_box(box, view, omni, BackprojectMode::corners);
        const auto sampled = backproject_box(box, view, omni, BackprojectMode::edge_sampled, 8);
        if (!corners || !sampled) continue;
        ++compared;
        CHECK(corners.box->area() <= sampled.box->area() + 1e-9);
        CHECK(corners.box->x_min >= sampled.box->x_min - 1e-9);
        CHECK(corners.box->x_max <= sampled.box->x_max + 1e-9);
    }
    CHECK(compared > 100);
}

TEST_CASE("backproject reports the corner that left the field of view") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 1.5, view_intrinsics());
    // bottom corners of this view tilt past theta_max
    const auto result = backproject_box({0, 0, 200, 200}, view, omni);
    CHECK_FALSE(result);
    CHECK(result.failed_point >= 0);
}

TEST_CASE("backproject rejects boxes outside the view") {
    const auto omni = omni_camera();
    const auto view = make_virtual_view(0.0, 0.0, view_intrinsics());
    CHECK_THROWS_AS(backproject_box({-5, 0, 10, 10}, view, omni), std::invalid_argument);
    CHECK_THROWS_AS(backproject_box({0, 0, 10, 210}, view, omni), std::invalid_argument);
}

TEST_CASE("detection files parse and round-trip") {
    std::istringstream in(
        "# pooled detections\n"
        "e0.00_a+0.20 person 0.8 10 20 30.5 40\n"
        "omni person 0.25 1.25 2.5 3.75 5 # trailing comment\n"
        "\n");
    const auto parsed = parse_detections(in, "det.txt");
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].line == 2);
    CHECK(parsed[0].detection.view_id == "e0.00_a+0.20");
    CHECK(parsed[0].detection.score == 0.8);
    CHECK(parsed[1].detection.box.x_max == 3.75);

    std::ostringstream out;
    std::vector<Detection> dets;
    for (const auto& p : parsed) dets.push_back(p.detection);
    write_detections(dets, out);
    std::istringstream again(out.str());
    const auto reparsed = parse_detections(again, "det.txt");
    REQUIRE(reparsed.size() == 2);
    CHECK(reparsed[0].detection.score == 0.8);
    CHECK(reparsed[1].detection.box.y_max == 5.0);
}

TEST_CASE("detection parse errors name the line") {
    std::istringstream missing("omni person 0.5 1 2 3\n");
    CHECK_THROWS_WITH_AS(parse_detections(missing, "d.txt"), doctest::Contains("d.txt:1"),
                         ParseError);

    std::istringstream bad_score("omni person 1.5 1 2 3 4\n");
    CHECK_THROWS_WITH_AS(parse_detections(bad_score, "d.txt"), doctest::Contains("score"),
                         ParseError);

    std::istringstream inverted("ok person 0.5 1 2 3 4\nomni person 0.5 9 9 1 9\n");
    CHECK_THROWS_WITH_AS(parse_detections(inverted, "d.txt"), doctest::Contains("d.txt:2"),
                         ParseError);
}

TEST_CASE("ground-truth files parse without a score column") {
    std::istringstream in("omni person 10 20 30 40\nomni chair 1 2 3 4\n");
    const auto gt = parse_ground_truth(in, "gt.txt");
    REQUIRE(gt.size() == 2);
    CHECK(gt[0].class_label == "person");
    CHECK(gt[1].box.x_max == 3.0);

    std::istringstream with_score("omni person 0.9 10 20 30 40\n");
    CHECK_THROWS_AS(parse_ground_truth(with_score, "gt.txt"), ParseError);
}
