#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "omnidet/geometry.hpp"
#include "omnidet/view_synthesis.hpp"

namespace omnidet {

/// Axis-aligned box in continuous pixel coordinates;
/// area = (x_max-x_min)*(y_max-y_min), no +1 correction.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool valid() const;
};

/// Intersection over union; 0 for disjoint boxes and when both are degenerate.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Intersection with [0,width] x [0,height]; nullopt when nothing remains.
std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height);

struct Detection {
    BoundingBox box;
    double score = 0.0;  // in [0,1]
    std::string class_label;
    std::string view_id;  // originating view, or "omni"
};

struct GroundTruthBox {
    BoundingBox box;
    std::string class_label;
    std::string view_id = "omni";
};

enum class BackprojectMode { corners, edge_sampled };

/// Result of mapping a view-frame box into the omnidirectional frame.
/// When a sample leaves the fisheye FOV, box is empty and failed_point
/// holds the index of the first such sample (corners order: top-left,
/// top-right, bottom-right, bottom-left).
struct BackprojectResult {
    std::optional<BoundingBox> box;
    int failed_point = -1;

    explicit operator bool() const { return box.has_value(); }
};

/// Maps the box into the omnidirectional frame and returns the axis-aligned
/// enclosure of the mapped samples. corners mode maps the 4 corners;
/// edge_sampled maps edge_samples points per edge (corners included).
BackprojectResult backproject_box(const BoundingBox& box, const VirtualView& view,
                                  const FisheyeCamera& omni,
                                  BackprojectMode mode = BackprojectMode::corners,
                                  int edge_samples = 8);

/// Detection file: `view_id class score x_min y_min x_max y_max`,
/// whitespace-separated, '#' comments. Ground truth drops the score column.
struct ParsedDetection {
    Detection detection;
    int line = 0;
};

std::vector<ParsedDetection> parse_detections(std::istream& in, const std::string& source_name);
std::vector<Detection> read_detections(const std::filesystem::path& path);
void write_detections(const std::vector<Detection>& detections, std::ostream& out);
void write_detections(const std::vector<Detection>& detections, const std::filesystem::path& path);

std::vector<GroundTruthBox> parse_ground_truth(std::istream& in, const std::string& source_name);
std::vector<GroundTruthBox> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::vector<GroundTruthBox>& boxes, std::ostream& out);
void write_ground_truth(const std::vector<GroundTruthBox>& boxes, const std::filesystem::path& path);

}  // namespace omnidet
