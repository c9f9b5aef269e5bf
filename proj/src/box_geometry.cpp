#include "omnidet/box_geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "omnidet/config.hpp"

namespace omnidet {

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
    throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double token_double(std::string_view token, const std::string& source, int line, const char* what) {
    const auto v = parse_double(token);
    if (!v || !std::isfinite(*v)) {
        fail(source, line, std::string("bad ") + what + " '" + std::string(token) + "'");
    }
    return *v;
}

BoundingBox box_from_tokens(const std::vector<std::string_view>& tokens, std::size_t offset,
                            const std::string& source, int line) {
    BoundingBox box;
    box.x_min = token_double(tokens[offset + 0], source, line, "x_min");
    box.y_min = token_double(tokens[offset + 1], source, line, "y_min");
    box.x_max = token_double(tokens[offset + 2], source, line, "x_max");
    box.y_max = token_double(tokens[offset + 3], source, line, "y_max");
    if (!box.valid()) fail(source, line, "box must satisfy x_min <= x_max and y_min <= y_max");
    return box;
}

template <typename Fn>
void for_each_data_line(std::istream& in, Fn&& fn) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        const auto tokens = split_tokens(view);
        if (tokens.empty()) continue;
        fn(tokens, line_no);
    }
}

void append_box(std::string& out, const BoundingBox& box) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.3f %.3f %.3f %.3f", box.x_min, box.y_min, box.x_max,
                  box.y_max);
    out += buf;
}

}  // namespace

bool BoundingBox::valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height) {
    BoundingBox out;
    out.x_min = std::max(box.x_min, 0.0);
    out.y_min = std::max(box.y_min, 0.0);
    out.x_max = std::min(box.x_max, width);
    out.y_max = std::min(box.y_max, height);
    if (out.x_min > out.x_max || out.y_min > out.y_max) return std::nullopt;
    return out;
}

BackprojectResult backproject_box(const BoundingBox& box, const VirtualView& view,
                                  const FisheyeCamera& omni, BackprojectMode mode,
                                  int edge_samples) {
    if (!box.valid()) throw std::invalid_argument("backproject_box: invalid box");
    if (box.x_min < 0.0 || box.y_min < 0.0 || box.x_max > view.width || box.y_max > view.height) {
        throw std::invalid_argument("backproject_box: box outside the view");
    }

    std::vector<Point2> samples;
    const Point2 corners[4] = {{box.x_min, box.y_min},
                               {box.x_max, box.y_min},
                               {box.x_max, box.y_max},
                               {box.x_min, box.y_max}};
    if (mode == BackprojectMode::corners) {
        samples.assign(corners, corners + 4);
    } else {
        if (edge_samples < 1) throw std::invalid_argument("backproject_box: edge_samples must be >= 1");
        samples.reserve(static_cast<std::size_t>(edge_samples) * 4);
        for (int edge = 0; edge < 4; ++edge) {
            const Point2& a = corners[edge];
            const Point2& b = corners[(edge + 1) % 4];
            for (int k = 0; k < edge_samples; ++k) {
                const double t = static_cast<double>(k) / edge_samples;
                samples.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
            }
        }
    }

    BackprojectResult result;
    BoundingBox out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto mapped = map_point_to_omni(samples[i], view, omni);
        if (!mapped) {
            result.failed_point = static_cast<int>(i);
            return result;
        }
        out.x_min = std::min(out.x_min, mapped->x);
        out.y_min = std::min(out.y_min, mapped->y);
        out.x_max = std::max(out.x_max, mapped->x);
        out.y_max = std::max(out.y_max, mapped->y);
    }
    result.box = out;
    return result;
}

std::vector<ParsedDetection> parse_detections(std::istream& in, const std::string& source_name) {
    std::vector<ParsedDetection> out;
    for_each_data_line(in, [&](const std::vector<std::string_view>& tokens, int line_no) {
        if (tokens.size() != 7) {
            fail(source_name, line_no,
                 "expected 7 fields (view_id class score x_min y_min x_max y_max), got " +
                     std::to_string(tokens.size()));
        }
        ParsedDetection parsed;
        parsed.line = line_no;
        parsed.detection.view_id = std::string(tokens[0]);
        parsed.detection.class_label = std::string(tokens[1]);
        parsed.detection.score = token_double(tokens[2], source_name, line_no, "score");
        if (parsed.detection.score < 0.0 || parsed.detection.score > 1.0) {
            fail(source_name, line_no, "score must lie in [0,1]");
        }
        parsed.detection.box = box_from_tokens(tokens, 3, source_name, line_no);
        out.push_back(std::move(parsed));
    });
    return out;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open detection file: " + path.string());
    std::vector<Detection> out;
    for (auto& parsed : parse_detections(in, path.string())) out.push_back(std::move(parsed.detection));
    return out;
}

void write_detections(const std::vector<Detection>& detections, std::ostream& out) {
    std::string buffer;
    for (const auto& det : detections) {
        buffer.clear();
        buffer += det.view_id;
        buffer += ' ';
        buffer += det.class_label;
        char score[48];
        std::snprintf(score, sizeof(score), " %.9g ", det.score);
        buffer += score;
        append_box(buffer, det.box);
        buffer += '\n';
        out << buffer;
    }
}

void write_detections(const std::vector<Detection>& detections, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: keep '\n' endings everywhere
    if (!out) throw ConfigError("cannot write detection file: " + path.string());
    write_detections(detections, out);
}

std::vector<GroundTruthBox> parse_ground_truth(std::istream& in, const std::string& source_name) {
    std::vector<GroundTruthBox> out;
    for_each_data_line(in, [&](const std::vector<std::string_view>& tokens, int line_no) {
        if (tokens.size() != 6) {
            fail(source_name, line_no,
                 "expected 6 fields (view_id class x_min y_min x_max y_max), got " +
                     std::to_string(tokens.size()));
        }
        GroundTruthBox gt;
        gt.view_id = std::string(tokens[0]);
        gt.class_label = std::string(tokens[1]);
        gt.box = box_from_tokens(tokens, 2, source_name, line_no);
        out.push_back(std::move(gt));
    });
    return out;
}

std::vector<GroundTruthBox> read_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ground-truth file: " + path.string());
    return parse_ground_truth(in, path.string());
}

void write_ground_truth(const std::vector<GroundTruthBox>& boxes, std::ostream& out) {
    std::string buffer;
    for (const auto& gt : boxes) {
        buffer.clear();
        buffer += gt.view_id;
        buffer += ' ';
        buffer += gt.class_label;
        buffer += ' ';
        append_box(buffer, gt.box);
        buffer += '\n';
        out << buffer;
    }
}

void write_ground_truth(const std::vector<GroundTruthBox>& boxes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write ground-truth file: " + path.string());
    write_ground_truth(boxes, out);
}

}  // namespace omnidet
