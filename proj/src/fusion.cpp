#include "omnidet/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "omnidet/errors.hpp"

namespace omnidet {

namespace {

struct Scored {
    int index;     // input position, the deterministic tie-breaker
    double score;
};

struct Rescored {
    double score;
    bool suppressed;
};

Rescored rescore(double score, double overlap, const FusionParams& params) {
    switch (params.variant) {
        case FusionVariant::nms:
            if (overlap >= params.overlap_threshold) return {0.0, true};
            return {score, false};
        case FusionVariant::soft_linear:
            if (overlap >= params.overlap_threshold) {
                const double factor = 1.0 - overlap;
                const double s = score * factor;
                return {s, factor == 0.0 || (s == 0.0 && score > 0.0)};
            }
            return {score, false};
        case FusionVariant::soft_gaussian: {
            const double s = score * std::exp(-(overlap * overlap) / params.sigma);
            return {s, s == 0.0 && score > 0.0};
        }
    }
    throw std::logic_error("unreachable fusion variant");
}

}  // namespace

std::string to_string(FusionVariant variant) {
    switch (variant) {
        case FusionVariant::nms: return "nms";
        case FusionVariant::soft_linear: return "soft_linear";
        case FusionVariant::soft_gaussian: return "soft_gaussian";
    }
    throw std::logic_error("unreachable fusion variant");
}

FusionVariant fusion_variant_from_string(std::string_view name) {
    if (name == "nms") return FusionVariant::nms;
    if (name == "soft_linear") return FusionVariant::soft_linear;
    if (name == "soft_gaussian") return FusionVariant::soft_gaussian;
    throw ConfigError("unknown fusion variant '" + std::string(name) + "'");
}

void FusionParams::validate() const {
    if (variant != FusionVariant::nms && variant != FusionVariant::soft_linear &&
        variant != FusionVariant::soft_gaussian) {
        throw std::invalid_argument("fusion: unknown variant");
    }
    if (!(overlap_threshold >= 0.0) || !(overlap_threshold <= 1.0)) {
        throw std::invalid_argument("fusion: overlap threshold must lie in [0,1]");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("fusion: sigma must be positive and finite");
    }
    if (!(confidence_threshold >= 0.0) || !(confidence_threshold <= 1.0)) {
        throw std::invalid_argument("fusion: confidence threshold must lie in [0,1]");
    }
}

std::vector<Detection> fuse(const std::vector<Detection>& detections, const FusionParams& params) {
    params.validate();
    for (const auto& det : detections) {
        if (!(det.score >= 0.0) || !(det.score <= 1.0)) {
            throw std::invalid_argument("fusion: detection scores must lie in [0,1]");
        }
        if (!det.box.valid()) throw std::invalid_argument("fusion: invalid detection box");
    }

    std::map<std::string, std::vector<Scored>> per_class;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
        per_class[detections[i].class_label].push_back({i, detections[i].score});
    }

    std::vector<Scored> kept;
    kept.reserve(detections.size());
    for (auto& [label, working] : per_class) {
        while (!working.empty()) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < working.size(); ++i) {
                if (working[i].score > working[best].score) best = i;
            }
            const Scored max_box = working[best];
            working.erase(working.begin() + static_cast<std::ptrdiff_t>(best));
            kept.push_back(max_box);

            std::vector<Scored> next;
            next.reserve(working.size());
            for (const Scored& candidate : working) {
                const double overlap =
                    iou(detections[max_box.index].box, detections[candidate.index].box);
                const Rescored r = rescore(candidate.score, overlap, params);
                if (r.suppressed) continue;
                next.push_back({candidate.index, r.score});
            }
            working = std::move(next);
        }
    }

    std::erase_if(kept, [&](const Scored& s) { return s.score < params.confidence_threshold; });
    std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.index < b.index;
    });

    std::vector<Detection> out;
    out.reserve(kept.size());
    for (const Scored& s : kept) {
        Detection det = detections[s.index];
        det.score = s.score;
        out.push_back(std::move(det));
    }
    return out;
}

}  // namespace omnidet
