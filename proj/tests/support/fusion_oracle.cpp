#include "fusion_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace omnidet::testing {

std::vector<Detection> fuse_bruteforce_oracle(const std::vector<Detection>& detections,
                                              const FusionParams& params) {
    params.validate();
    if (detections.size() > 20) {
        throw std::invalid_argument("fuse_bruteforce_oracle: more than 20 boxes");
    }
    for (const auto& det : detections) {
        if (!(det.score >= 0.0) || !(det.score <= 1.0)) {
            throw std::invalid_argument("fuse_bruteforce_oracle: score outside [0,1]");
        }
    }

    struct Item {
        int index;
        double score;
        bool alive;
    };
    std::vector<Item> items;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
        items.push_back({i, detections[i].score, true});
    }

    std::vector<Item> final_set;
    for (;;) {
        int best = -1;
        for (int i = 0; i < static_cast<int>(items.size()); ++i) {
            if (!items[i].alive) continue;
            if (best < 0 || items[i].score > items[best].score) best = i;
        }
        if (best < 0) break;
        items[best].alive = false;
        final_set.push_back(items[best]);

        const Detection& max_det = detections[items[best].index];
        for (auto& item : items) {
            if (!item.alive) continue;
            if (detections[item.index].class_label != max_det.class_label) continue;
            const double overlap = iou(max_det.box, detections[item.index].box);
            double updated = item.score;
            bool suppressed = false;
            if (params.variant == FusionVariant::nms) {
                if (overlap >= params.overlap_threshold) {
                    updated = 0.0;
                    suppressed = true;
                }
            } else if (params.variant == FusionVariant::soft_linear) {
                if (overlap >= params.overlap_threshold) {
                    const double factor = 1.0 - overlap;
                    updated = item.score * factor;
                    suppressed = factor == 0.0 || (updated == 0.0 && item.score > 0.0);
                }
            } else {
                updated = item.score * std::exp(-(overlap * overlap) / params.sigma);
                suppressed = updated == 0.0 && item.score > 0.0;
            }
            item.score = updated;
            item.alive = !suppressed;
        }
    }

    // confidence cutoff, then descending score with input order breaking ties
    std::vector<Item> kept;
    for (const auto& item : final_set) {
        if (item.score >= params.confidence_threshold) kept.push_back(item);
    }
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            const bool before = kept[j].score > kept[i].score ||
                                (kept[j].score == kept[i].score && kept[j].index < kept[i].index);
            if (before) std::swap(kept[i], kept[j]);
        }
    }

    std::vector<Detection> out;
    for (const auto& item : kept) {
        Detection det = detections[item.index];
        det.score = item.score;
        out.push_back(det);
    }
    return out;
}

}  // namespace omnidet::testing
