#pragma once

#include <string>
#include <vector>

#include "omnidet/box_geometry.hpp"

namespace omnidet {

enum class FusionVariant { nms, soft_linear, soft_gaussian };

std::string to_string(FusionVariant variant);
FusionVariant fusion_variant_from_string(std::string_view name);

struct FusionParams {
    FusionVariant variant = FusionVariant::nms;
    double overlap_threshold = 0.5;    // N_t, used by nms and soft_linear
    double sigma = 0.5;                // Gaussian decay, used by soft_gaussian
    double confidence_threshold = 0.0; // C_t, final keep cutoff

    void validate() const;  // throws std::invalid_argument
};

/// Greedy rescoring fusion. Repeatedly promotes the highest-scoring box
/// (ties: earliest input index) and rescores the rest against it:
///   nms:           s -> 0            when iou >= N_t
///   soft_linear:   s -> s*(1 - iou)  when iou >= N_t
///   soft_gaussian: s -> s*exp(-iou^2 / sigma)
/// Boxes suppressed to zero are dropped; after the loop, boxes with
/// score < C_t are discarded. Classes never suppress each other. Output is
/// sorted by descending score, ties by input order.
std::vector<Detection> fuse(const std::vector<Detection>& detections, const FusionParams& params);

}  // namespace omnidet
