#pragma once

#include "keytrack/geometry.hpp"

namespace keytrack {

struct OcclusionConfig {
    // Per-keypoint confidence threshold; a keypoint counts as visible only
    // when its confidence is strictly above this.
    double gamma_valid = 0.2;
    // Visible-count threshold; the Re-ID feature is trusted only when the
    // visible count is strictly above this. Boundary cases are invalid.
    int theta_valid = 10;
};

// Number of keypoints with confidence strictly above gamma_valid.
// Non-finite confidences count as invisible.
int count_valid_keypoints(const Pose& p, const OcclusionConfig& cfg);

// True when the target is visible enough for its appearance feature to be
// trusted: count_valid_keypoints(p) > theta_valid.
bool reid_is_valid(const Pose& p, const OcclusionConfig& cfg);

} // namespace keytrack
