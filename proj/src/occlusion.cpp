#include "keytrack/occlusion.hpp"

#include <cmath>

namespace keytrack {

int count_valid_keypoints(const Pose& p, const OcclusionConfig& cfg) {
    int n = 0;
    for (const Keypoint& k : p.keypoints) {
        if (std::isfinite(k.c) && k.c > cfg.gamma_valid) ++n;
    }
    return n;
}

bool reid_is_valid(const Pose& p, const OcclusionConfig& cfg) {
    return count_valid_keypoints(p, cfg) > cfg.theta_valid;
}

} // namespace keytrack
