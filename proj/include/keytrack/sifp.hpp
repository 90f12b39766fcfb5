#pragma once

#include <vector>

#include "keytrack/geometry.hpp"

namespace keytrack {

struct SifpConfig {
    // Image pyramid scaling factors.
    std::vector<double> omegas = {2.0, 1.5, 1.0, 0.75};
    // Valid object scale range after rescaling, inclusive at both ends.
    double s_lower = 16.0;
    double s_upper = 560.0;
    // Anchor areas of the five feature-map levels, ascending.
    std::vector<double> fpn_areas = {32.0 * 32.0, 64.0 * 64.0, 128.0 * 128.0,
                                     256.0 * 256.0, 512.0 * 512.0};
};

// One training chip at one pyramid factor. The rectangle lives in
// scaled-image coordinates and always has exactly the original image size:
// a crop when omega > 1, a padded canvas when omega <= 1.
struct SifpChip {
    Box rect;
    std::vector<int> included; // in scale range and fully inside
    std::vector<int> excluded; // intersecting the chip but not included
};

struct SifpLevelPlan {
    double omega = 1.0;
    std::vector<SifpChip> chips;
    // Per object: feature-map level 1..5 for objects valid at this omega,
    // 0 otherwise.
    std::vector<int> fpn_level;
};

struct SifpPlan {
    double image_w = 0.0;
    double image_h = 0.0;
    std::vector<SifpLevelPlan> levels;
};

// True iff s_lower <= omega * object_scale(b) <= s_upper.
bool rescaled_valid(const Box& b, double omega, const SifpConfig& cfg);

// Level in 1..5 whose anchor side length is nearest to s in log2 space;
// ties break to the lower level. Non-decreasing in s.
int assign_fpn_level(double s, const SifpConfig& cfg);

// Plans chips and level assignments for one image. Every object in scale
// range at a pyramid factor lands fully inside at least one chip of that
// factor. Coordinates and memberships only; no pixels are touched.
// Throws PlanError when a valid object cannot fit a chip at its factor.
SifpPlan plan(double image_w, double image_h, const std::vector<Box>& objects,
              const SifpConfig& cfg);

} // namespace keytrack
