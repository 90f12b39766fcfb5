#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "keytrack/assignment.hpp"
#include "keytrack/occlusion.hpp"
#include "keytrack/stream.hpp"

namespace keytrack {

enum class TrackerMode { iou_only, reid_always, occlusion_aware };

struct TrackerConfig {
    // Weight of the position (IoU) term in the matching cost.
    double theta_pos = 0.5;
    // Cap for the appearance distance. 2.0 is the diameter of the unit
    // sphere, so with unit-norm features the normalized distance spans
    // [0,1] exactly.
    double sigma_max = 2.0;
    TrackerMode mode = TrackerMode::occlusion_aware;
    // Pairs costing more than this are never matched.
    double cost_gate = 0.7;
    // A tracklet is dropped once its consecutive miss count exceeds this.
    int max_age = 10;
    // Detections below this score are ignored entirely.
    double min_score = 0.0;
    AssignStrategy assignment = AssignStrategy::hungarian;
    // Appearance update on a valid match: f <- normalize((1-b)*f + b*f_det).
    // 1.0 replaces the feature outright (and bit-exactly).
    double appearance_blend = 1.0;
    // History entries kept per tracklet; 0 keeps everything.
    std::size_t history_limit = 0;
    OcclusionConfig occlusion;
    StreamSpec stream;
};

// A live identity hypothesis.
struct Tracklet {
    std::int64_t id = 0;
    Box box;                // last matched box
    ReidFeature appearance; // unit norm, maintained under the update policy
    int misses = 0;         // consecutive unmatched frames
    std::int64_t age = 0;   // total frames alive
    std::vector<std::pair<std::int64_t, Detection>> history;
};

// Euclidean distance; throws StreamError on dimension mismatch.
double feature_distance(const ReidFeature& a, const ReidFeature& b);

// theta_pos * iou + (1 - theta_pos) * min(dist, sigma_max) / sigma_max.
// The two addends pull in opposite directions (IoU rewards overlap, the
// distance term penalizes appearance mismatch); it is exposed for audit
// only. Matching minimizes matching_cost below, which flips the IoU term.
double combined_similarity(double iou_value, double dist, const TrackerConfig& cfg);

// Cost in [0,1] given unit-norm features and sigma_max = 2:
//   theta_pos * (1 - iou) + (1 - theta_pos) * appearance term
// where the appearance term depends on the mode:
//   iou_only         always (1 - iou)
//   reid_always      normalized feature distance
//   occlusion_aware  normalized feature distance when the detection's
//                    Re-ID is valid, otherwise (1 - iou)
double matching_cost(const Tracklet& t, const Detection& d, const TrackerConfig& cfg);

// Occlusion-aware tracking-by-detection. One instance per sequence; step
// mutates state frame by frame. Distinct sequences can be tracked
// concurrently with independent instances.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {}

    // Runs one frame: cost matrix, assignment, lifecycle. State is
    // unchanged if the frame fails validation.
    TrackedFrame step(const FrameObservations& frame);

    const std::vector<Tracklet>& tracklets() const { return tracks_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    std::vector<Tracklet> tracks_;
    std::int64_t next_id_ = 1;
};

} // namespace keytrack
