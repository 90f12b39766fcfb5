#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "keytrack/geometry.hpp"
#include "keytrack/stream.hpp"

namespace keytrack {

struct MetricsConfig {
    // Maximum pose distance for a ground-truth/hypothesis match.
    double match_threshold = 0.5;
    // A joint counts as correct within this fraction of the head segment.
    double pckh_ratio = 0.5;
    // Schema indices of the head segment endpoints; either set to -1 to
    // force the box fallback (schemas without head joints).
    int head_top = 14;
    int head_bottom = 12;
    // Fallback reference length: ratio * sqrt(gt box area).
    double box_len_ratio = 0.2;
};

// One evaluated instance: a ground-truth person or a hypothesis.
struct Instance {
    std::int64_t id = 0;
    Box box;
    Pose pose;
    double score = 1.0;
};

// Pose distance in [0,1]: 1 - fraction of visible ground-truth joints the
// hypothesis places within pckh_ratio * head segment length. Falls back to
// 1 - IoU of the boxes when the ground truth has no visible joints.
double pose_distance(const Instance& gt, const Instance& hyp, const MetricsConfig& cfg);

struct MotReport {
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t ids = 0;
    std::int64_t gt_count = 0;
    std::int64_t matches = 0;
    double match_distance_sum = 0.0;

    // Derived by finalize().
    double mota = 0.0;
    bool mota_defined = false; // false when gt_count == 0
    double motp = 0.0;         // 1 - mean matched distance
    bool motp_defined = false; // false when matches == 0
    double precision = 0.0;
    double recall = 0.0;

    std::vector<double> per_joint_ap;
    double mean_ap = 0.0;

    void finalize();
};

// Adds the raw counts of b into a. Ratios must be re-finalized; per-joint
// AP is not additive and is left untouched.
void merge_counts(MotReport& a, const MotReport& b);

// CLEAR-MOT bookkeeping for one sequence. Matches persist between frames
// (kept first while still within threshold), remaining pairs are matched by
// minimum-distance assignment; an id switch is counted whenever the
// hypothesis id mapped to a ground-truth identity changes.
class MotAccumulator {
public:
    explicit MotAccumulator(MetricsConfig cfg = {}) : cfg_(cfg) {}

    // Throws EvalError on duplicate ids within either list.
    void observe_frame(const std::vector<Instance>& gt, const std::vector<Instance>& hyp);

    MotReport report() const;

private:
    MetricsConfig cfg_;
    MotReport counts_;
    // Last known hypothesis id per ground-truth id; persists across gaps.
    std::map<std::int64_t, std::int64_t> mapping_;
    // Pairs matched in the previous frame, eligible for persistence.
    std::map<std::int64_t, std::int64_t> active_;
};

// Per-frame instance lists for one sequence (or a concatenation of
// sequences; frames are self-contained for AP purposes).
struct EvalFrame {
    std::vector<Instance> gt;
    std::vector<Instance> hyp;
};

// Average precision for one joint index: hypothesis joints ranked by
// instance score, matched frame-by-frame against ground-truth joints within
// pckh_ratio * head length, all-points interpolated area under the
// precision/recall curve. Returns 0 when the ground truth has no visible
// joint of that index.
double pose_ap(const std::vector<EvalFrame>& frames, int joint, const MetricsConfig& cfg);

} // namespace keytrack
