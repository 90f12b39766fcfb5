#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "keytrack/geometry.hpp"
#include "keytrack/stream.hpp"

namespace keytrack {

enum class ScenarioLayout {
    // Spawn anywhere, random headings.
    random,
    // Spawn near the arena edge, heading through the central region, so
    // that trajectories intersect and occlusions are frequent.
    crossing,
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    int n_persons = 6;
    int n_frames = 300;
    double arena_w = 1000.0;
    double arena_h = 600.0;
    double speed_min = 2.0;
    double speed_max = 8.0;
    // Nominal person box size; per-person sizes vary +-15% around it.
    double person_w = 60.0;
    double person_h = 140.0;
    // A person is occluded when its IoU with any nearer person (lower id =
    // nearer to camera) exceeds this.
    double occlusion_iou_threshold = 0.3;
    double reid_noise_sigma = 0.05;
    // Keypoint confidences of occluded persons never exceed this.
    double occluded_confidence_ceiling = 0.15;
    // Occluded features are pulled toward the occluder's identity vector:
    // f = (1-blend)*own + blend*occluder, then noise, then renormalized.
    double occluded_feature_blend = 0.7;
    // Per-frame probability of one spurious detection.
    double detector_fp_rate = 0.0;
    // Per-person per-frame probability of a dropped detection.
    double detector_fn_rate = 0.0;
    // Detection-only measurement noise, pixels.
    double box_jitter = 1.0;
    double keypoint_jitter = 1.0;
    ScenarioLayout layout = ScenarioLayout::crossing;
    int n_keypoints = 15;
    int reid_dim = 128;
    std::string seq = "sim";
};

struct GroundTruthEntry {
    std::int64_t id = 0;
    Box box;
    Pose pose; // confidences reflect visibility; capped while occluded
    ReidFeature reid;
    bool occluded = false;
};

struct GroundTruthFrame {
    std::string seq;
    std::int64_t frame = 0;
    std::vector<GroundTruthEntry> persons;
};

struct Scenario {
    std::vector<FrameObservations> detections;
    std::vector<GroundTruthFrame> truth;
};

// Deterministic function of the config: constant-velocity trajectories with
// boundary reflection, fixed per-identity unit Re-ID vectors, occlusion by
// depth order, and detector noise at the configured rates. Both streams
// share frame indices.
Scenario generate(const ScenarioConfig& cfg);

// Ground truth as a tracked stream (track id = true identity).
TrackedFrame to_tracked(const GroundTruthFrame& frame);

// Box-relative keypoint template used for all simulated persons. The
// 15-point layout is humanoid with the head segment at indices 14 (top)
// and 12 (bottom); other arities fall back to a deterministic grid.
std::vector<std::pair<double, double>> keypoint_template(int n_keypoints);

} // namespace keytrack
