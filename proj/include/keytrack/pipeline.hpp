#pragma once

#include <cstdint>
#include <vector>

#include "keytrack/metrics.hpp"
#include "keytrack/simulator.hpp"
#include "keytrack/stream.hpp"
#include "keytrack/tracker.hpp"

namespace keytrack {

// Runs one tracker per sequence id over the stream, preserving frame order.
// Track ids are scoped to their sequence.
std::vector<TrackedFrame> track_stream(const std::vector<FrameObservations>& frames,
                                       const TrackerConfig& cfg);

// CLEAR-MOT counts accumulated per sequence and merged, frames aligned by
// index (a frame missing on either side counts as empty), plus per-joint
// average precision over the whole stream pair.
MotReport evaluate_streams(const std::vector<TrackedFrame>& gt,
                           const std::vector<TrackedFrame>& hyp, const MetricsConfig& cfg);

struct AblationRow {
    TrackerMode mode = TrackerMode::iou_only;
    MotReport report;
};

// Tracks the same detection stream under all three modes and evaluates each
// result against the ground truth. Row order: iou_only, reid_always,
// occlusion_aware.
std::vector<AblationRow> run_ablation(const std::vector<FrameObservations>& detections,
                                      const std::vector<TrackedFrame>& gt,
                                      TrackerConfig base, const MetricsConfig& metrics);

struct BenchResult {
    int frames = 0;
    int detections_per_frame = 0;
    double p50_ms = 0.0;
    double p90_ms = 0.0;
    double p99_ms = 0.0;
    double mean_ms = 0.0;
    double fps = 0.0;
};

// Times Tracker::step over a synthetic crowded scenario; generation is not
// included in the measured time.
BenchResult run_bench(int detections_per_frame, int frames, int reid_dim,
                      TrackerConfig cfg, std::uint64_t seed);

} // namespace keytrack
