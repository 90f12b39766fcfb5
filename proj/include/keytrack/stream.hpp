#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "keytrack/geometry.hpp"

namespace keytrack {

// Fixed-length appearance embedding. Unit L2 norm after ingestion.
struct ReidFeature {
    std::vector<double> values;
};

// One person observation in one frame.
struct Detection {
    Box box;
    Pose pose;
    ReidFeature reid;
    double score = 0.0;
};

// Per-record arity contract. 0 means infer from the first record seen and
// enforce from then on.
struct StreamSpec {
    int n_keypoints = 15;
    int reid_dim = 128;
};

// One input frame of the stream protocol.
struct FrameObservations {
    std::string seq;
    std::int64_t frame = 0;
    std::vector<Detection> detections;
};

struct TrackedEntry {
    std::int64_t id = 0;
    Detection det;
    // Only meaningful in simulator ground-truth streams; absent records
    // read back as false.
    bool occluded = false;
};

// One output frame: every surviving detection with its track id.
struct TrackedFrame {
    std::string seq;
    std::int64_t frame = 0;
    std::vector<TrackedEntry> entries;
};

} // namespace keytrack
