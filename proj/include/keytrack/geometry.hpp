#pragma once

#include <vector>

namespace keytrack {

// Axis-aligned box in corner form, pixel units. Degenerate (zero-area)
// boxes are legal inputs everywhere and contribute IoU 0; they are never
// silently dropped.
struct Box {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool valid() const;
};

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0; // confidence in [0,1]
};

// Ordered keypoint list. Arity is constant within a stream and enforced
// at ingestion, not here.
struct Pose {
    std::vector<Keypoint> keypoints;
};

// Intersection over union. Returns 0 when the union has zero area.
double iou(const Box& a, const Box& b);

// sqrt(w * h)
double object_scale(const Box& b);

} // namespace keytrack
