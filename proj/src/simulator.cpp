#include "keytrack/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "keytrack/errors.hpp"
#include "keytrack/rng.hpp"

namespace keytrack {

std::vector<std::pair<double, double>> keypoint_template(int n_keypoints) {
    if (n_keypoints == 15) {
        return {
            {0.35, 0.95}, // right ankle
            {0.37, 0.75}, // right knee
            {0.42, 0.52}, // right hip
            {0.58, 0.52}, // left hip
            {0.63, 0.75}, // left knee
            {0.65, 0.95}, // left ankle
            {0.15, 0.55}, // right wrist
            {0.22, 0.40}, // right elbow
            {0.32, 0.25}, // right shoulder
            {0.68, 0.25}, // left shoulder
            {0.78, 0.40}, // left elbow
            {0.85, 0.55}, // left wrist
            {0.50, 0.18}, // head bottom
            {0.50, 0.10}, // nose
            {0.50, 0.04}, // head top
        };
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n_keypoints);
    const int cols = 3;
    const int rows = (n_keypoints + cols - 1) / cols;
    for (int i = 0; i < n_keypoints; ++i) {
        const int r = i / cols;
        const int c = i % cols;
        pts.emplace_back(0.25 + 0.25 * c, 0.1 + 0.8 * (rows > 1 ? double(r) / (rows - 1) : 0.5));
    }
    return pts;
}

namespace {

struct Person {
    double cx, cy;   // box center
    double vx, vy;
    double w, h;
    ReidFeature identity;
};

ReidFeature random_unit_vector(Rng& rng, int dim) {
    ReidFeature f;
    f.values.resize(dim);
    double norm_sq = 0.0;
    for (double& v : f.values) {
        v = rng.gaussian();
        norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    for (double& v : f.values) v /= norm > 0.0 ? norm : 1.0;
    return f;
}

ReidFeature normalized(ReidFeature f) {
    double norm_sq = 0.0;
    for (const double v : f.values) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    if (norm > 0.0)
        for (double& v : f.values) v /= norm;
    return f;
}

Box person_box(const Person& p) {
    return {p.cx - p.w / 2, p.cy - p.h / 2, p.cx + p.w / 2, p.cy + p.h / 2};
}

// Reflect the center into [lo, hi], flipping velocity on each bounce.
void reflect(double& x, double& v, double lo, double hi) {
    if (hi <= lo) {
        x = lo;
        return;
    }
    while (x < lo || x > hi) {
        if (x < lo) {
            x = 2 * lo - x;
            v = -v;
        } else {
            x = 2 * hi - x;
            v = -v;
        }
    }
}

void validate(const ScenarioConfig& cfg) {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(cfg.detector_fp_rate) || !rate_ok(cfg.detector_fn_rate))
        throw ConfigError("scenario: detector rates must lie in [0,1]");
    if (!rate_ok(cfg.occluded_feature_blend))
        throw ConfigError("scenario: occluded_feature_blend must lie in [0,1]");
    if (!rate_ok(cfg.occluded_confidence_ceiling))
        throw ConfigError("scenario: occluded_confidence_ceiling must lie in [0,1]");
    if (cfg.n_persons < 0 || cfg.n_frames < 0)
        throw ConfigError("scenario: counts must be non-negative");
    if (cfg.speed_min < 0.0 || cfg.speed_max < cfg.speed_min)
        throw ConfigError("scenario: speed range invalid");
}

} // namespace

TrackedFrame to_tracked(const GroundTruthFrame& frame) {
    TrackedFrame out;
    out.seq = frame.seq;
    out.frame = frame.frame;
    out.entries.reserve(frame.persons.size());
    for (const GroundTruthEntry& p : frame.persons) {
        TrackedEntry e;
        e.id = p.id;
        e.det.box = p.box;
        e.det.pose = p.pose;
        e.det.reid = p.reid;
        e.det.score = 1.0;
        e.occluded = p.occluded;
        out.entries.push_back(std::move(e));
    }
    return out;
}

Scenario generate(const ScenarioConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    const auto tmpl = keypoint_template(cfg.n_keypoints);
    const double two_pi = 2.0 * 3.14159265358979323846;

    std::vector<Person> persons(cfg.n_persons);
    for (Person& p : persons) {
        p.w = cfg.person_w * rng.uniform(0.85, 1.15);
        p.h = cfg.person_h * rng.uniform(0.85, 1.15);
        const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        if (cfg.layout == ScenarioLayout::crossing) {
            // Start near the boundary, aim at a point in the central third.
            const double margin_x = p.w / 2;
            const double margin_y = p.h / 2;
            const int side = static_cast<int>(rng.uniform_index(4));
            switch (side) {
            case 0: p.cx = margin_x; p.cy = rng.uniform(margin_y, cfg.arena_h - margin_y); break;
            case 1: p.cx = cfg.arena_w - margin_x; p.cy = rng.uniform(margin_y, cfg.arena_h - margin_y); break;
            case 2: p.cy = margin_y; p.cx = rng.uniform(margin_x, cfg.arena_w - margin_x); break;
            default: p.cy = cfg.arena_h - margin_y; p.cx = rng.uniform(margin_x, cfg.arena_w - margin_x); break;
            }
            const double tx = rng.uniform(cfg.arena_w / 3, 2 * cfg.arena_w / 3);
            const double ty = rng.uniform(cfg.arena_h / 3, 2 * cfg.arena_h / 3);
            const double len = std::hypot(tx - p.cx, ty - p.cy);
            p.vx = speed * (tx - p.cx) / (len > 0.0 ? len : 1.0);
            p.vy = speed * (ty - p.cy) / (len > 0.0 ? len : 1.0);
        } else {
            p.cx = rng.uniform(p.w / 2, cfg.arena_w - p.w / 2);
            p.cy = rng.uniform(p.h / 2, cfg.arena_h - p.h / 2);
            const double heading = rng.uniform(0.0, two_pi);
            p.vx = speed * std::cos(heading);
            p.vy = speed * std::sin(heading);
        }
        p.identity = random_unit_vector(rng, cfg.reid_dim);
    }

    Scenario out;
    out.detections.reserve(cfg.n_frames);
    out.truth.reserve(cfg.n_frames);

    for (int f = 0; f < cfg.n_frames; ++f) {
        if (f > 0) {
            for (Person& p : persons) {
                p.cx += p.vx;
                p.cy += p.vy;
                reflect(p.cx, p.vx, p.w / 2, cfg.arena_w - p.w / 2);
                reflect(p.cy, p.vy, p.h / 2, cfg.arena_h - p.h / 2);
            }
        }

        std::vector<Box> boxes(persons.size());
        for (std::size_t i = 0; i < persons.size(); ++i) boxes[i] = person_box(persons[i]);

        // Depth order is the identity order: person i is occluded by any
        // overlapping person j < i; the strongest overlap is the occluder.
        std::vector<int> occluder(persons.size(), -1);
        for (std::size_t i = 1; i < persons.size(); ++i) {
            double best = cfg.occlusion_iou_threshold;
            for (std::size_t j = 0; j < i; ++j) {
                const double v = iou(boxes[i], boxes[j]);
                if (v > best) {
                    best = v;
                    occluder[i] = static_cast<int>(j);
                }
            }
        }

        GroundTruthFrame gt_frame;
        gt_frame.seq = cfg.seq;
        gt_frame.frame = f;
        FrameObservations det_frame;
        det_frame.seq = cfg.seq;
        det_frame.frame = f;

        for (std::size_t i = 0; i < persons.size(); ++i) {
            const Person& p = persons[i];
            const bool occluded = occluder[i] >= 0;

            GroundTruthEntry gt;
            gt.id = static_cast<std::int64_t>(i) + 1;
            gt.box = boxes[i];
            gt.occluded = occluded;
            gt.reid = p.identity;
            gt.pose.keypoints.reserve(tmpl.size());
            for (const auto& [u, v] : tmpl) {
                Keypoint k;
                k.x = boxes[i].x_min + u * p.w;
                k.y = boxes[i].y_min + v * p.h;
                k.c = rng.uniform(0.55, 1.0);
                if (occluded) k.c = std::min(k.c, cfg.occluded_confidence_ceiling);
                gt.pose.keypoints.push_back(k);
            }

            // Detection: measurement noise on top of the ground truth.
            const bool dropped = rng.uniform() < cfg.detector_fn_rate;
            Detection d;
            d.box = {gt.box.x_min + rng.uniform(-cfg.box_jitter, cfg.box_jitter),
                     gt.box.y_min + rng.uniform(-cfg.box_jitter, cfg.box_jitter),
                     gt.box.x_max + rng.uniform(-cfg.box_jitter, cfg.box_jitter),
                     gt.box.y_max + rng.uniform(-cfg.box_jitter, cfg.box_jitter)};
            if (d.box.x_max < d.box.x_min) std::swap(d.box.x_min, d.box.x_max);
            if (d.box.y_max < d.box.y_min) std::swap(d.box.y_min, d.box.y_max);
            d.pose.keypoints.reserve(tmpl.size());
            for (const Keypoint& gk : gt.pose.keypoints) {
                Keypoint k = gk;
                k.x += cfg.keypoint_jitter * rng.gaussian();
                k.y += cfg.keypoint_jitter * rng.gaussian();
                if (occluded) k.c = std::min(k.c, cfg.occluded_confidence_ceiling);
                d.pose.keypoints.push_back(k);
            }
            ReidFeature base = p.identity;
            if (occluded) {
                const ReidFeature& other = persons[occluder[i]].identity;
                for (std::size_t k = 0; k < base.values.size(); ++k)
                    base.values[k] = (1.0 - cfg.occluded_feature_blend) * base.values[k] +
                                     cfg.occluded_feature_blend * other.values[k];
            }
            for (double& v : base.values) v += cfg.reid_noise_sigma * rng.gaussian();
            d.reid = normalized(std::move(base));
            d.score = rng.uniform(0.6, 1.0);

            gt_frame.persons.push_back(std::move(gt));
            if (!dropped) det_frame.detections.push_back(std::move(d));
        }

        if (rng.uniform() < cfg.detector_fp_rate) {
            Detection fp;
            const double w = cfg.person_w * rng.uniform(0.5, 1.5);
            const double h = cfg.person_h * rng.uniform(0.5, 1.5);
            const double cx = rng.uniform(w / 2, std::max(w / 2, cfg.arena_w - w / 2));
            const double cy = rng.uniform(h / 2, std::max(h / 2, cfg.arena_h - h / 2));
            fp.box = {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
            fp.pose.keypoints.reserve(tmpl.size());
            for (const auto& [u, v] : tmpl) {
                Keypoint k;
                k.x = fp.box.x_min + u * w;
                k.y = fp.box.y_min + v * h;
                k.c = rng.uniform(0.0, 0.6);
                fp.pose.keypoints.push_back(k);
            }
            fp.reid = random_unit_vector(rng, cfg.reid_dim);
            fp.score = rng.uniform(0.3, 0.8);
            det_frame.detections.push_back(std::move(fp));
        }

        out.truth.push_back(std::move(gt_frame));
        out.detections.push_back(std::move(det_frame));
    }
    return out;
}

} // namespace keytrack
