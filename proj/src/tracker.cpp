#include "keytrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "keytrack/errors.hpp"

namespace keytrack {

double feature_distance(const ReidFeature& a, const ReidFeature& b) {
    if (a.values.size() != b.values.size()) {
        throw StreamError("reid: dimension mismatch (" + std::to_string(a.values.size()) +
                          " vs " + std::to_string(b.values.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double combined_similarity(double iou_value, double dist, const TrackerConfig& cfg) {
    const double normalized = std::min(dist, cfg.sigma_max) / cfg.sigma_max;
    return cfg.theta_pos * iou_value + (1.0 - cfg.theta_pos) * normalized;
}

double matching_cost(const Tracklet& t, const Detection& d, const TrackerConfig& cfg) {
    const double pos = 1.0 - iou(t.box, d.box);
    double app = pos;
    switch (cfg.mode) {
    case TrackerMode::iou_only:
        break;
    case TrackerMode::reid_always:
        app = std::min(feature_distance(d.reid, t.appearance), cfg.sigma_max) / cfg.sigma_max;
        break;
    case TrackerMode::occlusion_aware:
        if (reid_is_valid(d.pose, cfg.occlusion)) {
            app = std::min(feature_distance(d.reid, t.appearance), cfg.sigma_max) / cfg.sigma_max;
        }
        break;
    }
    return cfg.theta_pos * pos + (1.0 - cfg.theta_pos) * app;
}

namespace {

void blend_appearance(ReidFeature& appearance, const ReidFeature& incoming, double blend) {
    if (blend >= 1.0) {
        appearance = incoming; // bit-exact replacement
        return;
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < appearance.values.size(); ++i) {
        appearance.values[i] = (1.0 - blend) * appearance.values[i] + blend * incoming.values[i];
        norm_sq += appearance.values[i] * appearance.values[i];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0.0) {
        for (double& v : appearance.values) v /= norm;
    }
}

void validate_detection(const Detection& d, const StreamSpec& spec, std::size_t index) {
    const std::string where = "detection " + std::to_string(index) + ": ";
    if (spec.n_keypoints > 0 &&
        d.pose.keypoints.size() != static_cast<std::size_t>(spec.n_keypoints)) {
        throw StreamError(where + "keypoints: expected " + std::to_string(spec.n_keypoints) +
                          ", got " + std::to_string(d.pose.keypoints.size()));
    }
    if (spec.reid_dim > 0 && d.reid.values.size() != static_cast<std::size_t>(spec.reid_dim)) {
        throw StreamError(where + "reid: expected " + std::to_string(spec.reid_dim) +
                          " values, got " + std::to_string(d.reid.values.size()));
    }
    if (!d.box.valid()) throw StreamError(where + "box: invalid corners");
}

} // namespace

TrackedFrame Tracker::step(const FrameObservations& frame) {
    // Validate before touching any state so errors leave it unchanged.
    for (std::size_t i = 0; i < frame.detections.size(); ++i)
        validate_detection(frame.detections[i], cfg_.stream, i);

    std::vector<int> kept;
    kept.reserve(frame.detections.size());
    for (std::size_t i = 0; i < frame.detections.size(); ++i)
        if (frame.detections[i].score >= cfg_.min_score) kept.push_back(static_cast<int>(i));

    CostMatrix costs(static_cast<int>(tracks_.size()), static_cast<int>(kept.size()));
    for (int r = 0; r < costs.rows(); ++r)
        for (int c = 0; c < costs.cols(); ++c)
            costs.at(r, c) = matching_cost(tracks_[r], frame.detections[kept[c]], cfg_);

    const auto pairs = assign(costs, cfg_.cost_gate, cfg_.assignment);

    for (Tracklet& t : tracks_) ++t.age;

    std::vector<char> track_matched(tracks_.size(), 0);
    std::vector<std::int64_t> det_track_id(kept.size(), 0);

    for (const auto& [r, c] : pairs) {
        Tracklet& t = tracks_[r];
        const Detection& d = frame.detections[kept[c]];
        track_matched[r] = 1;
        det_track_id[c] = t.id;
        t.box = d.box;
        t.misses = 0;
        t.history.emplace_back(frame.frame, d);
        if (cfg_.history_limit > 0 && t.history.size() > cfg_.history_limit)
            t.history.erase(t.history.begin());
        const bool update = cfg_.mode == TrackerMode::occlusion_aware
                                ? reid_is_valid(d.pose, cfg_.occlusion)
                                : true;
        if (update) blend_appearance(t.appearance, d.reid, cfg_.appearance_blend);
    }

    for (std::size_t r = 0; r < tracks_.size(); ++r)
        if (!track_matched[r]) ++tracks_[r].misses;
    std::erase_if(tracks_, [this](const Tracklet& t) { return t.misses > cfg_.max_age; });

    for (std::size_t c = 0; c < kept.size(); ++c) {
        if (det_track_id[c] != 0) continue;
        const Detection& d = frame.detections[kept[c]];
        Tracklet t;
        t.id = next_id_++;
        t.box = d.box;
        t.appearance = d.reid; // initialized regardless of validity
        t.misses = 0;
        t.age = 1;
        t.history.emplace_back(frame.frame, d);
        det_track_id[c] = t.id;
        tracks_.push_back(std::move(t));
    }

    TrackedFrame out;
    out.seq = frame.seq;
    out.frame = frame.frame;
    out.entries.reserve(kept.size());
    for (std::size_t c = 0; c < kept.size(); ++c) {
        TrackedEntry e;
        e.id = det_track_id[c];
        e.det = frame.detections[kept[c]];
        out.entries.push_back(std::move(e));
    }
    return out;
}

} // namespace keytrack
