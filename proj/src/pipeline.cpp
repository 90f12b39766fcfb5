#include "keytrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace keytrack {

std::vector<TrackedFrame> track_stream(const std::vector<FrameObservations>& frames,
                                       const TrackerConfig& cfg) {
    std::map<std::string, Tracker> trackers;
    std::vector<TrackedFrame> out;
    out.reserve(frames.size());
    for (const FrameObservations& f : frames) {
        auto it = trackers.find(f.seq);
        if (it == trackers.end()) it = trackers.emplace(f.seq, Tracker(cfg)).first;
        out.push_back(it->second.step(f));
    }
    return out;
}

namespace {

std::vector<Instance> to_instances(const TrackedFrame& frame) {
    std::vector<Instance> out;
    out.reserve(frame.entries.size());
    for (const TrackedEntry& e : frame.entries)
        out.push_back(Instance{e.id, e.det.box, e.det.pose, e.det.score});
    return out;
}

} // namespace

MotReport evaluate_streams(const std::vector<TrackedFrame>& gt,
                           const std::vector<TrackedFrame>& hyp,
                           const MetricsConfig& cfg) {
    // seq -> frame -> instances
    std::map<std::string, std::map<std::int64_t, std::vector<Instance>>> gt_by, hyp_by;
    for (const TrackedFrame& f : gt) gt_by[f.seq][f.frame] = to_instances(f);
    for (const TrackedFrame& f : hyp) hyp_by[f.seq][f.frame] = to_instances(f);

    std::set<std::string> seqs;
    for (const auto& [s, _] : gt_by) seqs.insert(s);
    for (const auto& [s, _] : hyp_by) seqs.insert(s);

    MotReport total;
    std::vector<EvalFrame> ap_frames;
    std::size_t n_joints = 0;

    for (const std::string& seq : seqs) {
        const auto& gt_frames = gt_by[seq];
        const auto& hyp_frames = hyp_by[seq];
        std::set<std::int64_t> indices;
        for (const auto& [i, _] : gt_frames) indices.insert(i);
        for (const auto& [i, _] : hyp_frames) indices.insert(i);

        MotAccumulator acc(cfg);
        for (const std::int64_t i : indices) {
            static const std::vector<Instance> empty;
            const auto gi = gt_frames.find(i);
            const auto hi = hyp_frames.find(i);
            const auto& g = gi == gt_frames.end() ? empty : gi->second;
            const auto& h = hi == hyp_frames.end() ? empty : hi->second;
            acc.observe_frame(g, h);
            ap_frames.push_back(EvalFrame{g, h});
            for (const Instance& inst : g)
                n_joints = std::max(n_joints, inst.pose.keypoints.size());
        }
        merge_counts(total, acc.report());
    }

    total.per_joint_ap.resize(n_joints);
    for (std::size_t j = 0; j < n_joints; ++j)
        total.per_joint_ap[j] = pose_ap(ap_frames, static_cast<int>(j), cfg);
    total.finalize();
    return total;
}

std::vector<AblationRow> run_ablation(const std::vector<FrameObservations>& detections,
                                      const std::vector<TrackedFrame>& gt,
                                      TrackerConfig base, const MetricsConfig& metrics) {
    std::vector<AblationRow> rows;
    for (const TrackerMode mode :
         {TrackerMode::iou_only, TrackerMode::reid_always, TrackerMode::occlusion_aware}) {
        TrackerConfig cfg = base;
        cfg.mode = mode;
        AblationRow row;
        row.mode = mode;
        row.report = evaluate_streams(gt, track_stream(detections, cfg), metrics);
        rows.push_back(std::move(row));
    }
    return rows;
}

BenchResult run_bench(int detections_per_frame, int frames, int reid_dim,
                      TrackerConfig cfg, std::uint64_t seed) {
    ScenarioConfig scenario;
    scenario.seed = seed;
    scenario.n_persons = detections_per_frame;
    scenario.n_frames = frames;
    scenario.reid_dim = reid_dim;
    scenario.n_keypoints = cfg.stream.n_keypoints;
    scenario.layout = ScenarioLayout::random;
    // Crowded enough that occlusion handling stays on the hot path.
    scenario.arena_w = 80.0 * std::max(1.0, std::sqrt(double(detections_per_frame)));
    scenario.arena_h = 48.0 * std::max(1.0, std::sqrt(double(detections_per_frame)));
    const Scenario data = generate(scenario);

    cfg.stream.reid_dim = reid_dim;
    cfg.history_limit = cfg.history_limit == 0 ? 8 : cfg.history_limit;
    Tracker tracker(cfg);

    std::vector<double> ms;
    ms.reserve(data.detections.size());
    for (const FrameObservations& f : data.detections) {
        const auto t0 = std::chrono::steady_clock::now();
        (void)tracker.step(f);
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    BenchResult r;
    r.frames = static_cast<int>(ms.size());
    r.detections_per_frame = detections_per_frame;
    if (ms.empty()) return r;
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    auto pct = [&](double p) {
        const std::size_t idx = static_cast<std::size_t>(
            std::min<double>(sorted.size() - 1, std::ceil(p * sorted.size()) - 1));
        return sorted[idx];
    };
    r.p50_ms = pct(0.50);
    r.p90_ms = pct(0.90);
    r.p99_ms = pct(0.99);
    double sum = 0.0;
    for (const double v : ms) sum += v;
    r.mean_ms = sum / static_cast<double>(ms.size());
    r.fps = r.mean_ms > 0.0 ? 1000.0 / r.mean_ms : 0.0;
    return r;
}

} // namespace keytrack
