#include "keytrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <tuple>

#include "keytrack/assignment.hpp"
#include "keytrack/errors.hpp"

namespace keytrack {

namespace {

bool joint_visible(const Pose& p, int idx) {
    return idx >= 0 && idx < static_cast<int>(p.keypoints.size()) &&
           std::isfinite(p.keypoints[idx].c) && p.keypoints[idx].c > 0.0;
}

// Reference length for the correctness radius: the head segment when both
// endpoints are visible, otherwise a fraction of the box diagonal scale.
double reference_length(const Instance& gt, const MetricsConfig& cfg) {
    if (joint_visible(gt.pose, cfg.head_top) && joint_visible(gt.pose, cfg.head_bottom)) {
        const Keypoint& a = gt.pose.keypoints[cfg.head_top];
        const Keypoint& b = gt.pose.keypoints[cfg.head_bottom];
        const double len = std::hypot(a.x - b.x, a.y - b.y);
        if (len > 0.0) return len;
    }
    return cfg.box_len_ratio * std::sqrt(std::max(0.0, gt.box.area()));
}

void check_unique_ids(const std::vector<Instance>& list, const char* side) {
    std::set<std::int64_t> seen;
    for (const Instance& inst : list) {
        if (!seen.insert(inst.id).second) {
            throw EvalError(std::string("eval: duplicate ") + side + " id " +
                            std::to_string(inst.id) + " within a frame");
        }
    }
}

} // namespace

double pose_distance(const Instance& gt, const Instance& hyp, const MetricsConfig& cfg) {
    const double radius = cfg.pckh_ratio * reference_length(gt, cfg);
    const std::size_t n =
        std::min(gt.pose.keypoints.size(), hyp.pose.keypoints.size());
    int visible = 0;
    int correct = 0;
    for (std::size_t i = 0; i < gt.pose.keypoints.size(); ++i) {
        if (!joint_visible(gt.pose, static_cast<int>(i))) continue;
        ++visible;
        if (i >= n) continue;
        const Keypoint& g = gt.pose.keypoints[i];
        const Keypoint& h = hyp.pose.keypoints[i];
        if (std::hypot(g.x - h.x, g.y - h.y) <= radius) ++correct;
    }
    if (visible == 0) return 1.0 - iou(gt.box, hyp.box);
    return 1.0 - static_cast<double>(correct) / visible;
}

void MotReport::finalize() {
    mota_defined = gt_count > 0;
    mota = mota_defined
               ? 1.0 - static_cast<double>(fp + fn + ids) / static_cast<double>(gt_count)
               : std::numeric_limits<double>::quiet_NaN();
    motp_defined = matches > 0;
    motp = motp_defined ? 1.0 - match_distance_sum / static_cast<double>(matches)
                        : std::numeric_limits<double>::quiet_NaN();
    precision = (matches + fp) > 0
                    ? static_cast<double>(matches) / static_cast<double>(matches + fp)
                    : 0.0;
    recall = (matches + fn) > 0
                 ? static_cast<double>(matches) / static_cast<double>(matches + fn)
                 : 0.0;
    mean_ap = 0.0;
    if (!per_joint_ap.empty()) {
        for (const double ap : per_joint_ap) mean_ap += ap;
        mean_ap /= static_cast<double>(per_joint_ap.size());
    }
}

void merge_counts(MotReport& a, const MotReport& b) {
    a.fp += b.fp;
    a.fn += b.fn;
    a.ids += b.ids;
    a.gt_count += b.gt_count;
    a.matches += b.matches;
    a.match_distance_sum += b.match_distance_sum;
}

void MotAccumulator::observe_frame(const std::vector<Instance>& gt,
                                   const std::vector<Instance>& hyp) {
    check_unique_ids(gt, "ground-truth");
    check_unique_ids(hyp, "hypothesis");

    counts_.gt_count += static_cast<std::int64_t>(gt.size());

    std::map<std::int64_t, int> gt_index, hyp_index;
    for (int i = 0; i < static_cast<int>(gt.size()); ++i) gt_index[gt[i].id] = i;
    for (int i = 0; i < static_cast<int>(hyp.size()); ++i) hyp_index[hyp[i].id] = i;

    std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp.size(), 0);
    std::map<std::int64_t, std::int64_t> next_active;

    // Keep last frame's pairs while both sides are present and still close.
    for (const auto& [gid, hid] : active_) {
        const auto gi = gt_index.find(gid);
        const auto hi = hyp_index.find(hid);
        if (gi == gt_index.end() || hi == hyp_index.end()) continue;
        const double d = pose_distance(gt[gi->second], hyp[hi->second], cfg_);
        if (d > cfg_.match_threshold) continue;
        gt_used[gi->second] = 1;
        hyp_used[hi->second] = 1;
        next_active[gid] = hid;
        ++counts_.matches;
        counts_.match_distance_sum += d;
    }

    // Minimum-distance assignment over the remainder.
    std::vector<int> free_gt, free_hyp;
    for (int i = 0; i < static_cast<int>(gt.size()); ++i)
        if (!gt_used[i]) free_gt.push_back(i);
    for (int i = 0; i < static_cast<int>(hyp.size()); ++i)
        if (!hyp_used[i]) free_hyp.push_back(i);

    CostMatrix costs(static_cast<int>(free_gt.size()), static_cast<int>(free_hyp.size()));
    for (int r = 0; r < costs.rows(); ++r)
        for (int c = 0; c < costs.cols(); ++c)
            costs.at(r, c) = pose_distance(gt[free_gt[r]], hyp[free_hyp[c]], cfg_);

    for (const auto& [r, c] : assign(costs, cfg_.match_threshold, AssignStrategy::hungarian)) {
        const Instance& g = gt[free_gt[r]];
        const Instance& h = hyp[free_hyp[c]];
        gt_used[free_gt[r]] = 1;
        hyp_used[free_hyp[c]] = 1;
        ++counts_.matches;
        counts_.match_distance_sum += costs.at(r, c);
        const auto prev = mapping_.find(g.id);
        if (prev != mapping_.end() && prev->second != h.id) ++counts_.ids;
        next_active[g.id] = h.id;
    }

    for (const auto& [gid, hid] : next_active) mapping_[gid] = hid;
    active_ = std::move(next_active);

    for (const char used : gt_used)
        if (!used) ++counts_.fn;
    for (const char used : hyp_used)
        if (!used) ++counts_.fp;
}

MotReport MotAccumulator::report() const {
    MotReport r = counts_;
    r.finalize();
    return r;
}

double pose_ap(const std::vector<EvalFrame>& frames, int joint, const MetricsConfig& cfg) {
    std::int64_t total_gt = 0;
    // (score, frame, hyp index, is_tp) per joint detection, matched greedily
    // by descending score within each frame.
    std::vector<std::tuple<double, int, int, bool>> detections;

    for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
        const EvalFrame& frame = frames[f];
        std::vector<char> claimed(frame.gt.size(), 0);
        for (const Instance& g : frame.gt)
            if (joint_visible(g.pose, joint)) ++total_gt;

        std::vector<int> order;
        for (int i = 0; i < static_cast<int>(frame.hyp.size()); ++i)
            if (joint_visible(frame.hyp[i].pose, joint)) order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return frame.hyp[a].score > frame.hyp[b].score;
        });

        for (const int hi : order) {
            const Keypoint& hk = frame.hyp[hi].pose.keypoints[joint];
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int gi = 0; gi < static_cast<int>(frame.gt.size()); ++gi) {
                if (claimed[gi] || !joint_visible(frame.gt[gi].pose, joint)) continue;
                const Keypoint& gk = frame.gt[gi].pose.keypoints[joint];
                const double d = std::hypot(gk.x - hk.x, gk.y - hk.y);
                const double radius = cfg.pckh_ratio * reference_length(frame.gt[gi], cfg);
                if (d <= radius && d < best_d) {
                    best_d = d;
                    best = gi;
                }
            }
            if (best >= 0) claimed[best] = 1;
            detections.emplace_back(frame.hyp[hi].score, f, hi, best >= 0);
        }
    }

    if (total_gt == 0 || detections.empty()) return 0.0;

    // Global ranking: score descending, then frame and index for determinism.
    std::sort(detections.begin(), detections.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });

    std::vector<double> precision, recall;
    std::int64_t tp = 0, fp = 0;
    for (const auto& [score, f, i, is_tp] : detections) {
        (void)score;
        (void)f;
        (void)i;
        is_tp ? ++tp : ++fp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    }

    // All-points interpolation: monotone precision envelope from the right.
    for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i)
        precision[i] = std::max(precision[i], precision[i + 1]);

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

} // namespace keytrack
