#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "keytrack/errors.hpp"
#include "keytrack/io.hpp"
#include "keytrack/pipeline.hpp"

namespace kt = keytrack;

namespace {

// "-" selects the standard stream.
std::istream& open_input(const std::string& path, std::unique_ptr<std::ifstream>& holder) {
    if (path == "-") return std::cin;
    holder = std::make_unique<std::ifstream>(path);
    if (!*holder) throw kt::Error("cannot open input '" + path + "'");
    return *holder;
}

std::ostream& open_output(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
    if (path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path);
    if (!*holder) throw kt::Error("cannot open output '" + path + "'");
    return *holder;
}

struct CommonOptions {
    std::string config_path;
    kt::KvConfig file_config;

    void load() {
        if (!config_path.empty()) file_config = kt::KvConfig::from_file(config_path);
    }
};

void add_tracker_flags(CLI::App* cmd, kt::TrackerConfig& cfg, std::string& mode,
                       std::string& strategy) {
    cmd->add_option("--mode", mode, "iou_only | reid_always | occlusion_aware");
    cmd->add_option("--assignment", strategy, "hungarian | greedy");
    cmd->add_option("--theta-pos", cfg.theta_pos, "weight of the IoU term");
    cmd->add_option("--sigma-max", cfg.sigma_max, "appearance distance cap");
    cmd->add_option("--cost-gate", cfg.cost_gate, "maximum matchable cost");
    cmd->add_option("--max-age", cfg.max_age, "misses before a track dies");
    cmd->add_option("--min-score", cfg.min_score, "detection score floor");
    cmd->add_option("--appearance-blend", cfg.appearance_blend,
                    "valid-update blend factor, 1 = replace");
    cmd->add_option("--gamma-valid", cfg.occlusion.gamma_valid,
                    "keypoint confidence threshold");
    cmd->add_option("--theta-valid", cfg.occlusion.theta_valid,
                    "visible keypoint count threshold");
    cmd->add_option("--keypoints", cfg.stream.n_keypoints, "keypoints per pose, 0 = infer");
    cmd->add_option("--reid-dim", cfg.stream.reid_dim, "feature length, 0 = infer");
}

void add_scenario_flags(CLI::App* cmd, kt::ScenarioConfig& cfg, std::string& layout) {
    cmd->add_option("--seed", cfg.seed, "scenario seed");
    cmd->add_option("--persons", cfg.n_persons, "number of persons");
    cmd->add_option("--frames", cfg.n_frames, "number of frames");
    cmd->add_option("--arena-w", cfg.arena_w, "arena width, px");
    cmd->add_option("--arena-h", cfg.arena_h, "arena height, px");
    cmd->add_option("--speed-min", cfg.speed_min, "min speed, px/frame");
    cmd->add_option("--speed-max", cfg.speed_max, "max speed, px/frame");
    cmd->add_option("--occlusion-iou", cfg.occlusion_iou_threshold,
                    "IoU above which the farther person is occluded");
    cmd->add_option("--reid-noise", cfg.reid_noise_sigma, "feature noise sigma");
    cmd->add_option("--confidence-ceiling", cfg.occluded_confidence_ceiling,
                    "occluded keypoint confidence cap");
    cmd->add_option("--feature-blend", cfg.occluded_feature_blend,
                    "occluded feature blend toward the occluder");
    cmd->add_option("--fp-rate", cfg.detector_fp_rate, "per-frame spurious detection rate");
    cmd->add_option("--fn-rate", cfg.detector_fn_rate, "per-person drop rate");
    cmd->add_option("--layout", layout, "crossing | random");
    cmd->add_option("--sim-keypoints", cfg.n_keypoints, "keypoints per pose");
    cmd->add_option("--sim-reid-dim", cfg.reid_dim, "feature length");
    cmd->add_option("--seq", cfg.seq, "sequence id");
}

void print_ablation_table(std::ostream& out, const std::vector<kt::AblationRow>& rows) {
    out << "mode             fp       fn       ids      mota\n";
    for (const auto& row : rows) {
        std::ostringstream mota;
        if (row.report.mota_defined)
            mota << row.report.mota;
        else
            mota << "nan";
        out << kt::to_string(row.mode);
        for (std::size_t i = std::string(kt::to_string(row.mode)).size(); i < 17; ++i)
            out << ' ';
        std::ostringstream line;
        line << row.report.fp << "\t" << row.report.fn << "\t" << row.report.ids << "\t"
             << mota.str();
        out << line.str() << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"occlusion-aware multi-person pose tracking engine"};
    app.require_subcommand(1);
    CommonOptions common;
    app.add_option("--config", common.config_path, "flat key=value config file");

    // track
    auto* track = app.add_subcommand("track", "assign track ids to a detection stream");
    std::string track_in = "-", track_out = "-", track_mode, track_strategy;
    kt::TrackerConfig tracker_cfg;
    track->add_option("--in", track_in, "detection stream, - for stdin");
    track->add_option("--out", track_out, "tracked stream, - for stdout");
    add_tracker_flags(track, tracker_cfg, track_mode, track_strategy);

    // eval
    auto* eval = app.add_subcommand("eval", "score a tracked stream against ground truth");
    std::string eval_gt, eval_hyp, eval_json;
    kt::MetricsConfig metrics_cfg;
    kt::StreamSpec eval_spec;
    eval->add_option("--gt", eval_gt, "ground-truth tracked stream")->required();
    eval->add_option("--hyp", eval_hyp, "hypothesis tracked stream")->required();
    eval->add_option("--json", eval_json, "also write the report as JSON to this path");
    eval->add_option("--match-threshold", metrics_cfg.match_threshold,
                     "maximum pose distance for a match");
    eval->add_option("--pckh-ratio", metrics_cfg.pckh_ratio, "joint correctness radius");
    eval->add_option("--head-top", metrics_cfg.head_top, "head-top joint index, -1 = none");
    eval->add_option("--head-bottom", metrics_cfg.head_bottom,
                     "head-bottom joint index, -1 = none");
    eval->add_option("--keypoints", eval_spec.n_keypoints, "keypoints per pose, 0 = infer");
    eval->add_option("--reid-dim", eval_spec.reid_dim, "feature length, 0 = infer");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate detection + ground-truth streams");
    std::string sim_dets = "-", sim_gt, sim_layout;
    kt::ScenarioConfig scenario_cfg;
    simulate->add_option("--dets", sim_dets, "detection stream output, - for stdout");
    simulate->add_option("--gt", sim_gt, "ground-truth stream output")->required();
    add_scenario_flags(simulate, scenario_cfg, sim_layout);

    // sifp-plan
    auto* sifp_plan = app.add_subcommand("sifp-plan", "plan scale-normalized training chips");
    std::string plan_in = "-", plan_out = "-";
    kt::SifpConfig sifp_cfg;
    sifp_plan->add_option("--annotations", plan_in, "COCO-style annotation JSON, - for stdin");
    sifp_plan->add_option("--out", plan_out, "report destination, - for stdout");
    std::vector<double> plan_omegas, plan_areas;
    sifp_plan->add_option("--omegas", plan_omegas, "pyramid scaling factors");
    sifp_plan->add_option("--s-lower", sifp_cfg.s_lower, "valid scale lower bound");
    sifp_plan->add_option("--s-upper", sifp_cfg.s_upper, "valid scale upper bound");
    sifp_plan->add_option("--fpn-areas", plan_areas, "five ascending anchor areas");

    // bench
    auto* bench = app.add_subcommand("bench", "measure per-frame tracking latency");
    int bench_dets = 100, bench_frames = 300, bench_dim = 128;
    std::uint64_t bench_seed = 7;
    std::string bench_mode, bench_strategy;
    kt::TrackerConfig bench_cfg;
    bench->add_option("--detections", bench_dets, "detections per frame");
    bench->add_option("--frames", bench_frames, "frames to time");
    bench->add_option("--dim", bench_dim, "feature length");
    bench->add_option("--seed", bench_seed, "load generator seed");
    add_tracker_flags(bench, bench_cfg, bench_mode, bench_strategy);

    // ablate
    auto* ablate = app.add_subcommand(
        "ablate", "compare the three matching strategies on one stream");
    std::string ab_dets, ab_gt, ab_layout, ab_mode_unused, ab_strategy_unused;
    kt::ScenarioConfig ab_scenario;
    kt::TrackerConfig ab_tracker;
    kt::MetricsConfig ab_metrics;
    ablate->add_option("--dets", ab_dets, "detection stream (omit to simulate)");
    ablate->add_option("--gt", ab_gt, "ground-truth tracked stream (omit to simulate)");
    add_scenario_flags(ablate, ab_scenario, ab_layout);
    add_tracker_flags(ablate, ab_tracker, ab_mode_unused, ab_strategy_unused);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        common.load();

        if (track->parsed()) {
            common.file_config.apply(tracker_cfg);
            if (!track_mode.empty()) tracker_cfg.mode = kt::parse_tracker_mode(track_mode);
            if (!track_strategy.empty())
                tracker_cfg.assignment = kt::parse_assign_strategy(track_strategy);
            std::unique_ptr<std::ifstream> in_holder;
            std::unique_ptr<std::ofstream> out_holder;
            std::istream& in = open_input(track_in, in_holder);
            std::ostream& out = open_output(track_out, out_holder);
            kt::ObservationReader reader(in, tracker_cfg.stream);
            std::map<std::string, kt::Tracker> trackers;
            kt::FrameObservations frame;
            while (reader.next(frame)) {
                auto it = trackers.find(frame.seq);
                if (it == trackers.end()) {
                    kt::TrackerConfig per_seq = tracker_cfg;
                    per_seq.stream = reader.spec();
                    it = trackers.emplace(frame.seq, kt::Tracker(per_seq)).first;
                }
                kt::write_tracked_line(out, it->second.step(frame));
            }
            return 0;
        }

        if (eval->parsed()) {
            common.file_config.apply(metrics_cfg);
            common.file_config.apply(eval_spec);
            std::unique_ptr<std::ifstream> gt_holder, hyp_holder;
            std::istream& gt_in = open_input(eval_gt, gt_holder);
            std::istream& hyp_in = open_input(eval_hyp, hyp_holder);
            const auto gt = kt::read_tracked(gt_in, eval_spec);
            const auto hyp = kt::read_tracked(hyp_in, eval_spec);
            const kt::MotReport report = kt::evaluate_streams(gt, hyp, metrics_cfg);
            kt::print_report(std::cout, report);
            if (!eval_json.empty()) {
                std::ofstream json_out(eval_json);
                if (!json_out) throw kt::Error("cannot open output '" + eval_json + "'");
                json_out << kt::report_to_json(report) << '\n';
            }
            return 0;
        }

        if (simulate->parsed()) {
            common.file_config.apply(scenario_cfg);
            if (!sim_layout.empty())
                scenario_cfg.layout = kt::parse_scenario_layout(sim_layout);
            const kt::Scenario scenario = kt::generate(scenario_cfg);
            std::unique_ptr<std::ofstream> det_holder, gt_holder;
            std::ostream& det_out = open_output(sim_dets, det_holder);
            std::ostream& gt_out = open_output(sim_gt, gt_holder);
            for (const auto& f : scenario.detections) kt::write_observations_line(det_out, f);
            for (const auto& f : scenario.truth)
                kt::write_tracked_line(gt_out, kt::to_tracked(f), /*with_occluded=*/true);
            return 0;
        }

        if (sifp_plan->parsed()) {
            common.file_config.apply(sifp_cfg);
            if (!plan_omegas.empty()) sifp_cfg.omegas = plan_omegas;
            if (!plan_areas.empty()) sifp_cfg.fpn_areas = plan_areas;
            std::unique_ptr<std::ifstream> in_holder;
            std::unique_ptr<std::ofstream> out_holder;
            std::istream& in = open_input(plan_in, in_holder);
            std::ostream& out = open_output(plan_out, out_holder);

            const auto images = kt::read_coco_annotations(in);
            // Aggregate histograms across images: objects per pyramid factor
            // and per feature-map level, plus a log2 scale histogram.
            std::map<double, std::int64_t> included_by_omega, excluded_by_omega;
            std::map<int, std::int64_t> by_level;
            std::map<int, std::int64_t> scale_bins; // floor(log2 s) of valid rescaled scales
            std::int64_t total_chips = 0;

            for (const auto& img : images) {
                const kt::SifpPlan plan =
                    kt::plan(img.width, img.height, img.objects, sifp_cfg);
                out << "image " << img.id << " size " << img.width << "x" << img.height
                    << " objects " << img.objects.size() << '\n';
                for (const auto& level : plan.levels) {
                    std::int64_t included = 0;
                    for (const auto& chip : level.chips) {
                        included += static_cast<std::int64_t>(chip.included.size());
                        ++total_chips;
                    }
                    std::int64_t valid = 0;
                    for (int obj = 0; obj < static_cast<int>(level.fpn_level.size()); ++obj) {
                        const int lvl = level.fpn_level[obj];
                        if (lvl == 0) continue;
                        ++valid;
                        ++by_level[lvl];
                        const double s =
                            level.omega * kt::object_scale(img.objects[obj]);
                        ++scale_bins[static_cast<int>(std::floor(std::log2(s)))];
                    }
                    included_by_omega[level.omega] += valid;
                    excluded_by_omega[level.omega] +=
                        static_cast<std::int64_t>(img.objects.size()) - valid;
                    out << "  omega " << level.omega << " chips " << level.chips.size()
                        << " valid " << valid << " invalid "
                        << (img.objects.size() - valid) << '\n';
                }
            }

            out << "total_images " << images.size() << '\n';
            out << "total_chips " << total_chips << '\n';
            out << "objects_by_omega\n";
            for (const auto& [omega, count] : included_by_omega)
                out << "  " << omega << " included " << count << " excluded "
                    << excluded_by_omega[omega] << '\n';
            out << "objects_by_fpn_level\n";
            for (const auto& [lvl, count] : by_level)
                out << "  P" << lvl << ' ' << count << '\n';
            out << "valid_rescaled_scale_histogram_log2\n";
            for (const auto& [bin, count] : scale_bins)
                out << "  [" << (1 << std::max(0, bin)) << ',' << (1 << std::max(0, bin + 1))
                    << ") " << count << '\n';
            return 0;
        }

        if (bench->parsed()) {
            common.file_config.apply(bench_cfg);
            if (!bench_mode.empty()) bench_cfg.mode = kt::parse_tracker_mode(bench_mode);
            if (!bench_strategy.empty())
                bench_cfg.assignment = kt::parse_assign_strategy(bench_strategy);
            const kt::BenchResult r =
                kt::run_bench(bench_dets, bench_frames, bench_dim, bench_cfg, bench_seed);
            std::cout << "frames " << r.frames << '\n'
                      << "detections_per_frame " << r.detections_per_frame << '\n'
                      << "p50_ms " << r.p50_ms << '\n'
                      << "p90_ms " << r.p90_ms << '\n'
                      << "p99_ms " << r.p99_ms << '\n'
                      << "mean_ms " << r.mean_ms << '\n'
                      << "fps " << r.fps << '\n';
            return 0;
        }

        if (ablate->parsed()) {
            common.file_config.apply(ab_scenario);
            common.file_config.apply(ab_tracker);
            common.file_config.apply(ab_metrics);
            if (!ab_layout.empty()) ab_scenario.layout = kt::parse_scenario_layout(ab_layout);
            std::vector<kt::FrameObservations> dets;
            std::vector<kt::TrackedFrame> gt;
            if (!ab_dets.empty() && !ab_gt.empty()) {
                std::unique_ptr<std::ifstream> det_holder, gt_holder;
                dets = kt::read_observations(open_input(ab_dets, det_holder),
                                             ab_tracker.stream);
                gt = kt::read_tracked(open_input(ab_gt, gt_holder), ab_tracker.stream);
            } else if (ab_dets.empty() && ab_gt.empty()) {
                const kt::Scenario scenario = kt::generate(ab_scenario);
                dets = scenario.detections;
                gt.reserve(scenario.truth.size());
                for (const auto& f : scenario.truth) gt.push_back(kt::to_tracked(f));
            } else {
                throw kt::Error("ablate: provide both --dets and --gt, or neither");
            }
            print_ablation_table(std::cout, kt::run_ablation(dets, gt, ab_tracker, ab_metrics));
            return 0;
        }
    } catch (const kt::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
