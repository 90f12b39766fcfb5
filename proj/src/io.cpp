#include "keytrack/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "keytrack/errors.hpp"

namespace keytrack {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string at_line(std::size_t line_no, const std::string& what) {
    return "line " + std::to_string(line_no) + ": " + what;
}

double require_finite_number(const ordered_json& v, std::size_t line_no,
                             const std::string& field) {
    if (!v.is_number()) throw StreamError(at_line(line_no, field + ": expected a number"));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw StreamError(at_line(line_no, field + ": non-finite value"));
    return d;
}

Box parse_box(const ordered_json& v, std::size_t line_no) {
    if (!v.is_array() || v.size() != 4)
        throw StreamError(at_line(line_no, "box: expected [x0, y0, x1, y1]"));
    Box b{require_finite_number(v[0], line_no, "box"),
          require_finite_number(v[1], line_no, "box"),
          require_finite_number(v[2], line_no, "box"),
          require_finite_number(v[3], line_no, "box")};
    if (b.x_max < b.x_min || b.y_max < b.y_min)
        throw StreamError(at_line(line_no, "box: max corner below min corner"));
    return b;
}

Pose parse_pose(const ordered_json& v, std::size_t line_no, int& n_keypoints) {
    if (!v.is_array()) throw StreamError(at_line(line_no, "keypoints: expected an array"));
    if (n_keypoints <= 0) n_keypoints = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != n_keypoints) {
        throw StreamError(at_line(line_no, "keypoints: expected " +
                                               std::to_string(n_keypoints) +
                                               " keypoints, got " + std::to_string(v.size())));
    }
    Pose p;
    p.keypoints.reserve(v.size());
    for (const auto& kv : v) {
        if (!kv.is_array() || kv.size() != 3)
            throw StreamError(at_line(line_no, "keypoints: expected [x, y, c] triples"));
        Keypoint k;
        k.x = require_finite_number(kv[0], line_no, "keypoints");
        k.y = require_finite_number(kv[1], line_no, "keypoints");
        if (!kv[2].is_number())
            throw StreamError(at_line(line_no, "keypoints: expected a numeric confidence"));
        k.c = kv[2].get<double>();
        if (!std::isfinite(k.c)) k.c = 0.0; // corrupt confidences read as invisible
        if (k.c < 0.0 || k.c > 1.0)
            throw StreamError(at_line(line_no, "keypoints: confidence outside [0,1]"));
        p.keypoints.push_back(k);
    }
    return p;
}

ReidFeature parse_reid(const ordered_json& v, std::size_t line_no, int& reid_dim) {
    if (!v.is_array()) throw StreamError(at_line(line_no, "reid: expected an array"));
    if (reid_dim <= 0) reid_dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != reid_dim) {
        throw StreamError(at_line(line_no, "reid: expected " + std::to_string(reid_dim) +
                                               " values, got " + std::to_string(v.size())));
    }
    ReidFeature f;
    f.values.reserve(v.size());
    double norm_sq = 0.0;
    for (const auto& x : v) {
        const double d = require_finite_number(x, line_no, "reid");
        f.values.push_back(d);
        norm_sq += d * d;
    }
    const double norm = std::sqrt(norm_sq);
    if (!(norm > 0.0)) throw StreamError(at_line(line_no, "reid: zero norm"));
    for (double& x : f.values) x /= norm;
    return f;
}

double parse_score(const ordered_json& v, std::size_t line_no) {
    const double s = require_finite_number(v, line_no, "score");
    if (s < 0.0 || s > 1.0) throw StreamError(at_line(line_no, "score: outside [0,1]"));
    return s;
}

ordered_json parse_line_object(const std::string& line, std::size_t line_no) {
    ordered_json v = ordered_json::parse(line, nullptr, false);
    if (v.is_discarded()) throw StreamError(at_line(line_no, "record: invalid JSON"));
    if (!v.is_object()) throw StreamError(at_line(line_no, "record: expected an object"));
    return v;
}

void parse_header(const ordered_json& v, std::size_t line_no, std::string& seq,
                  std::int64_t& frame, std::map<std::string, std::int64_t>& last_frame) {
    if (!v.contains("seq") || !v["seq"].is_string())
        throw StreamError(at_line(line_no, "seq: expected a string"));
    seq = v["seq"].get<std::string>();
    if (!v.contains("frame") || !v["frame"].is_number_integer())
        throw StreamError(at_line(line_no, "frame: expected an integer"));
    frame = v["frame"].get<std::int64_t>();
    if (frame < 0) throw StreamError(at_line(line_no, "frame: negative index"));
    const auto it = last_frame.find(seq);
    if (it != last_frame.end() && frame <= it->second) {
        throw StreamError(at_line(line_no, "frame: index " + std::to_string(frame) +
                                               " not above previous " +
                                               std::to_string(it->second) + " in sequence '" +
                                               seq + "'"));
    }
    last_frame[seq] = frame;
}

Detection parse_detection(const ordered_json& v, std::size_t line_no, StreamSpec& spec) {
    if (!v.is_object()) throw StreamError(at_line(line_no, "detections: expected objects"));
    if (!v.contains("box")) throw StreamError(at_line(line_no, "box: missing"));
    if (!v.contains("score")) throw StreamError(at_line(line_no, "score: missing"));
    if (!v.contains("keypoints")) throw StreamError(at_line(line_no, "keypoints: missing"));
    if (!v.contains("reid")) throw StreamError(at_line(line_no, "reid: missing"));
    Detection d;
    d.box = parse_box(v["box"], line_no);
    d.score = parse_score(v["score"], line_no);
    d.pose = parse_pose(v["keypoints"], line_no, spec.n_keypoints);
    d.reid = parse_reid(v["reid"], line_no, spec.reid_dim);
    return d;
}

bool next_nonempty_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty()) return true;
    }
    return false;
}

ordered_json box_json(const Box& b) {
    return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

ordered_json detection_json(const Detection& d) {
    ordered_json o = ordered_json::object();
    o["box"] = box_json(d.box);
    o["score"] = d.score;
    ordered_json kps = ordered_json::array();
    for (const Keypoint& k : d.pose.keypoints)
        kps.push_back(ordered_json::array({k.x, k.y, k.c}));
    o["keypoints"] = std::move(kps);
    o["reid"] = d.reid.values;
    return o;
}

std::string dump_number(double x) { return ordered_json(x).dump(); }

} // namespace

ObservationReader::ObservationReader(std::istream& in, StreamSpec spec)
    : in_(in), spec_(spec) {}

bool ObservationReader::next(FrameObservations& out) {
    std::string line;
    if (!next_nonempty_line(in_, line, line_no_)) return false;
    const ordered_json v = parse_line_object(line, line_no_);
    out = FrameObservations{};
    parse_header(v, line_no_, out.seq, out.frame, last_frame_);
    if (!v.contains("detections") || !v["detections"].is_array())
        throw StreamError(at_line(line_no_, "detections: expected an array"));
    for (const auto& dv : v["detections"])
        out.detections.push_back(parse_detection(dv, line_no_, spec_));
    return true;
}

TrackedReader::TrackedReader(std::istream& in, StreamSpec spec) : in_(in), spec_(spec) {}

bool TrackedReader::next(TrackedFrame& out) {
    std::string line;
    if (!next_nonempty_line(in_, line, line_no_)) return false;
    const ordered_json v = parse_line_object(line, line_no_);
    out = TrackedFrame{};
    parse_header(v, line_no_, out.seq, out.frame, last_frame_);
    if (!v.contains("tracks") || !v["tracks"].is_array())
        throw StreamError(at_line(line_no_, "tracks: expected an array"));
    for (const auto& tv : v["tracks"]) {
        if (!tv.is_object()) throw StreamError(at_line(line_no_, "tracks: expected objects"));
        if (!tv.contains("id") || !tv["id"].is_number_integer())
            throw StreamError(at_line(line_no_, "id: expected an integer"));
        TrackedEntry e;
        e.id = tv["id"].get<std::int64_t>();
        e.det = parse_detection(tv, line_no_, spec_);
        if (tv.contains("occluded")) {
            if (!tv["occluded"].is_boolean())
                throw StreamError(at_line(line_no_, "occluded: expected a boolean"));
            e.occluded = tv["occluded"].get<bool>();
        }
        out.entries.push_back(std::move(e));
    }
    return true;
}

void write_observations_line(std::ostream& out, const FrameObservations& frame) {
    ordered_json o = ordered_json::object();
    o["seq"] = frame.seq;
    o["frame"] = frame.frame;
    ordered_json dets = ordered_json::array();
    for (const Detection& d : frame.detections) dets.push_back(detection_json(d));
    o["detections"] = std::move(dets);
    out << o.dump() << '\n';
}

void write_tracked_line(std::ostream& out, const TrackedFrame& frame, bool with_occluded) {
    ordered_json o = ordered_json::object();
    o["seq"] = frame.seq;
    o["frame"] = frame.frame;
    ordered_json tracks = ordered_json::array();
    for (const TrackedEntry& e : frame.entries) {
        ordered_json t = ordered_json::object();
        t["id"] = e.id;
        ordered_json det = detection_json(e.det);
        for (auto& [key, value] : det.items()) t[key] = std::move(value);
        if (with_occluded) t["occluded"] = e.occluded;
        tracks.push_back(std::move(t));
    }
    o["tracks"] = std::move(tracks);
    out << o.dump() << '\n';
}

std::vector<FrameObservations> read_observations(std::istream& in, StreamSpec spec) {
    ObservationReader reader(in, spec);
    std::vector<FrameObservations> frames;
    FrameObservations f;
    while (reader.next(f)) frames.push_back(std::move(f));
    return frames;
}

std::vector<TrackedFrame> read_tracked(std::istream& in, StreamSpec spec) {
    TrackedReader reader(in, spec);
    std::vector<TrackedFrame> frames;
    TrackedFrame f;
    while (reader.next(f)) frames.push_back(std::move(f));
    return frames;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

KvConfig KvConfig::from_stream(std::istream& in, const std::string& name) {
    KvConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

KvConfig KvConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return from_stream(in, path);
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

double KvConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": expected a number, got '" + it->second + "'");
    }
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": expected an integer, got '" + it->second +
                          "'");
    }
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::vector<double> KvConfig::get_doubles(const std::string& key,
                                          const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string body = trim(item);
        if (body.empty()) continue;
        try {
            out.push_back(std::stod(body));
        } catch (const std::exception&) {
            throw ConfigError("config: " + key + ": expected numbers, got '" + it->second +
                              "'");
        }
    }
    return out;
}

void KvConfig::apply(TrackerConfig& cfg) const {
    cfg.theta_pos = get_double("tracker.theta_pos", cfg.theta_pos);
    cfg.sigma_max = get_double("tracker.sigma_max", cfg.sigma_max);
    if (has("tracker.mode")) cfg.mode = parse_tracker_mode(get_string("tracker.mode", ""));
    cfg.cost_gate = get_double("tracker.cost_gate", cfg.cost_gate);
    cfg.max_age = static_cast<int>(get_int("tracker.max_age", cfg.max_age));
    cfg.min_score = get_double("tracker.min_score", cfg.min_score);
    if (has("tracker.assignment"))
        cfg.assignment = parse_assign_strategy(get_string("tracker.assignment", ""));
    cfg.appearance_blend = get_double("tracker.appearance_blend", cfg.appearance_blend);
    cfg.history_limit =
        static_cast<std::size_t>(get_int("tracker.history_limit",
                                         static_cast<std::int64_t>(cfg.history_limit)));
    cfg.occlusion.gamma_valid = get_double("occlusion.gamma_valid", cfg.occlusion.gamma_valid);
    cfg.occlusion.theta_valid =
        static_cast<int>(get_int("occlusion.theta_valid", cfg.occlusion.theta_valid));
    apply(cfg.stream);
}

void KvConfig::apply(SifpConfig& cfg) const {
    cfg.omegas = get_doubles("sifp.omegas", cfg.omegas);
    cfg.s_lower = get_double("sifp.s_lower", cfg.s_lower);
    cfg.s_upper = get_double("sifp.s_upper", cfg.s_upper);
    cfg.fpn_areas = get_doubles("sifp.fpn_areas", cfg.fpn_areas);
}

void KvConfig::apply(ScenarioConfig& cfg) const {
    cfg.seed = static_cast<std::uint64_t>(
        get_int("scenario.seed", static_cast<std::int64_t>(cfg.seed)));
    cfg.n_persons = static_cast<int>(get_int("scenario.n_persons", cfg.n_persons));
    cfg.n_frames = static_cast<int>(get_int("scenario.n_frames", cfg.n_frames));
    cfg.arena_w = get_double("scenario.arena_w", cfg.arena_w);
    cfg.arena_h = get_double("scenario.arena_h", cfg.arena_h);
    cfg.speed_min = get_double("scenario.speed_min", cfg.speed_min);
    cfg.speed_max = get_double("scenario.speed_max", cfg.speed_max);
    cfg.person_w = get_double("scenario.person_w", cfg.person_w);
    cfg.person_h = get_double("scenario.person_h", cfg.person_h);
    cfg.occlusion_iou_threshold =
        get_double("scenario.occlusion_iou_threshold", cfg.occlusion_iou_threshold);
    cfg.reid_noise_sigma = get_double("scenario.reid_noise_sigma", cfg.reid_noise_sigma);
    cfg.occluded_confidence_ceiling =
        get_double("scenario.occluded_confidence_ceiling", cfg.occluded_confidence_ceiling);
    cfg.occluded_feature_blend =
        get_double("scenario.occluded_feature_blend", cfg.occluded_feature_blend);
    cfg.detector_fp_rate = get_double("scenario.detector_fp_rate", cfg.detector_fp_rate);
    cfg.detector_fn_rate = get_double("scenario.detector_fn_rate", cfg.detector_fn_rate);
    cfg.box_jitter = get_double("scenario.box_jitter", cfg.box_jitter);
    cfg.keypoint_jitter = get_double("scenario.keypoint_jitter", cfg.keypoint_jitter);
    if (has("scenario.layout"))
        cfg.layout = parse_scenario_layout(get_string("scenario.layout", ""));
    cfg.n_keypoints = static_cast<int>(get_int("scenario.n_keypoints", cfg.n_keypoints));
    cfg.reid_dim = static_cast<int>(get_int("scenario.reid_dim", cfg.reid_dim));
    cfg.seq = get_string("scenario.seq", cfg.seq);
}

void KvConfig::apply(MetricsConfig& cfg) const {
    cfg.match_threshold = get_double("eval.match_threshold", cfg.match_threshold);
    cfg.pckh_ratio = get_double("eval.pckh_ratio", cfg.pckh_ratio);
    cfg.head_top = static_cast<int>(get_int("eval.head_top", cfg.head_top));
    cfg.head_bottom = static_cast<int>(get_int("eval.head_bottom", cfg.head_bottom));
    cfg.box_len_ratio = get_double("eval.box_len_ratio", cfg.box_len_ratio);
}

void KvConfig::apply(StreamSpec& spec) const {
    spec.n_keypoints = static_cast<int>(get_int("stream.n_keypoints", spec.n_keypoints));
    spec.reid_dim = static_cast<int>(get_int("stream.reid_dim", spec.reid_dim));
}

TrackerMode parse_tracker_mode(const std::string& name) {
    if (name == "iou_only") return TrackerMode::iou_only;
    if (name == "reid_always") return TrackerMode::reid_always;
    if (name == "occlusion_aware") return TrackerMode::occlusion_aware;
    throw ConfigError("config: unknown tracker mode '" + name + "'");
}

AssignStrategy parse_assign_strategy(const std::string& name) {
    if (name == "hungarian") return AssignStrategy::hungarian;
    if (name == "greedy") return AssignStrategy::greedy;
    throw ConfigError("config: unknown assignment strategy '" + name + "'");
}

ScenarioLayout parse_scenario_layout(const std::string& name) {
    if (name == "random") return ScenarioLayout::random;
    if (name == "crossing") return ScenarioLayout::crossing;
    throw ConfigError("config: unknown scenario layout '" + name + "'");
}

const char* to_string(TrackerMode mode) {
    switch (mode) {
    case TrackerMode::iou_only: return "iou_only";
    case TrackerMode::reid_always: return "reid_always";
    case TrackerMode::occlusion_aware: return "occlusion_aware";
    }
    return "?";
}

const char* to_string(AssignStrategy strategy) {
    return strategy == AssignStrategy::hungarian ? "hungarian" : "greedy";
}

const char* to_string(ScenarioLayout layout) {
    return layout == ScenarioLayout::crossing ? "crossing" : "random";
}

void print_report(std::ostream& out, const MotReport& report) {
    out << "gt_count " << report.gt_count << '\n';
    out << "matches " << report.matches << '\n';
    out << "fp " << report.fp << '\n';
    out << "fn " << report.fn << '\n';
    out << "ids " << report.ids << '\n';
    out << "mota " << (report.mota_defined ? dump_number(report.mota) : "nan") << '\n';
    out << "motp " << (report.motp_defined ? dump_number(report.motp) : "nan") << '\n';
    out << "precision " << dump_number(report.precision) << '\n';
    out << "recall " << dump_number(report.recall) << '\n';
    for (std::size_t j = 0; j < report.per_joint_ap.size(); ++j)
        out << "ap_joint_" << j << ' ' << dump_number(report.per_joint_ap[j]) << '\n';
    if (!report.per_joint_ap.empty())
        out << "mean_ap " << dump_number(report.mean_ap) << '\n';
}

std::string report_to_json(const MotReport& report) {
    ordered_json o = ordered_json::object();
    o["gt_count"] = report.gt_count;
    o["matches"] = report.matches;
    o["fp"] = report.fp;
    o["fn"] = report.fn;
    o["ids"] = report.ids;
    o["mota"] = report.mota_defined ? ordered_json(report.mota) : ordered_json(nullptr);
    o["motp"] = report.motp_defined ? ordered_json(report.motp) : ordered_json(nullptr);
    o["precision"] = report.precision;
    o["recall"] = report.recall;
    o["per_joint_ap"] = report.per_joint_ap;
    o["mean_ap"] = report.mean_ap;
    return o.dump();
}

std::vector<AnnotatedImage> read_coco_annotations(std::istream& in) {
    ordered_json doc = ordered_json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw StreamError("annotations: invalid JSON document");
    if (!doc.contains("images") || !doc["images"].is_array())
        throw StreamError("annotations: images: expected an array");
    if (!doc.contains("annotations") || !doc["annotations"].is_array())
        throw StreamError("annotations: annotations: expected an array");

    std::vector<AnnotatedImage> images;
    std::map<std::int64_t, std::size_t> by_id;
    for (const auto& iv : doc["images"]) {
        if (!iv.is_object() || !iv.contains("id") || !iv.contains("width") ||
            !iv.contains("height"))
            throw StreamError("annotations: images: expected {id, width, height}");
        AnnotatedImage img;
        img.id = iv["id"].get<std::int64_t>();
        img.width = iv["width"].get<double>();
        img.height = iv["height"].get<double>();
        by_id[img.id] = images.size();
        images.push_back(std::move(img));
    }
    for (const auto& av : doc["annotations"]) {
        if (!av.is_object() || !av.contains("image_id") || !av.contains("bbox") ||
            !av["bbox"].is_array() || av["bbox"].size() != 4)
            throw StreamError("annotations: annotations: expected {image_id, bbox[4]}");
        const std::int64_t image_id = av["image_id"].get<std::int64_t>();
        const auto it = by_id.find(image_id);
        if (it == by_id.end())
            throw StreamError("annotations: annotation references unknown image " +
                              std::to_string(image_id));
        const double x = av["bbox"][0].get<double>();
        const double y = av["bbox"][1].get<double>();
        const double w = av["bbox"][2].get<double>();
        const double h = av["bbox"][3].get<double>();
        if (w < 0.0 || h < 0.0) throw StreamError("annotations: bbox: negative size");
        images[it->second].objects.push_back(Box{x, y, x + w, y + h});
    }
    return images;
}

} // namespace keytrack
