#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "keytrack/metrics.hpp"
#include "keytrack/sifp.hpp"
#include "keytrack/simulator.hpp"
#include "keytrack/stream.hpp"
#include "keytrack/tracker.hpp"

namespace keytrack {

// Newline-delimited stream of frame observations: one JSON object per line,
//   {"seq": ..., "frame": ..., "detections": [{"box": [x0,y0,x1,y1],
//    "score": ..., "keypoints": [[x,y,c], ...], "reid": [...]}]}
// Records are validated and Re-ID features normalized to unit L2 norm on
// ingestion; unknown fields are ignored; frame indices must strictly
// increase within a sequence. Errors name the line and field.
class ObservationReader {
public:
    ObservationReader(std::istream& in, StreamSpec spec);

    // Fills out and returns true, or returns false at end of input.
    bool next(FrameObservations& out);

    const StreamSpec& spec() const { return spec_; }

private:
    std::istream& in_;
    StreamSpec spec_;
    std::map<std::string, std::int64_t> last_frame_;
    std::size_t line_no_ = 0;
};

// Same protocol with per-entry track ids:
//   {"seq": ..., "frame": ..., "tracks": [{"id": ..., "box": ...,
//    "score": ..., "keypoints": ..., "reid": ..., "occluded": ...}]}
// The occluded flag is optional (simulator ground truth carries it).
class TrackedReader {
public:
    TrackedReader(std::istream& in, StreamSpec spec);
    bool next(TrackedFrame& out);
    const StreamSpec& spec() const { return spec_; }

private:
    std::istream& in_;
    StreamSpec spec_;
    std::map<std::string, std::int64_t> last_frame_;
    std::size_t line_no_ = 0;
};

// Canonical single-line serializations; numbers use the shortest
// representation that parses back to the same value, so write(read(x))
// is byte-identical for canonical-form inputs.
void write_observations_line(std::ostream& out, const FrameObservations& frame);
void write_tracked_line(std::ostream& out, const TrackedFrame& frame,
                        bool with_occluded = false);

std::vector<FrameObservations> read_observations(std::istream& in, StreamSpec spec);
std::vector<TrackedFrame> read_tracked(std::istream& in, StreamSpec spec);

// Flat key-value config file: one `key = value` per line, `#` comments.
// Applied on top of defaults; CLI flags override file values.
class KvConfig {
public:
    KvConfig() = default;
    static KvConfig from_stream(std::istream& in, const std::string& name = "<config>");
    static KvConfig from_file(const std::string& path);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;

    void apply(TrackerConfig& cfg) const;
    void apply(SifpConfig& cfg) const;
    void apply(ScenarioConfig& cfg) const;
    void apply(MetricsConfig& cfg) const;
    void apply(StreamSpec& spec) const;

private:
    std::map<std::string, std::string> values_;
};

TrackerMode parse_tracker_mode(const std::string& name);
AssignStrategy parse_assign_strategy(const std::string& name);
ScenarioLayout parse_scenario_layout(const std::string& name);
const char* to_string(TrackerMode mode);
const char* to_string(AssignStrategy strategy);
const char* to_string(ScenarioLayout layout);

// Flat key-value report plus a machine-readable JSON document.
void print_report(std::ostream& out, const MotReport& report);
std::string report_to_json(const MotReport& report);

// Minimal COCO-style annotation document:
//   {"images": [{"id": ..., "width": ..., "height": ...}],
//    "annotations": [{"image_id": ..., "bbox": [x, y, w, h]}]}
struct AnnotatedImage {
    std::int64_t id = 0;
    double width = 0.0;
    double height = 0.0;
    std::vector<Box> objects;
};

std::vector<AnnotatedImage> read_coco_annotations(std::istream& in);

} // namespace keytrack
