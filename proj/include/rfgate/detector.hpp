#pragma once

#include "rfgate/geometry.hpp"
#include "rfgate/preprocess.hpp"
#include "rfgate/series.hpp"
#include "rfgate/simulator.hpp"
#include "rfgate/velocity.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rfgate {

enum class GateScope {
    alarmed,   // gate on the tag that raised the alarm
    max_tag,   // gate on the largest per-tag RSSI change
    aggregate, // gate on the all-tag pooled series
};

struct DetectorConfig {
    double base_window = 2.0;    // decision window (s)
    double asti_threshold = 0.3; // relative interval change that alarms
    int k_consecutive = 3;       // grid steps the rate must stay above
    double rssi_gate = 0.05;     // relative RSSI change separating blockage
    double baseline_len = 5.0;   // leading interference-free span (s)
    GateScope gate_scope = GateScope::alarmed;
    bool elimination_enabled = true; // false = raw detector (alarm == verdict)
    double max_dip_wait = 10.0;      // s to wait for the dip to recover
    MatchConfig match;

    void validate() const;
};

enum class AlarmStage {
    raw_alarm,
    gated_blocking,
    window_extended,
    ur_confirmed,
    cleared,
};

std::string to_string(AlarmStage s);

struct AlarmEvent {
    double t = 0.0;
    AlarmStage stage = AlarmStage::raw_alarm;
    std::optional<double> v_hat;
    std::optional<double> t_in;
    double window_used = 0.0;
    int tag_index = -1;
    bool no_match_fallback = false; // velocity no-match forced the confirm
};

/// Preprocessed per-tag signal bundle on a common grid rate.
struct DetectionInput {
    std::vector<std::string> tags;
    std::vector<Series> rssi; // one per tag, uniform grid
    std::vector<Series> asti; // one per tag, uniform grid
    double grid_rate = 100.0;
};

DetectionInput build_detection_input(const std::vector<TagRead>& reads,
                                     const PreprocessConfig& cfg);

/// Relative change of the windowed mean against the leading baseline:
/// |mean[t_now - base_window, t_now] - mean(baseline)| / mean(baseline).
/// nullopt until baseline_len + base_window of history exists.
std::optional<double> asti_change_rate(const Series& asti, const DetectorConfig& cfg,
                                       double t_now);

/// Same statistic on the dBm scale (denominator |mean(baseline)|).
std::optional<double> rssi_change_rate(const Series& rssi, const DetectorConfig& cfg,
                                       double t_now);

/// Mean ASTI change over [t_gate + t_in, t_gate + t_in + base_window]
/// against the baseline; the post-extension recheck statistic.
std::optional<double> extended_change_rate(const Series& asti, const DetectorConfig& cfg,
                                           double t_gate, double t_in);

/// Streaming unauthorized-reader detection over the bundle:
///  1. raw_alarm once any tag's ASTI change rate exceeds asti_threshold for
///     k_consecutive grid steps,
///  2. confirmed immediately when the RSSI change rate sits within
///     rssi_gate (nothing blocking explains the alarm),
///  3. otherwise gated as blocking: the crossing speed is matched against
///     the database, the decision window grows by the implied impact time,
///  4. the ASTI criterion is rechecked past the extension; still above
///     threshold confirms, otherwise the alarm clears.
/// A failed velocity match confirms conservatively and flags the event.
std::vector<AlarmEvent> detect(const DetectionInput& input, const VelocityProfileDB& db,
                               const Scene& scene, const DetectorConfig& cfg);

/// Alarm log lines: `t,stage,v_hat,t_in,window_used` with empty fields for
/// absent optionals.
void write_alarm_log(std::ostream& os, const std::vector<AlarmEvent>& events);
void write_alarm_log_file(const std::string& path, const std::vector<AlarmEvent>& events);

} // namespace rfgate
