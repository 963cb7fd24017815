#pragma once

#include "rfgate/detector.hpp"
#include "rfgate/geometry.hpp"
#include "rfgate/simulator.hpp"
#include "rfgate/velocity.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rfgate {

enum class Condition { free, interference, eliminated };
enum class UrSchedule { coin, all_on, all_off };

Condition condition_from_string(const std::string& s);
std::string to_string(Condition c);
UrSchedule ur_schedule_from_string(const std::string& s);
std::string to_string(UrSchedule s);

/// One evaluation group: `free` has no crossings, `interference` adds a
/// crossing per trial but runs the raw detector, `eliminated` adds the
/// crossing and the full gate + window-extension path.
struct Scenario {
    Condition condition = Condition::eliminated;
    int trials = 500;
    SimConfig sim;
    PreprocessConfig preprocess;
    double v_lo = 0.5, v_hi = 1.5;          // crossing speed range (m/s)
    double offset_lo = -0.2, offset_hi = 0.2; // path offset range (m)
    double obj_l_h = 0.5, obj_d_h = 0.3;
    double t_enter_base = 9.0, t_enter_jitter = 1.0;
    double ur_start = 8.0;
    UrSchedule ur_schedule = UrSchedule::coin;

    void validate() const;
};

struct TrialOutcome {
    int trial_id = 0;
    bool ground_truth_ur = false;
    bool verdict_ur = false;
    std::vector<AlarmEvent> events;
    std::optional<double> v_true;
    std::optional<double> v_hat;
    std::optional<double> t_verdict;   // time of the decisive event
    std::optional<double> t_stimulus;  // UR start or first occlusion
    bool no_match_fallback = false;
};

struct MetricsReport {
    Condition condition = Condition::eliminated;
    int trials = 0;
    int ur_absent_trials = 0;
    double accuracy = 0.0;
    std::optional<double> fpr;          // undefined without UR-absent trials
    std::optional<double> velocity_mae; // over trials with v_true and v_hat
    int fallback_confirms = 0;
    std::vector<std::pair<double, double>> cdf_points; // time-to-verdict CDF
};

/// Run `trials` independent seeded trials of the scenario: simulate,
/// preprocess, detect, record. UR presence follows the schedule (a fair
/// coin by default). Deterministic for a given seed.
std::vector<TrialOutcome> run_scenario(const Scenario& sc, const VelocityProfileDB& db,
                                       const DetectorConfig& cfg, std::uint64_t seed);

MetricsReport compute_metrics(const std::vector<TrialOutcome>& outcomes,
                              Condition condition);

struct VelocityPointReport {
    double v = 0.0;
    int trials = 0;
    int hits = 0; // |v_hat - v| <= 0.02 (+eps)
    double mae = 0.0;
    int unmatched = 0;
};

struct VelocityAccuracyReport {
    std::vector<VelocityPointReport> points;
    double overall_hit_rate = 0.0;
    double overall_mae = 0.0;
};

/// Simulate crossings at each requested velocity and match them back
/// against the database.
VelocityAccuracyReport velocity_accuracy_experiment(const VelocityProfileDB& db,
                                                    const Scene& scene,
                                                    const SimConfig& sim_cfg,
                                                    const std::vector<double>& velocities,
                                                    int trials_per_v,
                                                    std::uint64_t seed = 99);

/// Per-trial line records with full-precision numerics; metrics recomputed
/// from a written file equal the in-run report exactly.
void write_trials(std::ostream& os, const std::vector<TrialOutcome>& outcomes);
void write_trials_file(const std::string& path, const std::vector<TrialOutcome>& outcomes);
std::vector<TrialOutcome> read_trials(std::istream& is);
std::vector<TrialOutcome> read_trials_file(const std::string& path);

void write_report(std::ostream& os, const MetricsReport& report,
                  const std::vector<TrialOutcome>& outcomes);
void write_report_file(const std::string& path, const MetricsReport& report,
                       const std::vector<TrialOutcome>& outcomes);

/// Two-column plot-ready CDF data.
void write_cdf(std::ostream& os, const MetricsReport& report);
void write_cdf_file(const std::string& path, const MetricsReport& report);

void write_velocity_report(std::ostream& os, const VelocityAccuracyReport& report);
void write_velocity_report_file(const std::string& path, const VelocityAccuracyReport& report);

} // namespace rfgate
