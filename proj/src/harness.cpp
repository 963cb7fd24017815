#include "rfgate/harness.hpp"

#include "rfgate/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rfgate {

Condition condition_from_string(const std::string& s) {
    if (s == "free") return Condition::free;
    if (s == "interference") return Condition::interference;
    if (s == "eliminated") return Condition::eliminated;
    throw std::invalid_argument("unknown condition: " + s);
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::free: return "free";
        case Condition::interference: return "interference";
        case Condition::eliminated: return "eliminated";
    }
    return "unknown";
}

UrSchedule ur_schedule_from_string(const std::string& s) {
    if (s == "coin") return UrSchedule::coin;
    if (s == "all_on") return UrSchedule::all_on;
    if (s == "all_off") return UrSchedule::all_off;
    throw std::invalid_argument("unknown ur schedule: " + s);
}

std::string to_string(UrSchedule s) {
    switch (s) {
        case UrSchedule::coin: return "coin";
        case UrSchedule::all_on: return "all_on";
        case UrSchedule::all_off: return "all_off";
    }
    return "unknown";
}

void Scenario::validate() const {
    sim.validate();
    if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
    if (!(v_lo > 0.0 && v_hi >= v_lo))
        throw std::invalid_argument("scenario: bad velocity range");
    if (offset_hi < offset_lo)
        throw std::invalid_argument("scenario: bad offset range");
    if (t_enter_jitter < 0.0)
        throw std::invalid_argument("scenario: t_enter_jitter must be >= 0");
}

std::vector<TrialOutcome> run_scenario(const Scenario& sc, const VelocityProfileDB& db,
                                       const DetectorConfig& cfg, std::uint64_t seed) {
    sc.validate();
    cfg.validate();
    if (sc.sim.scene.digest() != db.scene_digest)
        throw std::runtime_error("run_scenario: velocity database scene digest mismatch");

    DetectorConfig det = cfg;
    det.elimination_enabled = sc.condition != Condition::interference;

    std::vector<TrialOutcome> outcomes;
    outcomes.reserve(static_cast<std::size_t>(sc.trials));
    for (int trial = 0; trial < sc.trials; ++trial) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        TrialOutcome out;
        out.trial_id = trial;
        switch (sc.ur_schedule) {
            case UrSchedule::coin: out.ground_truth_ur = uni(rng) < 0.5; break;
            case UrSchedule::all_on: out.ground_truth_ur = true; break;
            case UrSchedule::all_off: out.ground_truth_ur = false; break;
        }

        SimConfig sim = sc.sim;
        sim.seed = mix_seed(seed, 0x5CE00ULL + static_cast<std::uint64_t>(trial));
        if (out.ground_truth_ur)
            sim.ur_active_from = sc.ur_start;
        else
            sim.ur_active_from.reset();

        std::optional<MovingObject> obj;
        if (sc.condition != Condition::free) {
            MovingObject o;
            o.l_h = sc.obj_l_h;
            o.d_h = sc.obj_d_h;
            o.v = sc.v_lo + (sc.v_hi - sc.v_lo) * uni(rng);
            o.path_offset = sc.offset_lo + (sc.offset_hi - sc.offset_lo) * uni(rng);
            o.t_enter = sc.t_enter_base + sc.t_enter_jitter * (2.0 * uni(rng) - 1.0);
            obj = o;
            out.v_true = o.v;
        }

        const auto reads = simulate(sim, obj);
        const DetectionInput input = build_detection_input(reads, sc.preprocess);
        out.events = detect(input, db, sim.scene, det);

        for (const AlarmEvent& e : out.events) {
            if (e.stage == AlarmStage::ur_confirmed) {
                out.verdict_ur = true;
                out.t_verdict = e.t;
                out.no_match_fallback = e.no_match_fallback;
                break;
            }
        }
        if (!out.verdict_ur) {
            // Decisive moment of a negative verdict: the last cleared event.
            for (auto it = out.events.rbegin(); it != out.events.rend(); ++it) {
                if (it->stage == AlarmStage::cleared) {
                    out.t_verdict = it->t;
                    break;
                }
            }
        }
        for (const AlarmEvent& e : out.events) {
            if (e.v_hat) {
                out.v_hat = e.v_hat;
                break;
            }
        }
        if (out.ground_truth_ur) {
            out.t_stimulus = sc.ur_start;
        } else if (obj) {
            const auto wins = occlusion_windows(sim.scene, *obj);
            double first = std::numeric_limits<double>::infinity();
            for (const OcclusionWindow& w : wins)
                if (w.blocked()) first = std::min(first, w.t_start);
            if (std::isfinite(first)) out.t_stimulus = first;
        }
        outcomes.push_back(std::move(out));
    }
    std::sort(outcomes.begin(), outcomes.end(),
              [](const TrialOutcome& a, const TrialOutcome& b) { return a.trial_id < b.trial_id; });
    return outcomes;
}

MetricsReport compute_metrics(const std::vector<TrialOutcome>& outcomes,
                              Condition condition) {
    if (outcomes.empty())
        throw std::invalid_argument("compute_metrics: no outcomes");
    MetricsReport rep;
    rep.condition = condition;
    rep.trials = static_cast<int>(outcomes.size());

    int correct = 0, false_alarms = 0, ur_absent = 0;
    double mae_acc = 0.0;
    int mae_n = 0;
    std::vector<double> verdict_times;
    for (const TrialOutcome& o : outcomes) {
        if (o.verdict_ur == o.ground_truth_ur) ++correct;
        if (!o.ground_truth_ur) {
            ++ur_absent;
            if (o.verdict_ur) ++false_alarms;
        }
        if (o.v_true && o.v_hat) {
            mae_acc += std::abs(*o.v_true - *o.v_hat);
            ++mae_n;
        }
        if (o.no_match_fallback) ++rep.fallback_confirms;
        if (o.t_verdict && o.t_stimulus) verdict_times.push_back(*o.t_verdict - *o.t_stimulus);
    }
    rep.ur_absent_trials = ur_absent;
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.trials);
    if (ur_absent > 0)
        rep.fpr = static_cast<double>(false_alarms) / static_cast<double>(ur_absent);
    if (mae_n > 0) rep.velocity_mae = mae_acc / static_cast<double>(mae_n);

    std::sort(verdict_times.begin(), verdict_times.end());
    rep.cdf_points.reserve(verdict_times.size());
    const auto n = static_cast<double>(verdict_times.size());
    for (std::size_t i = 0; i < verdict_times.size(); ++i)
        rep.cdf_points.emplace_back(verdict_times[i], static_cast<double>(i + 1) / n);
    return rep;
}

VelocityAccuracyReport velocity_accuracy_experiment(const VelocityProfileDB& db,
                                                    const Scene& scene,
                                                    const SimConfig& sim_cfg,
                                                    const std::vector<double>& velocities,
                                                    int trials_per_v,
                                                    std::uint64_t seed) {
    if (velocities.empty())
        throw std::invalid_argument("velocity experiment: empty velocity list");
    if (trials_per_v < 1)
        throw std::invalid_argument("velocity experiment: trials_per_v must be >= 1");
    for (double v : velocities)
        if (v < db.v_min - 1e-9 || v > db.v_max + 1e-9)
            throw std::invalid_argument("velocity experiment: v outside database range: " +
                                        fmt_full(v));
    if (scene.digest() != db.scene_digest)
        throw std::runtime_error("velocity experiment: database scene digest mismatch");

    const int ref = scene.reference_tag();
    PreprocessConfig pre;
    pre.grid_rate = db.grid_rate;

    VelocityAccuracyReport rep;
    double mae_acc = 0.0;
    int mae_n = 0, hits = 0, total = 0;
    for (std::size_t vi = 0; vi < velocities.size(); ++vi) {
        VelocityPointReport point;
        point.v = velocities[vi];
        point.trials = trials_per_v;
        double point_mae = 0.0;
        int point_n = 0;
        for (int k = 0; k < trials_per_v; ++k) {
            MovingObject obj{db.dummy_l_h, db.dummy_d_h, point.v, 2.0, 0.0};
            const auto wins = occlusion_windows(scene, obj);
            const OcclusionWindow& w = wins[static_cast<std::size_t>(ref)];
            SimConfig sim = sim_cfg;
            sim.scene = scene;
            sim.ur_active_from.reset();
            sim.duration = w.t_end + (w.t_end - w.t_start) + 2.0;
            sim.seed = mix_seed(seed, vi * 7919ULL + static_cast<std::uint64_t>(k));

            const auto reads = simulate(sim, obj);
            const Series rssi = preprocess(rssi_series(reads, tag_name(ref)), pre);
            const VelocityMatch m = match_velocity(db, rssi);
            ++total;
            if (!m.matched) {
                ++point.unmatched;
                continue;
            }
            const double err = std::abs(m.v_hat - point.v);
            point_mae += err;
            ++point_n;
            if (err <= 0.02 + 1e-9) {
                ++point.hits;
                ++hits;
            }
        }
        point.mae = point_n > 0 ? point_mae / point_n : 0.0;
        mae_acc += point_mae;
        mae_n += point_n;
        rep.points.push_back(point);
    }
    rep.overall_hit_rate = total > 0 ? static_cast<double>(hits) / total : 0.0;
    rep.overall_mae = mae_n > 0 ? mae_acc / mae_n : 0.0;
    return rep;
}

namespace {

std::string opt_full(const std::optional<double>& v) {
    return v ? fmt_full(*v) : std::string();
}

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace

void write_trials(std::ostream& os, const std::vector<TrialOutcome>& outcomes) {
    os << "trial,gt_ur,verdict_ur,v_true,v_hat,t_verdict,t_stimulus,fallback\n";
    for (const TrialOutcome& o : outcomes) {
        os << o.trial_id << ',' << (o.ground_truth_ur ? 1 : 0) << ','
           << (o.verdict_ur ? 1 : 0) << ',' << opt_full(o.v_true) << ','
           << opt_full(o.v_hat) << ',' << opt_full(o.t_verdict) << ','
           << opt_full(o.t_stimulus) << ',' << (o.no_match_fallback ? 1 : 0) << '\n';
    }
}

void write_trials_file(const std::string& path, const std::vector<TrialOutcome>& outcomes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open trials file for writing: " + path);
    write_trials(os, outcomes);
    if (!os.good()) throw std::runtime_error("trials write failed: " + path);
}

std::vector<TrialOutcome> read_trials(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) ||
        line != "trial,gt_ur,verdict_ur,v_true,v_hat,t_verdict,t_stimulus,fallback")
        throw std::runtime_error("trials: missing or malformed header");
    std::vector<TrialOutcome> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 8) throw std::runtime_error("trials: bad record: " + line);
        TrialOutcome o;
        o.trial_id = std::stoi(f[0]);
        o.ground_truth_ur = f[1] == "1";
        o.verdict_ur = f[2] == "1";
        o.v_true = parse_opt(f[3]);
        o.v_hat = parse_opt(f[4]);
        o.t_verdict = parse_opt(f[5]);
        o.t_stimulus = parse_opt(f[6]);
        o.no_match_fallback = f[7] == "1";
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<TrialOutcome> read_trials_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open trials file: " + path);
    return read_trials(is);
}

void write_report(std::ostream& os, const MetricsReport& report,
                  const std::vector<TrialOutcome>& outcomes) {
    os << "# rfgate evaluation report\n";
    write_trials(os, outcomes);
    os << "[summary]\n";
    os << "condition = " << to_string(report.condition) << "\n";
    os << "trials = " << report.trials << "\n";
    os << "ur_absent_trials = " << report.ur_absent_trials << "\n";
    os << "accuracy = " << fmt_full(report.accuracy) << "\n";
    os << "fpr = " << (report.fpr ? fmt_full(*report.fpr) : std::string("undefined")) << "\n";
    os << "velocity_mae = "
       << (report.velocity_mae ? fmt_full(*report.velocity_mae) : std::string("undefined"))
       << "\n";
    os << "fallback_confirms = " << report.fallback_confirms << "\n";
}

void write_report_file(const std::string& path, const MetricsReport& report,
                       const std::vector<TrialOutcome>& outcomes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open report file for writing: " + path);
    write_report(os, report, outcomes);
    if (!os.good()) throw std::runtime_error("report write failed: " + path);
}

void write_cdf(std::ostream& os, const MetricsReport& report) {
    os << "# time_to_verdict cdf\n";
    for (const auto& [x, fx] : report.cdf_points)
        os << fmt_full(x) << ' ' << fmt_full(fx) << '\n';
}

void write_cdf_file(const std::string& path, const MetricsReport& report) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open cdf file for writing: " + path);
    write_cdf(os, report);
    if (!os.good()) throw std::runtime_error("cdf write failed: " + path);
}

void write_velocity_report(std::ostream& os, const VelocityAccuracyReport& report) {
    os << "v,trials,hits,hit_rate,mae,unmatched\n";
    for (const VelocityPointReport& p : report.points) {
        os << fmt_full(p.v) << ',' << p.trials << ',' << p.hits << ','
           << fmt_full(p.trials > 0 ? static_cast<double>(p.hits) / p.trials : 0.0) << ','
           << fmt_full(p.mae) << ',' << p.unmatched << '\n';
    }
    os << "[summary]\n";
    os << "overall_hit_rate = " << fmt_full(report.overall_hit_rate) << "\n";
    os << "overall_mae = " << fmt_full(report.overall_mae) << "\n";
}

void write_velocity_report_file(const std::string& path,
                                const VelocityAccuracyReport& report) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open velocity report for writing: " + path);
    write_velocity_report(os, report);
    if (!os.good()) throw std::runtime_error("velocity report write failed: " + path);
}

} // namespace rfgate
