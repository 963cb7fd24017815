#include "rfgate/detector.hpp"

#include "rfgate/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rfgate {

void DetectorConfig::validate() const {
    if (!(base_window > 0.0))
        throw std::invalid_argument("detector: base_window must be > 0");
    if (!(asti_threshold > 0.0))
        throw std::invalid_argument("detector: asti_threshold must be > 0");
    if (k_consecutive < 1)
        throw std::invalid_argument("detector: k_consecutive must be >= 1");
    if (!(rssi_gate > 0.0 && rssi_gate < 1.0))
        throw std::invalid_argument("detector: rssi_gate must be in (0,1)");
    if (!(baseline_len > 0.0))
        throw std::invalid_argument("detector: baseline_len must be > 0");
    if (max_dip_wait < 0.0)
        throw std::invalid_argument("detector: max_dip_wait must be >= 0");
}

std::string to_string(AlarmStage s) {
    switch (s) {
        case AlarmStage::raw_alarm: return "raw_alarm";
        case AlarmStage::gated_blocking: return "gated_blocking";
        case AlarmStage::window_extended: return "window_extended";
        case AlarmStage::ur_confirmed: return "ur_confirmed";
        case AlarmStage::cleared: return "cleared";
    }
    return "unknown";
}

DetectionInput build_detection_input(const std::vector<TagRead>& reads,
                                     const PreprocessConfig& cfg) {
    DetectionInput input;
    input.grid_rate = cfg.grid_rate;
    input.tags = tag_ids(reads);
    if (input.tags.empty())
        throw std::invalid_argument("detection input: empty trace");
    for (const std::string& id : input.tags) {
        input.rssi.push_back(preprocess(rssi_series(reads, id), cfg));
        input.asti.push_back(preprocess(asti_series(reads, id), cfg));
    }
    return input;
}

namespace {

constexpr double kTimeEps = 1e-9;

struct BaselineStats {
    double mean = 0.0;
    bool ready = false;
};

// Uniform series with prefix sums; O(1) window means inside detect().
struct GridSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t n = 0;
    std::vector<double> prefix;

    static GridSeries make(const Series& s, double grid_rate) {
        GridSeries g;
        g.n = s.size();
        g.dt = 1.0 / grid_rate;
        g.t0 = s.t.empty() ? 0.0 : s.t.front();
        g.prefix.assign(g.n + 1, 0.0);
        for (std::size_t i = 0; i < g.n; ++i) g.prefix[i + 1] = g.prefix[i] + s.y[i];
        return g;
    }

    double t_last() const { return t0 + static_cast<double>(n - 1) * dt; }

    std::optional<double> mean(double lo_t, double hi_t) const {
        if (n == 0) return std::nullopt;
        auto lo = static_cast<long>(std::ceil((lo_t - t0) / dt - kTimeEps));
        auto hi = static_cast<long>(std::floor((hi_t - t0) / dt + kTimeEps));
        lo = std::max(lo, 0L);
        hi = std::min(hi, static_cast<long>(n) - 1);
        if (hi < lo) return std::nullopt;
        const double sum = prefix[static_cast<std::size_t>(hi) + 1] -
                           prefix[static_cast<std::size_t>(lo)];
        return sum / static_cast<double>(hi - lo + 1);
    }
};

std::optional<double> change_rate_scan(const Series& s, const DetectorConfig& cfg,
                                       double t_now, bool abs_denominator) {
    s.validate();
    if (s.empty()) return std::nullopt;
    const double t0 = s.t.front();
    if (t_now - cfg.base_window < t0 + cfg.baseline_len - kTimeEps)
        return std::nullopt; // not enough history yet
    if (t_now > s.t.back() + kTimeEps) return std::nullopt;
    double base_mean, win_mean;
    try {
        base_mean = series_mean_between(s, t0, t0 + cfg.baseline_len);
        win_mean = series_mean_between(s, t_now - cfg.base_window, t_now);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    const double denom = abs_denominator ? std::abs(base_mean) : base_mean;
    if (std::abs(denom) < 1e-12)
        throw std::domain_error("change rate: zero baseline mean");
    return std::abs(win_mean - base_mean) / denom;
}

} // namespace

std::optional<double> asti_change_rate(const Series& asti, const DetectorConfig& cfg,
                                       double t_now) {
    cfg.validate();
    return change_rate_scan(asti, cfg, t_now, false);
}

std::optional<double> rssi_change_rate(const Series& rssi, const DetectorConfig& cfg,
                                       double t_now) {
    cfg.validate();
    return change_rate_scan(rssi, cfg, t_now, true);
}

std::optional<double> extended_change_rate(const Series& asti, const DetectorConfig& cfg,
                                           double t_gate, double t_in) {
    cfg.validate();
    asti.validate();
    if (asti.empty()) return std::nullopt;
    const double t0 = asti.t.front();
    const double lo = t_gate + t_in;
    const double hi = std::min(lo + cfg.base_window, asti.t.back());
    if (hi <= lo) return std::nullopt;
    double base_mean, win_mean;
    try {
        base_mean = series_mean_between(asti, t0, t0 + cfg.baseline_len);
        win_mean = series_mean_between(asti, lo, hi);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    if (std::abs(base_mean) < 1e-12)
        throw std::domain_error("extended change rate: zero baseline mean");
    return std::abs(win_mean - base_mean) / base_mean;
}

std::vector<AlarmEvent> detect(const DetectionInput& input, const VelocityProfileDB& db,
                               const Scene& scene, const DetectorConfig& cfg) {
    cfg.validate();
    scene.validate();
    const std::size_t ntags = input.tags.size();
    if (ntags == 0 || input.rssi.size() != ntags || input.asti.size() != ntags)
        throw std::invalid_argument("detect: malformed input bundle");
    if (scene.digest() != db.scene_digest)
        throw std::runtime_error("detect: velocity database was built for a different scene");

    std::vector<GridSeries> asti_g, rssi_g;
    asti_g.reserve(ntags);
    rssi_g.reserve(ntags);
    double t_max = 0.0;
    for (std::size_t i = 0; i < ntags; ++i) {
        input.asti[i].validate();
        input.rssi[i].validate();
        asti_g.push_back(GridSeries::make(input.asti[i], input.grid_rate));
        rssi_g.push_back(GridSeries::make(input.rssi[i], input.grid_rate));
        t_max = std::max({t_max, asti_g.back().t_last(), rssi_g.back().t_last()});
    }

    auto baseline_of = [&](const GridSeries& g) {
        BaselineStats b;
        const auto m = g.mean(g.t0, g.t0 + cfg.baseline_len);
        if (m) {
            b.mean = *m;
            b.ready = true;
        }
        return b;
    };
    std::vector<BaselineStats> asti_base, rssi_base;
    for (std::size_t i = 0; i < ntags; ++i) {
        asti_base.push_back(baseline_of(asti_g[i]));
        rssi_base.push_back(baseline_of(rssi_g[i]));
    }

    auto asti_rate = [&](std::size_t tag, double t) -> std::optional<double> {
        const GridSeries& g = asti_g[tag];
        if (!asti_base[tag].ready) return std::nullopt;
        if (t - cfg.base_window < g.t0 + cfg.baseline_len - kTimeEps) return std::nullopt;
        if (t > g.t_last() + kTimeEps) return std::nullopt;
        const auto m = g.mean(t - cfg.base_window, t);
        if (!m || std::abs(asti_base[tag].mean) < 1e-12) return std::nullopt;
        return std::abs(*m - asti_base[tag].mean) / asti_base[tag].mean;
    };
    auto rssi_rate = [&](std::size_t tag, double t) -> std::optional<double> {
        const GridSeries& g = rssi_g[tag];
        if (!rssi_base[tag].ready) return std::nullopt;
        const auto m = g.mean(t - cfg.base_window, t);
        if (!m || std::abs(rssi_base[tag].mean) < 1e-12) return std::nullopt;
        return std::abs(*m - rssi_base[tag].mean) / std::abs(rssi_base[tag].mean);
    };
    auto gate_rate = [&](std::size_t alarmed, double t) -> std::optional<double> {
        switch (cfg.gate_scope) {
            case GateScope::alarmed: return rssi_rate(alarmed, t);
            case GateScope::max_tag: {
                std::optional<double> best;
                for (std::size_t i = 0; i < ntags; ++i) {
                    const auto r = rssi_rate(i, t);
                    if (r && (!best || *r > *best)) best = r;
                }
                return best;
            }
            case GateScope::aggregate: {
                double acc = 0.0;
                std::size_t k = 0;
                for (std::size_t i = 0; i < ntags; ++i) {
                    const auto r = rssi_rate(i, t);
                    if (r) {
                        acc += *r;
                        ++k;
                    }
                }
                if (k == 0) return std::nullopt;
                return acc / static_cast<double>(k);
            }
        }
        return std::nullopt;
    };

    const double dtg = 1.0 / input.grid_rate;
    const auto n_steps = static_cast<std::size_t>(std::floor(t_max / dtg + kTimeEps)) + 1;

    enum class Mode { scanning, await_dip, extended, done };
    Mode mode = Mode::scanning;
    std::vector<int> consec(ntags, 0);
    std::vector<AlarmEvent> events;

    std::size_t alarmed = 0;
    double gate_t = 0.0;
    double wait_deadline = 0.0;
    double decision_t = 0.0;
    std::optional<double> v_hat;
    std::optional<double> t_in_est;
    double window_used = cfg.base_window;

    auto run_match = [&](double t) {
        // Match on the alarmed tag's trace so far; failure confirms
        // conservatively.
        const GridSeries& g = rssi_g[alarmed];
        const Series& full = input.rssi[alarmed];
        auto hi = static_cast<std::size_t>(
            std::clamp(std::floor((t - g.t0) / dtg + kTimeEps), 0.0,
                       static_cast<double>(g.n) - 1.0));
        Series sub;
        sub.t.assign(full.t.begin(), full.t.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        sub.y.assign(full.y.begin(), full.y.begin() + static_cast<std::ptrdiff_t>(hi) + 1);

        VelocityMatch m;
        bool angle_ok = true;
        try {
            m = match_velocity(db, sub, cfg.match);
            if (m.matched) {
                MovingObject ref{db.dummy_l_h, db.dummy_d_h, m.v_hat, 0.0, 0.0};
                const SightAngles ang = sight_angles(scene, static_cast<int>(alarmed));
                t_in_est = impact_time(
                    impact_distance(scene, ref, ang.theta_a, ang.theta_b), m.v_hat);
            }
        } catch (const std::invalid_argument&) {
            angle_ok = false;
        }
        if (m.matched && angle_ok) {
            v_hat = m.v_hat;
            window_used = cfg.base_window + *t_in_est;
            AlarmEvent ev{t, AlarmStage::window_extended, v_hat, t_in_est, window_used,
                          static_cast<int>(alarmed), false};
            events.push_back(ev);
            decision_t = gate_t + *t_in_est + cfg.base_window;
            mode = Mode::extended;
        } else {
            events.push_back({t, AlarmStage::window_extended, std::nullopt, std::nullopt,
                              cfg.base_window, static_cast<int>(alarmed), false});
            events.push_back({t, AlarmStage::ur_confirmed, std::nullopt, std::nullopt,
                              cfg.base_window, static_cast<int>(alarmed), true});
            mode = Mode::done;
        }
    };

    auto decide_extension = [&](double t) {
        std::optional<double> worst;
        for (std::size_t i = 0; i < ntags; ++i) {
            const auto r = extended_change_rate(input.asti[i], cfg, gate_t,
                                                t_in_est.value_or(0.0));
            if (r && (!worst || *r > *worst)) worst = r;
        }
        if (worst && *worst > cfg.asti_threshold) {
            events.push_back({t, AlarmStage::ur_confirmed, v_hat, t_in_est, window_used,
                              static_cast<int>(alarmed), false});
            mode = Mode::done;
        } else {
            events.push_back({t, AlarmStage::cleared, v_hat, t_in_est, window_used,
                              static_cast<int>(alarmed), false});
            std::fill(consec.begin(), consec.end(), 0);
            mode = Mode::scanning;
        }
    };

    for (std::size_t k = 0; k < n_steps && mode != Mode::done; ++k) {
        const double t = static_cast<double>(k) * dtg;
        const bool last_step = k + 1 == n_steps;

        if (mode == Mode::scanning) {
            for (std::size_t tag = 0; tag < ntags; ++tag) {
                const auto r = asti_rate(tag, t);
                if (r && *r > cfg.asti_threshold)
                    ++consec[tag];
                else
                    consec[tag] = 0;
            }
            std::size_t fired = ntags;
            for (std::size_t tag = 0; tag < ntags; ++tag) {
                if (consec[tag] >= cfg.k_consecutive) {
                    fired = tag;
                    break;
                }
            }
            if (fired == ntags) continue;

            alarmed = fired;
            events.push_back({t, AlarmStage::raw_alarm, std::nullopt, std::nullopt,
                              cfg.base_window, static_cast<int>(alarmed), false});
            if (!cfg.elimination_enabled) {
                events.push_back({t, AlarmStage::ur_confirmed, std::nullopt, std::nullopt,
                                  cfg.base_window, static_cast<int>(alarmed), false});
                mode = Mode::done;
                continue;
            }
            const auto gr = gate_rate(alarmed, t);
            if (!gr || *gr <= cfg.rssi_gate) {
                events.push_back({t, AlarmStage::ur_confirmed, std::nullopt, std::nullopt,
                                  cfg.base_window, static_cast<int>(alarmed), false});
                mode = Mode::done;
                continue;
            }
            events.push_back({t, AlarmStage::gated_blocking, std::nullopt, std::nullopt,
                              cfg.base_window, static_cast<int>(alarmed), false});
            gate_t = t;
            wait_deadline = t + cfg.max_dip_wait;
            v_hat.reset();
            t_in_est.reset();
            window_used = cfg.base_window;
            mode = Mode::await_dip;
            continue;
        }

        if (mode == Mode::await_dip) {
            const GridSeries& g = rssi_g[alarmed];
            const auto short_mean = g.mean(t - 0.3, t);
            const bool recovered = rssi_base[alarmed].ready && short_mean &&
                                   *short_mean > rssi_base[alarmed].mean - 1.5;
            if (recovered || t >= wait_deadline || last_step) run_match(t);
            continue;
        }

        if (mode == Mode::extended && (t >= decision_t || last_step)) decide_extension(t);
    }
    return events;
}

void write_alarm_log(std::ostream& os, const std::vector<AlarmEvent>& events) {
    os << "t,stage,v_hat,t_in,window_used\n";
    for (const AlarmEvent& e : events) {
        os << fmt_fixed(e.t, 6) << ',' << to_string(e.stage) << ',';
        if (e.v_hat) os << fmt_fixed(*e.v_hat, 6);
        os << ',';
        if (e.t_in) os << fmt_fixed(*e.t_in, 6);
        os << ',' << fmt_fixed(e.window_used, 6) << '\n';
    }
}

void write_alarm_log_file(const std::string& path, const std::vector<AlarmEvent>& events) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open alarm log for writing: " + path);
    write_alarm_log(os, events);
    if (!os.good()) throw std::runtime_error("alarm log write failed: " + path);
}

} // namespace rfgate
