#include "rfgate/velocity.hpp"

#include "rfgate/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace rfgate {

double pcc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pcc: length mismatch");
    if (x.size() < 2)
        throw std::invalid_argument("pcc: need at least two samples");
    // Streaming co-moments (Welford); the tests cross-check against a
    // plain two-pass computation.
    double mx = 0.0, my = 0.0, cxy = 0.0, cxx = 0.0, cyy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        mx += dx / n;
        my += dy / n;
        cxy += dx * (y[i] - my);
        cxx += dx * (x[i] - mx);
        cyy += dy * (y[i] - my);
    }
    if (cxx <= 0.0 || cyy <= 0.0)
        throw zero_variance_error("pcc: constant input");
    return cxy / std::sqrt(cxx * cyy);
}

std::vector<double> normalize(std::span<const double> y) {
    if (y.size() < 2)
        throw std::invalid_argument("normalize: need at least two samples");
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    if (var <= 0.0)
        throw zero_variance_error("normalize: constant input");
    const double inv = 1.0 / std::sqrt(var);
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i] - mean) * inv;
    return out;
}

std::optional<DipSegment> extract_dip(const Series& s, const DipConfig& cfg) {
    s.validate();
    const std::size_t n = s.size();
    if (n < 8) return std::nullopt;

    std::vector<double> sorted = s.y;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    const double baseline = sorted[n / 2];

    std::size_t i_min = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (s.y[i] < s.y[i_min]) i_min = i;
    const double depth = baseline - s.y[i_min];
    if (depth < cfg.min_depth_db) return std::nullopt;

    const double half_level = baseline - depth / 2.0;
    std::size_t left = i_min;
    while (left > 0 && s.y[left - 1] < half_level) --left;
    std::size_t right = i_min;
    while (right + 1 < n && s.y[right + 1] < half_level) ++right;
    if (right - left + 1 < 3) return std::nullopt;

    const std::size_t core_len = right - left + 1;
    const auto pad = static_cast<std::size_t>(std::lround(cfg.pad_frac * static_cast<double>(core_len)));
    const std::size_t w_lo = left > pad ? left - pad : 0;
    const std::size_t w_hi = std::min(n - 1, right + pad);

    DipSegment seg;
    seg.core_start = s.t[left];
    seg.core_end = s.t[right];
    seg.depth_db = depth;
    seg.window.t.assign(s.t.begin() + static_cast<std::ptrdiff_t>(w_lo),
                        s.t.begin() + static_cast<std::ptrdiff_t>(w_hi) + 1);
    seg.window.y.assign(s.y.begin() + static_cast<std::ptrdiff_t>(w_lo),
                        s.y.begin() + static_cast<std::ptrdiff_t>(w_hi) + 1);
    return seg;
}

namespace {

// Best Pearson score over all slide positions of tpl against obs with at
// least min_overlap aligned samples.
double best_alignment_score(const std::vector<double>& obs,
                            const std::vector<double>& tpl,
                            std::size_t min_overlap) {
    const auto n = static_cast<std::ptrdiff_t>(obs.size());
    const auto m = static_cast<std::ptrdiff_t>(tpl.size());
    const auto ov = static_cast<std::ptrdiff_t>(min_overlap);
    if (n < ov || m < ov) return -std::numeric_limits<double>::infinity();

    std::vector<double> po(obs.size() + 1, 0.0), po2(obs.size() + 1, 0.0);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        po[i + 1] = po[i] + obs[i];
        po2[i + 1] = po2[i] + obs[i] * obs[i];
    }
    std::vector<double> pt(tpl.size() + 1, 0.0), pt2(tpl.size() + 1, 0.0);
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        pt[i + 1] = pt[i] + tpl[i];
        pt2[i + 1] = pt2[i] + tpl[i] * tpl[i];
    }

    double best = -std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t d = ov - m; d <= n - ov; ++d) {
        const std::ptrdiff_t o_lo = std::max<std::ptrdiff_t>(0, d);
        const std::ptrdiff_t o_hi = std::min(n, d + m);
        const std::ptrdiff_t len = o_hi - o_lo;
        if (len < ov) continue;
        const std::ptrdiff_t t_lo = o_lo - d;

        double dot = 0.0;
        const double* o = obs.data() + o_lo;
        const double* p = tpl.data() + t_lo;
        for (std::ptrdiff_t i = 0; i < len; ++i) dot += o[i] * p[i];

        const double L = static_cast<double>(len);
        const double sx = po[static_cast<std::size_t>(o_hi)] - po[static_cast<std::size_t>(o_lo)];
        const double sx2 = po2[static_cast<std::size_t>(o_hi)] - po2[static_cast<std::size_t>(o_lo)];
        const double sy = pt[static_cast<std::size_t>(t_lo + len)] - pt[static_cast<std::size_t>(t_lo)];
        const double sy2 = pt2[static_cast<std::size_t>(t_lo + len)] - pt2[static_cast<std::size_t>(t_lo)];
        const double vx = L * sx2 - sx * sx;
        const double vy = L * sy2 - sy * sy;
        if (vx <= 0.0 || vy <= 0.0) continue; // flat overlap, skip candidate
        const double r = (L * dot - sx * sy) / std::sqrt(vx * vy);
        best = std::max(best, std::min(r, 1.0));
    }
    return best;
}

std::uint64_t build_config_digest(const SimConfig& sim, const DbBuildOptions& opt,
                                  double v_min, double v_max, double step, int trials) {
    std::string blob = "dbcfg/v1\n";
    for (double v : {sim.agg_rate, sim.noise_sigma, sim.tx_power_dbm, sim.carrier_freq,
                     sim.p_ur_loss, sim.block_atten_db, sim.block_loss_prob, sim.ramp,
                     opt.dummy_l_h, opt.dummy_d_h, opt.t_enter,
                     opt.preprocess.grid_rate, static_cast<double>(opt.preprocess.ma_window),
                     opt.dip.min_depth_db, opt.dip.pad_frac,
                     v_min, v_max, step, static_cast<double>(trials)})
        blob += fmt_full(v) + "\n";
    blob += std::to_string(sim.seed) + "\n";
    return fnv1a64(blob);
}

} // namespace

const VelocityProfile& VelocityProfileDB::nearest(double v) const {
    if (profiles.empty()) throw std::runtime_error("velocity db: empty");
    const VelocityProfile* best = &profiles.front();
    for (const VelocityProfile& p : profiles)
        if (std::abs(p.v - v) < std::abs(best->v - v)) best = &p;
    return *best;
}

VelocityProfileDB build_database(const Scene& scene, const SimConfig& sim_cfg,
                                 double v_min, double v_max, double step,
                                 int trials, const DbBuildOptions& opt) {
    scene.validate();
    if (!(v_min < v_max)) throw std::invalid_argument("build_database: v_min must be < v_max");
    if (!(step > 0.0)) throw std::invalid_argument("build_database: step must be > 0");
    if (trials < 1) throw std::invalid_argument("build_database: trials must be >= 1");

    VelocityProfileDB db;
    db.grid_rate = opt.preprocess.grid_rate;
    db.v_min = v_min;
    db.v_max = v_max;
    db.v_step = step;
    db.trials_per_velocity = trials;
    db.dummy_l_h = opt.dummy_l_h;
    db.dummy_d_h = opt.dummy_d_h;
    db.scene_digest = scene.digest();
    db.config_digest = build_config_digest(sim_cfg, opt, v_min, v_max, step, trials);

    // Millivelocity grid keeps the decimals exact across serialization.
    const auto mv_min = static_cast<long>(std::lround(v_min * 1000.0));
    const auto mv_step = static_cast<long>(std::lround(step * 1000.0));
    const auto mv_max = static_cast<long>(std::lround(v_max * 1000.0));
    const int ref = scene.reference_tag();

    for (int vi = 0;; ++vi) {
        const long mv = mv_min + static_cast<long>(vi) * mv_step;
        if (mv > mv_max) break;
        const double v = static_cast<double>(mv) / 1000.0;

        MovingObject dummy{opt.dummy_l_h, opt.dummy_d_h, v, opt.t_enter, 0.0};
        const auto wins = occlusion_windows(scene, dummy);
        const OcclusionWindow& w = wins[static_cast<std::size_t>(ref)];
        if (!w.blocked())
            throw std::runtime_error("build_database: reference tag never occluded");
        const double t_in = w.t_end - w.t_start;

        SimConfig cfg = sim_cfg;
        cfg.scene = scene;
        cfg.ur_active_from.reset();
        cfg.duration = w.t_end + t_in * (opt.dip.pad_frac + 0.5) + 2.0;

        // Aligned at the core midpoint; truncated to the common extent.
        std::vector<std::vector<double>> windows;
        std::vector<std::size_t> centers;
        int discarded = 0;
        for (int k = 0; k < trials; ++k) {
            cfg.seed = mix_seed(sim_cfg.seed, static_cast<std::uint64_t>(vi) * 1000003ULL +
                                                  static_cast<std::uint64_t>(k));
            const auto reads = simulate(cfg, dummy);
            const Series rssi = preprocess(rssi_series(reads, tag_name(ref)), opt.preprocess);
            const auto dip = extract_dip(rssi, opt.dip);
            if (!dip) {
                ++discarded;
                continue;
            }
            std::vector<double> norm;
            try {
                norm = normalize(dip->window.y);
            } catch (const zero_variance_error&) {
                ++discarded;
                continue;
            }
            const double mid = (dip->core_start + dip->core_end) / 2.0;
            const double dt = 1.0 / opt.preprocess.grid_rate;
            auto center = static_cast<std::size_t>(
                std::clamp(std::lround((mid - dip->window.t.front()) / dt), 0L,
                           static_cast<long>(norm.size()) - 1));
            windows.push_back(std::move(norm));
            centers.push_back(center);
        }
        if (windows.empty())
            throw std::runtime_error("build_database: all " + std::to_string(discarded) +
                                     " trials discarded at v = " + fmt_full(v));

        std::size_t left = std::numeric_limits<std::size_t>::max();
        std::size_t right = std::numeric_limits<std::size_t>::max();
        for (std::size_t k = 0; k < windows.size(); ++k) {
            left = std::min(left, centers[k]);
            right = std::min(right, windows[k].size() - centers[k]);
        }
        std::vector<double> avg(left + right, 0.0);
        for (std::size_t k = 0; k < windows.size(); ++k)
            for (std::size_t i = 0; i < avg.size(); ++i)
                avg[i] += windows[k][centers[k] - left + i];
        for (double& a : avg) a /= static_cast<double>(windows.size());

        VelocityProfile prof;
        prof.v = v;
        prof.template_series.y = normalize(avg);
        prof.template_series.t.resize(avg.size());
        for (std::size_t i = 0; i < avg.size(); ++i)
            prof.template_series.t[i] = static_cast<double>(i) / opt.preprocess.grid_rate;
        db.profiles.push_back(std::move(prof));
    }
    return db;
}

VelocityMatch match_velocity(const VelocityProfileDB& db, const Series& observed,
                             const MatchConfig& cfg) {
    if (db.profiles.empty()) throw std::runtime_error("match_velocity: empty database");
    observed.validate();
    if (observed.size() >= 2) {
        const double span = observed.t.back() - observed.t.front();
        const double dt = span / static_cast<double>(observed.size() - 1);
        if (std::abs(dt - 1.0 / db.grid_rate) > 1e-9)
            throw std::invalid_argument("match_velocity: observed series not on the database grid");
    }

    VelocityMatch out;
    const auto dip = extract_dip(observed, cfg.dip);
    if (!dip) return out;
    std::vector<double> obs;
    try {
        obs = normalize(dip->window.y);
    } catch (const zero_variance_error&) {
        throw std::invalid_argument("match_velocity: zero-variance dip segment");
    }

    double best = -std::numeric_limits<double>::infinity();
    double best_v = 0.0;
    for (const VelocityProfile& p : db.profiles) {
        const auto min_overlap = static_cast<std::size_t>(std::ceil(
            cfg.min_overlap_frac * static_cast<double>(p.template_series.size())));
        const double score =
            best_alignment_score(obs, p.template_series.y, std::max<std::size_t>(min_overlap, 2));
        if (score > best) {
            best = score;
            best_v = p.v;
        }
    }
    out.score = best;
    out.v_hat = best_v;
    out.matched = std::isfinite(best) && best >= cfg.min_score;
    return out;
}

void write_database(std::ostream& os, const VelocityProfileDB& db) {
    os << "rfgate-velocity-db v1\n";
    os << "grid_rate = " << fmt_full(db.grid_rate) << "\n";
    os << "v_min = " << fmt_full(db.v_min) << "\n";
    os << "v_max = " << fmt_full(db.v_max) << "\n";
    os << "v_step = " << fmt_full(db.v_step) << "\n";
    os << "trials_per_velocity = " << db.trials_per_velocity << "\n";
    os << "dummy_l_h = " << fmt_full(db.dummy_l_h) << "\n";
    os << "dummy_d_h = " << fmt_full(db.dummy_d_h) << "\n";
    char hexbuf[32];
    std::snprintf(hexbuf, sizeof(hexbuf), "%016llx",
                  static_cast<unsigned long long>(db.scene_digest));
    os << "scene_digest = " << hexbuf << "\n";
    std::snprintf(hexbuf, sizeof(hexbuf), "%016llx",
                  static_cast<unsigned long long>(db.config_digest));
    os << "config_digest = " << hexbuf << "\n";
    os << "profiles = " << db.profiles.size() << "\n";
    for (const VelocityProfile& p : db.profiles) {
        os << "v = " << fmt_full(p.v) << "\n";
        os << "samples = " << p.template_series.size() << "\n";
        for (double y : p.template_series.y) os << fmt_full(y) << "\n";
    }
}

void write_database_file(const std::string& path, const VelocityProfileDB& db) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open database file for writing: " + path);
    write_database(os, db);
    if (!os.good()) throw std::runtime_error("database write failed: " + path);
}

namespace {

std::string expect_key(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("velocity db: truncated file, expected " + key);
    const std::string prefix = key + " = ";
    if (line.rfind(prefix, 0) != 0)
        throw std::runtime_error("velocity db: expected key '" + key + "', got: " + line);
    return line.substr(prefix.size());
}

} // namespace

VelocityProfileDB read_database(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "rfgate-velocity-db v1")
        throw std::runtime_error("velocity db: bad magic");
    VelocityProfileDB db;
    db.grid_rate = std::stod(expect_key(is, "grid_rate"));
    db.v_min = std::stod(expect_key(is, "v_min"));
    db.v_max = std::stod(expect_key(is, "v_max"));
    db.v_step = std::stod(expect_key(is, "v_step"));
    db.trials_per_velocity = std::stoi(expect_key(is, "trials_per_velocity"));
    db.dummy_l_h = std::stod(expect_key(is, "dummy_l_h"));
    db.dummy_d_h = std::stod(expect_key(is, "dummy_d_h"));
    db.scene_digest = std::stoull(expect_key(is, "scene_digest"), nullptr, 16);
    db.config_digest = std::stoull(expect_key(is, "config_digest"), nullptr, 16);
    const auto nprof = static_cast<std::size_t>(std::stoul(expect_key(is, "profiles")));
    db.profiles.reserve(nprof);
    for (std::size_t i = 0; i < nprof; ++i) {
        VelocityProfile p;
        p.v = std::stod(expect_key(is, "v"));
        const auto ns = static_cast<std::size_t>(std::stoul(expect_key(is, "samples")));
        p.template_series.t.reserve(ns);
        p.template_series.y.reserve(ns);
        for (std::size_t k = 0; k < ns; ++k) {
            if (!std::getline(is, line))
                throw std::runtime_error("velocity db: truncated samples");
            p.template_series.y.push_back(std::stod(line));
            p.template_series.t.push_back(static_cast<double>(k) / db.grid_rate);
        }
        db.profiles.push_back(std::move(p));
    }
    return db;
}

VelocityProfileDB read_database_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open database file: " + path);
    return read_database(is);
}

} // namespace rfgate
