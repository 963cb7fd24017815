#include "rfgate/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rfgate {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kRssiFloor = -120.0;

// Raised-cosine occlusion envelope in [0,1]; ramps are centered on the
// window edges so the half-depth crossings land on t_start/t_end.
double occlusion_level(double t, const OcclusionWindow& w, double ramp) {
    if (!w.blocked()) return 0.0;
    if (ramp <= 0.0) return (t >= w.t_start && t <= w.t_end) ? 1.0 : 0.0;
    auto rise = [&](double edge) {
        if (t <= edge - ramp / 2.0) return 0.0;
        if (t >= edge + ramp / 2.0) return 1.0;
        return 0.5 * (1.0 - std::cos(kPi * (t - edge + ramp / 2.0) / ramp));
    };
    auto fall = [&](double edge) {
        if (t <= edge - ramp / 2.0) return 1.0;
        if (t >= edge + ramp / 2.0) return 0.0;
        return 0.5 * (1.0 + std::cos(kPi * (t - edge + ramp / 2.0) / ramp));
    };
    return std::min(rise(w.t_start), fall(w.t_end));
}

} // namespace

void ChannelState::validate() const {
    if (components.empty())
        throw std::invalid_argument("channel: needs at least one component");
    for (const PathComponent& c : components) {
        if (c.rho < 0.0) throw std::invalid_argument("channel: rho must be >= 0");
        if (c.tau < 0.0) throw std::invalid_argument("channel: tau must be >= 0");
    }
    for (std::size_t n = 1; n < components.size(); ++n)
        if (components[n].rho > components[0].rho)
            throw std::invalid_argument("channel: component 0 must dominate");
}

void SimConfig::validate() const {
    scene.validate();
    if (!(agg_rate > 0.0)) throw std::invalid_argument("sim: agg_rate must be > 0");
    if (noise_sigma < 0.0) throw std::invalid_argument("sim: noise_sigma must be >= 0");
    if (p_ur_loss < 0.0 || p_ur_loss >= 1.0)
        throw std::invalid_argument("sim: p_ur_loss must be in [0,1)");
    if (block_loss_prob < 0.0 || block_loss_prob >= 1.0)
        throw std::invalid_argument("sim: block_loss_prob must be in [0,1)");
    if (block_atten_db < 0.0)
        throw std::invalid_argument("sim: block_atten_db must be >= 0");
    if (ramp < 0.0) throw std::invalid_argument("sim: ramp must be >= 0");
    if (!(duration > 0.0)) throw std::invalid_argument("sim: duration must be > 0");
}

std::complex<double> channel_response(const ChannelState& ch, double f) {
    std::complex<double> h{0.0, 0.0};
    for (const PathComponent& c : ch.components)
        h += c.rho * std::polar(1.0, c.theta) * std::polar(1.0, -2.0 * kPi * f * c.tau);
    return h;
}

double rssi_of(const ChannelState& ch, double f, double tx_power_dbm) {
    const double mag = std::abs(channel_response(ch, f));
    if (mag <= 0.0) return kRssiFloor;
    return std::max(tx_power_dbm + 20.0 * std::log10(mag), kRssiFloor);
}

std::string tag_name(int index) { return "tag" + std::to_string(index); }

std::vector<TagRead> simulate(const SimConfig& cfg,
                              const std::optional<MovingObject>& obj) {
    cfg.validate();
    const int ntags = cfg.scene.tag_count();

    std::vector<OcclusionWindow> windows;
    if (obj) {
        windows = occlusion_windows(cfg.scene, *obj); // validates obj
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Static per-trial channel: LOS term plus three random reflections.
    struct TagChannel {
        std::complex<double> los;
        std::complex<double> reflections;
    };
    std::vector<TagChannel> channels(static_cast<std::size_t>(ntags));
    for (int i = 0; i < ntags; ++i) {
        const Vec2 tag = cfg.scene.tags[static_cast<std::size_t>(i)];
        const double dist = std::hypot(tag.x - cfg.scene.antenna.x,
                                       tag.y - cfg.scene.antenna.y);
        const double tau0 = dist / kSpeedOfLight;
        ChannelState ch;
        ch.carrier_freq = cfg.carrier_freq;
        ch.components.push_back({1.0, 0.0, tau0});
        for (int n = 0; n < 3; ++n) {
            const double rho = 0.05 + 0.15 * uni(rng);
            const double theta = 2.0 * kPi * uni(rng);
            const double tau = tau0 + (100e-9 - tau0) * uni(rng);
            ch.components.push_back({rho, theta, tau});
        }
        ChannelState los_only{{ch.components[0]}, cfg.carrier_freq};
        ChannelState refl_only{{ch.components.begin() + 1, ch.components.end()},
                               cfg.carrier_freq};
        channels[static_cast<std::size_t>(i)] = {
            channel_response(los_only, cfg.carrier_freq),
            channel_response(refl_only, cfg.carrier_freq)};
    }

    std::vector<TagRead> reads;
    reads.reserve(static_cast<std::size_t>(cfg.duration * cfg.agg_rate) + 1);
    for (std::uint64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) / cfg.agg_rate;
        if (t >= cfg.duration) break;
        const int tag = static_cast<int>(k % static_cast<std::uint64_t>(ntags));

        const double noise = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * gauss(rng) : 0.0;

        double level = 0.0;
        bool fully_blocked = false;
        if (obj) {
            const OcclusionWindow& w = windows[static_cast<std::size_t>(tag)];
            level = occlusion_level(t, w, cfg.ramp);
            fully_blocked = w.blocked() && t >= w.t_start && t <= w.t_end;
        }

        bool drop = false;
        if (cfg.ur_active_from && t >= *cfg.ur_active_from && uni(rng) < cfg.p_ur_loss)
            drop = true;
        if (fully_blocked && uni(rng) < cfg.block_loss_prob)
            drop = true;
        if (drop) continue;

        const TagChannel& tc = channels[static_cast<std::size_t>(tag)];
        const double atten = std::pow(10.0, -cfg.block_atten_db * level / 20.0);
        const double mag = std::abs(atten * tc.los + tc.reflections);
        double rssi = mag > 0.0
                          ? std::max(cfg.tx_power_dbm + 20.0 * std::log10(mag), kRssiFloor)
                          : kRssiFloor;
        rssi += noise;
        reads.push_back({tag_name(tag), t, rssi});
    }
    return reads;
}

Series asti_series(const std::vector<TagRead>& reads, const std::string& tag_id) {
    Series out;
    double prev = 0.0;
    bool have_prev = false;
    for (const TagRead& r : reads) {
        if (r.tag_id != tag_id) continue;
        if (have_prev) out.push_back(r.t, r.t - prev);
        prev = r.t;
        have_prev = true;
    }
    if (out.size() < 1)
        throw std::invalid_argument("asti_series: need at least two reads for tag " + tag_id);
    return out;
}

Series rssi_series(const std::vector<TagRead>& reads, const std::string& tag_id) {
    Series out;
    for (const TagRead& r : reads)
        if (r.tag_id == tag_id) out.push_back(r.t, r.rssi);
    return out;
}

std::vector<std::string> tag_ids(const std::vector<TagRead>& reads) {
    std::vector<std::string> ids;
    for (const TagRead& r : reads)
        if (std::find(ids.begin(), ids.end(), r.tag_id) == ids.end())
            ids.push_back(r.tag_id);
    return ids;
}

} // namespace rfgate
