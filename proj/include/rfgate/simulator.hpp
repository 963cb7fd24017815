#pragma once

#include "rfgate/geometry.hpp"
#include "rfgate/series.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rfgate {

/// One reader observation.
struct TagRead {
    std::string tag_id;
    double t = 0.0;    // s
    double rssi = 0.0; // dBm
};

struct PathComponent {
    double rho = 0.0;   // linear amplitude, >= 0
    double theta = 0.0; // phase (rad)
    double tau = 0.0;   // arrival delay (s), >= 0
};

/// Superposition channel; component 0 is the line-of-sight path and
/// dominates the reflections in the unblocked state.
struct ChannelState {
    std::vector<PathComponent> components;
    double carrier_freq = 920.625e6;

    void validate() const;
};

struct SimConfig {
    Scene scene = Scene::standard_doorway();
    double agg_rate = 30.0;    // aggregate poll rate over all tags (Hz)
    double noise_sigma = 0.5;  // RSSI noise std (dB)
    double tx_power_dbm = -45.0;
    double carrier_freq = 920.625e6;
    std::optional<double> ur_active_from; // unauthorized reader start (s)
    double p_ur_loss = 0.3;      // per-poll loss probability under UR
    double block_atten_db = 15.0; // LOS attenuation while occluded
    double block_loss_prob = 0.6; // per-poll loss while fully occluded
    double ramp = 0.1;            // raised-cosine edge ramp (s)
    std::uint64_t seed = 1;
    double duration = 20.0; // s

    void validate() const;
};

/// Complex channel gain: sum over components of rho * e^{j theta} *
/// e^{-j 2 pi f tau}.
std::complex<double> channel_response(const ChannelState& ch, double f);

/// tx_power_dbm + 20 log10 |H|, floored at -120 dBm so a null channel stays
/// representable.
double rssi_of(const ChannelState& ch, double f, double tx_power_dbm);

/// Round-robin poll stream. Polls run at cfg.agg_rate across tags; a poll
/// is dropped with p_ur_loss once the unauthorized reader is active and
/// with block_loss_prob while the crossing object fully occludes that
/// tag's sight path. Occlusion also attenuates the LOS component by
/// block_atten_db with raised-cosine ramps centered on the window edges.
/// Identical (cfg, obj) gives a bit-identical stream.
std::vector<TagRead> simulate(const SimConfig& cfg,
                              const std::optional<MovingObject>& obj = {});

/// Inter-read intervals for one tag: sample i holds t_i - t_{i-1} stamped
/// at t_i. Needs at least two reads for the tag.
Series asti_series(const std::vector<TagRead>& reads, const std::string& tag_id);

/// RSSI samples for one tag.
Series rssi_series(const std::vector<TagRead>& reads, const std::string& tag_id);

/// Tag ids in first-appearance order.
std::vector<std::string> tag_ids(const std::vector<TagRead>& reads);

std::string tag_name(int index);

} // namespace rfgate
