#pragma once

#include "rfgate/detector.hpp"
#include "rfgate/harness.hpp"

#include <map>
#include <string>
#include <vector>

namespace rfgate {

/// Every tunable of the simulator, preprocessing, velocity database,
/// detector, and scenario runner, bound to flat `key = value` text
/// (`#` comments). The CLI exposes each key as a long flag of the same
/// name.
struct RunConfig {
    // scene
    double d_door = 2.0;
    int tag_count = 5;
    double d_set = 0.25;
    double board_distance = 1.0;
    double board_center_x = 1.0;
    double l_tag = 0.0;
    // simulator
    double agg_rate = 30.0;
    double noise_sigma = 0.5;
    double tx_power_dbm = -45.0;
    double carrier_freq = 920.625e6;
    double p_ur_loss = 0.3;
    double ur_active_from = -1.0; // < 0 disables the unauthorized reader
    double block_atten_db = 15.0;
    double block_loss_prob = 0.6;
    double ramp = 0.1;
    std::uint64_t seed = 1;
    double duration = 20.0;
    // standalone crossing for `simulate`
    bool obj_present = false;
    double obj_l_h = 0.5;
    double obj_d_h = 0.3;
    double obj_v = 1.0;
    double obj_t_enter = 9.0;
    double obj_path_offset = 0.0;
    // preprocessing
    int ma_window = 5;
    double grid_rate = 100.0;
    bool filter_first = true;
    // velocity database
    double v_min = 0.10;
    double v_max = 2.00;
    double v_step = 0.02;
    int db_trials = 200;
    double dip_min_depth_db = 4.0;
    double dip_pad = 0.5;
    double min_score = 0.6;
    double min_overlap_frac = 0.5;
    // detector
    double base_window = 2.0;
    double asti_threshold = 0.3;
    int k_consecutive = 3;
    double rssi_gate = 0.05;
    double baseline_len = 5.0;
    std::string gate_scope = "alarmed";
    double max_dip_wait = 10.0;
    // scenario
    std::string condition = "eliminated";
    int trials = 500;
    double v_lo = 0.5;
    double v_hi = 1.5;
    double offset_lo = -0.2;
    double offset_hi = 0.2;
    double t_enter_base = 9.0;
    double t_enter_jitter = 1.0;
    double ur_start = 8.0;
    std::string ur_schedule = "coin";

    Scene scene() const;
    SimConfig sim_config() const;
    PreprocessConfig preprocess_config() const;
    DbBuildOptions db_build_options() const;
    MatchConfig match_config() const;
    DetectorConfig detector_config() const;
    Scenario scenario() const;
};

/// Key registry, in file order. Values render with full precision so a
/// round-tripped config is byte-stable.
std::vector<std::string> config_keys();
std::string get_config_value(const RunConfig& cfg, const std::string& key);
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(std::istream& is, RunConfig base = {});
RunConfig parse_config_file(const std::string& path, RunConfig base = {});
void write_config(std::ostream& os, const RunConfig& cfg);

} // namespace rfgate
