#include "rfgate/config.hpp"

#include "rfgate/util.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace rfgate {

namespace {

struct KeyBinding {
    std::string name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing junk in number: " + s);
    return v;
}

int to_int(const std::string& s) {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing junk in integer: " + s);
    return v;
}

std::uint64_t to_u64(const std::string& s) {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing junk in integer: " + s);
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("expected boolean (true/false): " + s);
}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> table = [] {
        std::vector<KeyBinding> b;
        auto dbl = [&b](const std::string& name, double RunConfig::* field) {
            b.push_back({name,
                         [field](const RunConfig& c) { return fmt_full(c.*field); },
                         [field](RunConfig& c, const std::string& v) { c.*field = to_double(v); }});
        };
        auto integer = [&b](const std::string& name, int RunConfig::* field) {
            b.push_back({name,
                         [field](const RunConfig& c) { return std::to_string(c.*field); },
                         [field](RunConfig& c, const std::string& v) { c.*field = to_int(v); }});
        };
        auto boolean = [&b](const std::string& name, bool RunConfig::* field) {
            b.push_back({name,
                         [field](const RunConfig& c) { return c.*field ? "true" : "false"; },
                         [field](RunConfig& c, const std::string& v) { c.*field = to_bool(v); }});
        };
        auto text = [&b](const std::string& name, std::string RunConfig::* field) {
            b.push_back({name,
                         [field](const RunConfig& c) { return c.*field; },
                         [field](RunConfig& c, const std::string& v) { c.*field = v; }});
        };

        dbl("d_door", &RunConfig::d_door);
        integer("tag_count", &RunConfig::tag_count);
        dbl("d_set", &RunConfig::d_set);
        dbl("board_distance", &RunConfig::board_distance);
        dbl("board_center_x", &RunConfig::board_center_x);
        dbl("l_tag", &RunConfig::l_tag);
        dbl("agg_rate", &RunConfig::agg_rate);
        dbl("noise_sigma", &RunConfig::noise_sigma);
        dbl("tx_power_dbm", &RunConfig::tx_power_dbm);
        dbl("carrier_freq", &RunConfig::carrier_freq);
        dbl("p_ur_loss", &RunConfig::p_ur_loss);
        dbl("ur_active_from", &RunConfig::ur_active_from);
        dbl("block_atten_db", &RunConfig::block_atten_db);
        dbl("block_loss_prob", &RunConfig::block_loss_prob);
        dbl("ramp", &RunConfig::ramp);
        b.push_back({"seed",
                     [](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); }});
        dbl("duration", &RunConfig::duration);
        boolean("obj_present", &RunConfig::obj_present);
        dbl("obj_l_h", &RunConfig::obj_l_h);
        dbl("obj_d_h", &RunConfig::obj_d_h);
        dbl("obj_v", &RunConfig::obj_v);
        dbl("obj_t_enter", &RunConfig::obj_t_enter);
        dbl("obj_path_offset", &RunConfig::obj_path_offset);
        integer("ma_window", &RunConfig::ma_window);
        dbl("grid_rate", &RunConfig::grid_rate);
        boolean("filter_first", &RunConfig::filter_first);
        dbl("v_min", &RunConfig::v_min);
        dbl("v_max", &RunConfig::v_max);
        dbl("v_step", &RunConfig::v_step);
        integer("db_trials", &RunConfig::db_trials);
        dbl("dip_min_depth_db", &RunConfig::dip_min_depth_db);
        dbl("dip_pad", &RunConfig::dip_pad);
        dbl("min_score", &RunConfig::min_score);
        dbl("min_overlap_frac", &RunConfig::min_overlap_frac);
        dbl("base_window", &RunConfig::base_window);
        dbl("asti_threshold", &RunConfig::asti_threshold);
        integer("k_consecutive", &RunConfig::k_consecutive);
        dbl("rssi_gate", &RunConfig::rssi_gate);
        dbl("baseline_len", &RunConfig::baseline_len);
        text("gate_scope", &RunConfig::gate_scope);
        dbl("max_dip_wait", &RunConfig::max_dip_wait);
        text("condition", &RunConfig::condition);
        integer("trials", &RunConfig::trials);
        dbl("v_lo", &RunConfig::v_lo);
        dbl("v_hi", &RunConfig::v_hi);
        dbl("offset_lo", &RunConfig::offset_lo);
        dbl("offset_hi", &RunConfig::offset_hi);
        dbl("t_enter_base", &RunConfig::t_enter_base);
        dbl("t_enter_jitter", &RunConfig::t_enter_jitter);
        dbl("ur_start", &RunConfig::ur_start);
        text("ur_schedule", &RunConfig::ur_schedule);
        return b;
    }();
    return table;
}

const KeyBinding& find_binding(const std::string& key) {
    for (const KeyBinding& b : bindings())
        if (b.name == key) return b;
    throw std::invalid_argument("unknown config key: " + key);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

Scene RunConfig::scene() const {
    Scene sc = Scene::standard_doorway(d_door, tag_count, d_set, board_distance,
                                       board_center_x);
    sc.l_tag = l_tag;
    return sc;
}

SimConfig RunConfig::sim_config() const {
    SimConfig sim;
    sim.scene = scene();
    sim.agg_rate = agg_rate;
    sim.noise_sigma = noise_sigma;
    sim.tx_power_dbm = tx_power_dbm;
    sim.carrier_freq = carrier_freq;
    sim.p_ur_loss = p_ur_loss;
    if (ur_active_from >= 0.0) sim.ur_active_from = ur_active_from;
    sim.block_atten_db = block_atten_db;
    sim.block_loss_prob = block_loss_prob;
    sim.ramp = ramp;
    sim.seed = seed;
    sim.duration = duration;
    return sim;
}

PreprocessConfig RunConfig::preprocess_config() const {
    PreprocessConfig pre;
    pre.ma_window = ma_window;
    pre.grid_rate = grid_rate;
    pre.filter_first = filter_first;
    return pre;
}

DbBuildOptions RunConfig::db_build_options() const {
    DbBuildOptions opt;
    opt.dummy_l_h = obj_l_h;
    opt.dummy_d_h = obj_d_h;
    opt.preprocess = preprocess_config();
    opt.dip.min_depth_db = dip_min_depth_db;
    opt.dip.pad_frac = dip_pad;
    return opt;
}

MatchConfig RunConfig::match_config() const {
    MatchConfig m;
    m.min_score = min_score;
    m.min_overlap_frac = min_overlap_frac;
    m.dip.min_depth_db = dip_min_depth_db;
    m.dip.pad_frac = dip_pad;
    return m;
}

DetectorConfig RunConfig::detector_config() const {
    DetectorConfig det;
    det.base_window = base_window;
    det.asti_threshold = asti_threshold;
    det.k_consecutive = k_consecutive;
    det.rssi_gate = rssi_gate;
    det.baseline_len = baseline_len;
    det.max_dip_wait = max_dip_wait;
    det.match = match_config();
    if (gate_scope == "alarmed")
        det.gate_scope = GateScope::alarmed;
    else if (gate_scope == "max")
        det.gate_scope = GateScope::max_tag;
    else if (gate_scope == "aggregate")
        det.gate_scope = GateScope::aggregate;
    else
        throw std::invalid_argument("gate_scope must be alarmed|max|aggregate");
    return det;
}

Scenario RunConfig::scenario() const {
    Scenario sc;
    sc.condition = condition_from_string(condition);
    sc.trials = trials;
    sc.sim = sim_config();
    sc.sim.ur_active_from.reset(); // the schedule decides per trial
    sc.preprocess = preprocess_config();
    sc.v_lo = v_lo;
    sc.v_hi = v_hi;
    sc.offset_lo = offset_lo;
    sc.offset_hi = offset_hi;
    sc.obj_l_h = obj_l_h;
    sc.obj_d_h = obj_d_h;
    sc.t_enter_base = t_enter_base;
    sc.t_enter_jitter = t_enter_jitter;
    sc.ur_start = ur_start;
    sc.ur_schedule = ur_schedule_from_string(ur_schedule);
    return sc;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    keys.reserve(bindings().size());
    for (const KeyBinding& b : bindings()) keys.push_back(b.name);
    return keys;
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) {
    return find_binding(key).get(cfg);
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    find_binding(key).set(cfg, value);
}

RunConfig parse_config(std::istream& is, RunConfig base) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: missing '=' at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            set_config_value(base, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(is, base);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
    for (const KeyBinding& b : bindings())
        os << b.name << " = " << b.get(cfg) << "\n";
}

} // namespace rfgate
