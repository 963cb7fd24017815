// rfgate: doorway RFID unauthorized-reader monitor, desk-scale edition.
// Subcommands: simulate, build-db, detect, evaluate, velocity-test.

#include "rfgate/config.hpp"
#include "rfgate/detector.hpp"
#include "rfgate/harness.hpp"
#include "rfgate/trace_io.hpp"
#include "rfgate/util.hpp"
#include "rfgate/velocity.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using rfgate::RunConfig;

struct ConfigCli {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "flat key = value config file");
        for (const std::string& key : rfgate::config_keys()) {
            auto* opt = app->add_option(
                "--" + key, [this, key](const CLI::results_t& res) {
                    overrides[key] = res.at(0);
                    return true;
                },
                "override config key " + key);
            opt->type_name("VALUE");
            opt->expected(1);
        }
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = rfgate::parse_config_file(config_path, cfg);
        for (const auto& [key, value] : overrides)
            rfgate::set_config_value(cfg, key, value);
        return cfg;
    }
};

int run_simulate(const ConfigCli& cc, const std::string& out_path) {
    const RunConfig cfg = cc.resolve();
    std::optional<rfgate::MovingObject> obj;
    if (cfg.obj_present)
        obj = rfgate::MovingObject{cfg.obj_l_h, cfg.obj_d_h, cfg.obj_v,
                                   cfg.obj_t_enter, cfg.obj_path_offset};
    const auto reads = rfgate::simulate(cfg.sim_config(), obj);
    rfgate::write_trace_file(out_path, reads);
    std::cerr << "wrote " << reads.size() << " reads to " << out_path << "\n";
    return 0;
}

int run_build_db(const ConfigCli& cc, const std::string& out_path) {
    const RunConfig cfg = cc.resolve();
    const auto db = rfgate::build_database(cfg.scene(), cfg.sim_config(), cfg.v_min,
                                           cfg.v_max, cfg.v_step, cfg.db_trials,
                                           cfg.db_build_options());
    rfgate::write_database_file(out_path, db);
    std::cerr << "wrote " << db.profiles.size() << " profiles to " << out_path << "\n";
    return 0;
}

int run_detect(const ConfigCli& cc, const std::string& trace_path,
               const std::string& db_path, const std::string& out_path) {
    const RunConfig cfg = cc.resolve();
    const auto reads = rfgate::read_trace_file(trace_path);
    const auto db = rfgate::read_database_file(db_path);
    const auto input = rfgate::build_detection_input(reads, cfg.preprocess_config());
    const auto events = rfgate::detect(input, db, cfg.scene(), cfg.detector_config());
    rfgate::write_alarm_log_file(out_path, events);
    bool confirmed = false;
    for (const auto& e : events)
        if (e.stage == rfgate::AlarmStage::ur_confirmed) confirmed = true;
    std::cerr << events.size() << " events, unauthorized reader "
              << (confirmed ? "CONFIRMED" : "not confirmed") << "\n";
    return 0;
}

int run_evaluate(const ConfigCli& cc, const std::string& db_path,
                 const std::string& report_path, const std::string& cdf_path,
                 const std::string& trials_path) {
    const RunConfig cfg = cc.resolve();
    const auto db = rfgate::read_database_file(db_path);
    const auto scenario = cfg.scenario();
    const auto outcomes =
        rfgate::run_scenario(scenario, db, cfg.detector_config(), cfg.seed);
    const auto report = rfgate::compute_metrics(outcomes, scenario.condition);
    rfgate::write_report_file(report_path, report, outcomes);
    if (!cdf_path.empty()) rfgate::write_cdf_file(cdf_path, report);
    if (!trials_path.empty()) rfgate::write_trials_file(trials_path, outcomes);
    std::cerr << "condition " << rfgate::to_string(report.condition) << ": accuracy "
              << report.accuracy << ", fpr "
              << (report.fpr ? rfgate::fmt_full(*report.fpr) : std::string("undefined"))
              << "\n";
    return 0;
}

int run_velocity_test(const ConfigCli& cc, const std::string& db_path,
                      const std::string& velocities_arg, int trials_per_v,
                      const std::string& out_path) {
    const RunConfig cfg = cc.resolve();
    const auto db = rfgate::read_database_file(db_path);
    std::vector<double> velocities;
    std::size_t start = 0;
    while (start <= velocities_arg.size() && !velocities_arg.empty()) {
        const auto pos = velocities_arg.find(',', start);
        const std::string tok = velocities_arg.substr(
            start, pos == std::string::npos ? std::string::npos : pos - start);
        if (!tok.empty()) velocities.push_back(std::stod(tok));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    const auto report = rfgate::velocity_accuracy_experiment(
        db, cfg.scene(), cfg.sim_config(), velocities, trials_per_v, cfg.seed);
    rfgate::write_velocity_report_file(out_path, report);
    std::cerr << "overall hit rate " << report.overall_hit_rate << ", mae "
              << report.overall_mae << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"doorway RFID unauthorized-reader detection toolkit"};
    app.require_subcommand(1);

    ConfigCli sim_cc, db_cc, det_cc, eval_cc, vel_cc;
    std::string sim_out = "trace.csv";
    std::string db_out = "velocity_db.txt";
    std::string det_trace, det_db, det_out = "alarms.csv";
    std::string eval_db, eval_report = "report.txt", eval_cdf, eval_trials;
    std::string vel_db, vel_list = "1.0", vel_out = "velocity_report.txt";
    int vel_trials = 10;

    auto* sim = app.add_subcommand("simulate", "emit a reader trace file");
    sim_cc.attach(sim);
    sim->add_option("--out", sim_out, "trace output path");

    auto* bdb = app.add_subcommand("build-db", "build the velocity profile database");
    db_cc.attach(bdb);
    bdb->add_option("--out", db_out, "database output path");

    auto* det = app.add_subcommand("detect", "run detection over a trace file");
    det_cc.attach(det);
    det->add_option("--trace", det_trace, "input trace file")->required();
    det->add_option("--db", det_db, "velocity database file")->required();
    det->add_option("--out", det_out, "alarm log output path");

    auto* ev = app.add_subcommand("evaluate", "run a scenario and report metrics");
    eval_cc.attach(ev);
    ev->add_option("--db", eval_db, "velocity database file")->required();
    ev->add_option("--out", eval_report, "metrics report output path");
    ev->add_option("--cdf-out", eval_cdf, "time-to-verdict CDF output path");
    ev->add_option("--trials-out", eval_trials, "per-trial record output path");

    auto* vt = app.add_subcommand("velocity-test", "velocity estimation accuracy");
    vel_cc.attach(vt);
    vt->add_option("--db", vel_db, "velocity database file")->required();
    vt->add_option("--velocities", vel_list, "comma-separated velocities (m/s)");
    vt->add_option("--trials-per-v", vel_trials, "trials per velocity");
    vt->add_option("--out", vel_out, "report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_cc, sim_out);
        if (bdb->parsed()) return run_build_db(db_cc, db_out);
        if (det->parsed()) return run_detect(det_cc, det_trace, det_db, det_out);
        if (ev->parsed())
            return run_evaluate(eval_cc, eval_db, eval_report, eval_cdf, eval_trials);
        if (vt->parsed())
            return run_velocity_test(vel_cc, vel_db, vel_list, vel_trials, vel_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
