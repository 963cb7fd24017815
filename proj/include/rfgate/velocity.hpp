#pragma once

#include "rfgate/geometry.hpp"
#include "rfgate/preprocess.hpp"
#include "rfgate/series.hpp"
#include "rfgate/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfgate {

/// Raised by pcc when an input has no variance; callers skip the candidate.
struct zero_variance_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Pearson correlation coefficient, cov(x,y) / (sigma_x sigma_y).
double pcc(std::span<const double> x, std::span<const double> y);

struct DipConfig {
    double min_depth_db = 4.0; // smaller excursions are not usable dips
    double pad_frac = 0.5;     // window padding on each side of the core
};

/// Dip segment: samples around the deepest excursion, padded by pad_frac of
/// the half-depth core width on each side, plus the core bounds themselves.
struct DipSegment {
    Series window;     // extracted, unnormalized
    double core_start; // half-depth crossing times
    double core_end;
    double depth_db;
};

/// Locate the deepest dip of a uniformly sampled series; nullopt when the
/// excursion is shallower than cfg.min_depth_db.
std::optional<DipSegment> extract_dip(const Series& s, const DipConfig& cfg = {});

/// Zero-mean unit-variance copy; throws zero_variance_error on flat input.
std::vector<double> normalize(std::span<const double> y);

struct VelocityProfile {
    double v = 0.0;
    Series template_series; // normalized dip on the database grid
};

struct VelocityProfileDB {
    std::vector<VelocityProfile> profiles; // ascending v
    double grid_rate = 100.0;
    double v_min = 0.10, v_max = 2.00, v_step = 0.02;
    int trials_per_velocity = 0;
    double dummy_l_h = 0.5, dummy_d_h = 0.3; // reference crossing dimensions
    std::uint64_t scene_digest = 0;
    std::uint64_t config_digest = 0;

    const VelocityProfile& nearest(double v) const;
};

struct DbBuildOptions {
    double dummy_l_h = 0.5;
    double dummy_d_h = 0.3;
    double t_enter = 2.0;
    PreprocessConfig preprocess;
    DipConfig dip;
};

/// Build the reference database: for each velocity on the grid, run
/// `trials` seeded crossings of a centerline dummy, preprocess the
/// reference tag's RSSI, extract and average the dip, then store it
/// normalized. Trials without a usable dip are discarded (and counted);
/// a velocity with no usable trials fails the build.
VelocityProfileDB build_database(const Scene& scene, const SimConfig& sim_cfg,
                                 double v_min, double v_max, double step,
                                 int trials, const DbBuildOptions& opt = {});

struct MatchConfig {
    double min_score = 0.6;       // below this the match is rejected
    double min_overlap_frac = 0.5; // of template length, while sliding
    DipConfig dip;
};

struct VelocityMatch {
    bool matched = false;
    double v_hat = 0.0;
    double score = -1.0;
};

/// Estimate the crossing speed of `observed` (a preprocessed RSSI series on
/// the database grid): extract its dip, slide it against every template,
/// and return the velocity whose best-alignment correlation is closest
/// to 1. Ties resolve to the smallest velocity; scores below min_score
/// come back unmatched.
VelocityMatch match_velocity(const VelocityProfileDB& db, const Series& observed,
                             const MatchConfig& cfg = {});

void write_database(std::ostream& os, const VelocityProfileDB& db);
void write_database_file(const std::string& path, const VelocityProfileDB& db);
VelocityProfileDB read_database(std::istream& is);
VelocityProfileDB read_database_file(const std::string& path);

} // namespace rfgate
