#pragma once

#include "rfgate/series.hpp"

namespace rfgate {

struct PreprocessConfig {
    int ma_window = 5;        // odd; samples
    double grid_rate = 100.0; // Hz
    bool filter_first = true; // smooth before resampling
};

/// Centered moving average of odd width w. Near the edges the window
/// shrinks symmetrically to the widest odd width that still fits, so no
/// samples are invented. Timestamps pass through unchanged.
Series moving_average(const Series& s, int w);

/// Resample onto the uniform grid t[0], t[0]+1/grid_rate, ..., <= t[last]
/// with the shape-preserving piecewise cubic Hermite interpolant
/// (Fritsch-Carlson harmonic-mean slopes, one-sided three-point endpoint
/// slopes clamped to the local monotonicity). Knot values reproduce
/// exactly when a grid point lands on a knot.
Series pchip_resample(const Series& s, double grid_rate);

/// Filter + resample in the configured order.
Series preprocess(const Series& s, const PreprocessConfig& cfg);

} // namespace rfgate
