#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rfgate {

/// A sampled signal: parallel vectors of strictly increasing timestamps and
/// finite values. The carrier for RSSI and inter-read-interval streams.
struct Series {
    std::vector<double> t;
    std::vector<double> y;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }

    void push_back(double time, double value) {
        t.push_back(time);
        y.push_back(value);
    }

    void validate() const {
        if (t.size() != y.size())
            throw std::invalid_argument("series: t/y length mismatch");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!std::isfinite(t[i]) || !std::isfinite(y[i]))
                throw std::invalid_argument("series: non-finite sample");
            if (i > 0 && t[i] <= t[i - 1])
                throw std::invalid_argument("series: timestamps not strictly increasing");
        }
    }
};

inline double series_mean(const Series& s, std::size_t lo, std::size_t hi) {
    if (hi <= lo || hi > s.size())
        throw std::invalid_argument("series_mean: empty index range");
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += s.y[i];
    return acc / static_cast<double>(hi - lo);
}

/// Mean of samples with lo_t <= t <= hi_t; throws if the range holds none.
inline double series_mean_between(const Series& s, double lo_t, double hi_t) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.t[i] < lo_t) continue;
        if (s.t[i] > hi_t) break;
        acc += s.y[i];
        ++n;
    }
    if (n == 0)
        throw std::invalid_argument("series_mean_between: no samples in range");
    return acc / static_cast<double>(n);
}

} // namespace rfgate
