#include "rfgate/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rfgate {

Series moving_average(const Series& s, int w) {
    s.validate();
    const int n = static_cast<int>(s.size());
    if (w < 1 || w % 2 == 0)
        throw std::invalid_argument("moving_average: window must be odd and >= 1");
    if (w > n)
        throw std::invalid_argument("moving_average: window larger than series");

    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + s.y[static_cast<std::size_t>(i)];

    Series out;
    out.t = s.t;
    out.y.resize(static_cast<std::size_t>(n));
    const int half = (w - 1) / 2;
    for (int i = 0; i < n; ++i) {
        const int h = std::min({half, i, n - 1 - i});
        const int lo = i - h;
        const int hi = i + h + 1;
        out.y[static_cast<std::size_t>(i)] =
            (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)]) / (2 * h + 1);
    }
    return out;
}

namespace {

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

// One-sided three-point slope at the boundary, with the usual clamps that
// keep the interpolant monotone next to the edge.
double edge_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sgn(m) != sgn(d0))
        m = 0.0;
    else if (sgn(d0) != sgn(d1) && std::abs(m) > 3.0 * std::abs(d0))
        m = 3.0 * d0;
    return m;
}

std::vector<double> pchip_slopes(const std::vector<double>& t,
                                 const std::vector<double>& y) {
    const std::size_t n = t.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = t[i + 1] - t[i];
        delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        m[0] = m[1] = delta[0];
        return m;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] == 0.0 || delta[i] == 0.0 || sgn(delta[i - 1]) != sgn(delta[i])) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    m[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return m;
}

} // namespace

Series pchip_resample(const Series& s, double grid_rate) {
    s.validate();
    if (s.size() < 2)
        throw std::invalid_argument("pchip_resample: need at least two samples");
    if (!(grid_rate > 0.0))
        throw std::invalid_argument("pchip_resample: grid_rate must be > 0");

    const std::vector<double>& t = s.t;
    const std::vector<double>& y = s.y;
    const std::vector<double> m = pchip_slopes(t, y);
    const double dt = 1.0 / grid_rate;
    const double t0 = t.front();
    const double t_last = t.back();
    const auto count = static_cast<std::size_t>(std::floor((t_last - t0) / dt + 1e-9)) + 1;

    Series out;
    out.t.reserve(count);
    out.y.reserve(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double tq = t0 + static_cast<double>(k) * dt;
        while (seg + 2 < t.size() && tq >= t[seg + 1]) ++seg;
        double val;
        if (std::abs(tq - t[seg]) < 1e-12) {
            val = y[seg];
        } else if (std::abs(tq - t[seg + 1]) < 1e-12) {
            val = y[seg + 1];
        } else {
            const double h = t[seg + 1] - t[seg];
            const double d = (y[seg + 1] - y[seg]) / h;
            const double c2 = (3.0 * d - 2.0 * m[seg] - m[seg + 1]) / h;
            const double c3 = (m[seg] + m[seg + 1] - 2.0 * d) / (h * h);
            const double x = tq - t[seg];
            val = y[seg] + x * (m[seg] + x * (c2 + x * c3));
        }
        out.push_back(tq, val);
    }
    return out;
}

Series preprocess(const Series& s, const PreprocessConfig& cfg) {
    auto clamp_odd = [](int w, std::size_t n) {
        if (w > static_cast<int>(n)) w = static_cast<int>(n);
        if (w % 2 == 0) --w;
        return std::max(1, w);
    };
    if (cfg.filter_first) {
        const Series f = moving_average(s, clamp_odd(cfg.ma_window, s.size()));
        return pchip_resample(f, cfg.grid_rate);
    }
    const Series r = pchip_resample(s, cfg.grid_rate);
    return moving_average(r, clamp_odd(cfg.ma_window, r.size()));
}

} // namespace rfgate
