#include "auvctl/llmopt/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace auvctl::llm {

namespace {

constexpr double kBand = 0.05;
constexpr double kMaxLag = 10.0;  // s

double peak_lag(const std::vector<double>& r, const std::vector<double>& a, double dt) {
    const std::size_t n = r.size();
    const auto [rmin, rmax] = std::minmax_element(r.begin(), r.end());
    if (*rmax - *rmin <= 1e-12) return 0.0;
    const auto max_shift = std::min(n / 4, static_cast<std::size_t>(std::lround(kMaxLag / dt)));
    // Pearson correlation of the overlapping windows at each shift.
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_shift = 0;
    for (std::size_t s = 0; s <= max_shift; ++s) {
        const std::size_t m = n - s;
        double sr = 0.0, sa = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            sr += r[k];
            sa += a[k + s];
        }
        const double mr = sr / static_cast<double>(m), ma = sa / static_cast<double>(m);
        double c = 0.0, vr = 0.0, va = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double x = r[k] - mr, y = a[k + s] - ma;
            c += x * y;
            vr += x * x;
            va += y * y;
        }
        if (vr <= 1e-18 || va <= 1e-18) continue;
        c /= std::sqrt(vr * va);
        if (c > best + 1e-12) {
            best = c;
            best_shift = s;
        }
    }
    return static_cast<double>(best_shift) * dt;
}

}  // namespace

ChannelSummary summarize_channel(const ChannelTrace& trace, double dt) {
    if (!(dt > 0.0)) throw InvalidParams("summary dt must be > 0");
    const std::size_t n = trace.size();
    if (trace.reference.size() != n) throw LengthMismatch("reference and response lengths differ");
    if (static_cast<double>(n) * dt < 2.0 - 1e-9)
        throw TraceTooShort("trace covers " + std::to_string(static_cast<double>(n) * dt) + " s; need at least 2 s");

    // Unwrapped reference and the response expressed relative to it.
    std::vector<double> r(n), a(n), e(n);
    for (std::size_t k = 0; k < n; ++k) {
        e[k] = trace.error(k);
        r[k] = k == 0 ? trace.reference[0]
                      : r[k - 1] + (trace.angular ? wrap_angle(trace.reference[k] - trace.reference[k - 1])
                                                  : trace.reference[k] - trace.reference[k - 1]);
        a[k] = r[k] - e[k];
    }

    ChannelSummary s;
    const double step = r.back() - a.front();
    const auto [rmin, rmax] = std::minmax_element(r.begin(), r.end());
    const double scale = std::max(std::abs(step), *rmax - *rmin);
    const double band = kBand * scale;

    std::size_t first_in = 0;
    if (scale > 1e-12) {
        const double sign = step >= 0.0 ? 1.0 : -1.0;
        double over = 0.0;
        for (double v : e) over = std::max(over, -sign * v);
        s.overshoot_pct = 100.0 * over / scale;
        for (std::size_t k = n; k-- > 0;)
            if (std::abs(e[k]) > band) {
                s.settling_time = static_cast<double>(k + 1) * dt;
                break;
            }
        // Reaching the reference counts as entry even when a crossing skips over the band.
        while (first_in < n && std::abs(e[first_in]) > band && e[first_in] * e[0] > 0.0) ++first_in;
    }

    const std::size_t tail = std::max<std::size_t>(1, (n + 4) / 5);
    double ss = 0.0;
    for (std::size_t k = n - tail; k < n; ++k) ss += std::abs(e[k]);
    s.steady_state_error = ss / static_cast<double>(tail);

    int last_sign = 0;
    for (std::size_t k = first_in > 0 ? first_in - 1 : 0; k < n; ++k) {
        const int sg = (e[k] > 0.0) - (e[k] < 0.0);
        if (sg == 0) continue;
        if (last_sign != 0 && sg != last_sign) ++s.oscillations;
        last_sign = sg;
    }

    s.lag = peak_lag(r, a, dt);
    if (!trace.saturated.empty())
        s.saturation_fraction = static_cast<double>(std::count(trace.saturated.begin(), trace.saturated.end(), true)) /
                                static_cast<double>(trace.saturated.size());
    s.rms_error = trace.rms_error();
    return s;
}

TrackingSummary summarize_tracking(const ProbeResult& probe) {
    TrackingSummary t;
    t.yaw = summarize_channel(probe.yaw, probe.dt);
    t.depth = summarize_channel(probe.depth, probe.dt);
    t.tracking_rms = probe.tracking_rms();
    return t;
}

}  // namespace auvctl::llm
