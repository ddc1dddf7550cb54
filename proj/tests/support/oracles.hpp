// Test-side oracles, deliberately independent of the library's FFT path.
#pragma once

#include "fiberlink/series.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace oracles {

/// Strict relative comparison; doctest's Approx mixes in an absolute scale of
/// 1.0, which is vacuous for the 1e-15-magnitude values common here.
inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

/// Single-frequency periodogram bin by direct Goertzel-style evaluation,
/// boxcar window, one-sided normalization. Slow but has no shared code with
/// the library's estimators.
inline double periodogram_bin(std::span<const double> x, double f_hz, double fs_hz) {
    const std::size_t n = x.size();
    const double m = mean(x);
    double re = 0.0, im = 0.0;
    const double w = 2.0 * std::numbers::pi * f_hz / fs_hz;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i] - m;
        re += v * std::cos(w * static_cast<double>(i));
        im -= v * std::sin(w * static_cast<double>(i));
    }
    return 2.0 * (re * re + im * im) / (fs_hz * static_cast<double>(n));
}

/// Periodogram for steep spectra: prewhiten with a first difference (killing
/// boxcar leakage), then divide out the |2 sin(pi f / fs)|^2 response.
inline double periodogram_bin_prewhitened(std::span<const double> x, double f_hz, double fs_hz) {
    std::vector<double> diff(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) diff[i] = x[i + 1] - x[i];
    const double p = periodogram_bin(diff, f_hz, fs_hz);
    const double s = 2.0 * std::sin(std::numbers::pi * f_hz / fs_hz);
    return p / (s * s);
}

/// Brute-force Pi counting straight from the definition.
inline std::vector<double> count_pi_bruteforce(const fiberlink::PhaseSeries& x, double gate_s) {
    const auto m = static_cast<std::size_t>(std::llround(gate_s / x.dt_s));
    const std::size_t gates = (x.size() - 1) / m;
    std::vector<double> y(gates);
    for (std::size_t k = 0; k < gates; ++k)
        y[k] = (x.phase_rad[(k + 1) * m] - x.phase_rad[k * m]) /
               (fiberlink::kTwoPi * x.carrier_hz * gate_s);
    return y;
}

/// Brute-force non-overlapping Allan deviation from fractional frequency.
inline double adev_bruteforce(std::span<const double> y, std::size_t m) {
    const std::size_t groups = y.size() / m;
    std::vector<double> avg(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += y[g * m + i];
        avg[g] = s / static_cast<double>(m);
    }
    double sum = 0.0;
    for (std::size_t g = 0; g + 1 < groups; ++g) {
        const double d = avg[g + 1] - avg[g];
        sum += d * d;
    }
    return std::sqrt(sum / (2.0 * static_cast<double>(groups - 1)));
}

} // namespace oracles
