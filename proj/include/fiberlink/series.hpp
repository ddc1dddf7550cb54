#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace fiberlink {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight_m_s = 299792458.0;

enum class CounterKind { Pi, Lambda };

std::string to_string(CounterKind k);
CounterKind counter_kind_from_string(const std::string& s);

/// Uniformly sampled optical phase in radians, referenced to a carrier.
/// An empty validity vector means every sample is valid.
struct PhaseSeries {
    double t0_s = 0.0;
    double dt_s = 1.0;
    double carrier_hz = 0.0;
    std::vector<double> phase_rad;
    std::vector<std::uint8_t> valid; // 1 = valid; empty = all valid

    std::size_t size() const { return phase_rad.size(); }
    bool is_valid(std::size_t i) const { return valid.empty() || valid[i] != 0; }
    bool has_gaps() const;
    void mark_invalid(std::size_t i);

    /// Phase expressed as propagation time error, x = phi / (2 pi nu).
    double time_error_s(std::size_t i) const { return phase_rad[i] / (kTwoPi * carrier_hz); }
};

/// Fractional-frequency samples produced by a Pi- or Lambda-type counter.
/// Gapped samples hold NaN and are skipped by every estimator.
struct FrequencySeries {
    double t0_s = 0.0;
    double gate_s = 1.0;
    double carrier_hz = 0.0;
    CounterKind kind = CounterKind::Pi;
    std::vector<double> y;
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return y.size(); }
    bool is_valid(std::size_t i) const { return valid.empty() || valid[i] != 0; }
    bool has_gaps() const;
    void mark_invalid(std::size_t i);
    std::size_t valid_count() const;
    double gap_fraction() const;
    double duration_s() const { return static_cast<double>(y.size()) * gate_s; }
};

} // namespace fiberlink
