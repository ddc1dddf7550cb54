#pragma once

#include "fiberlink/series.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fiberlink {

/// One power-law component of a phase-noise PSD:
///   S_phi(f) = level_rad2_hz * f^alpha  [rad^2/Hz], level quoted at 1 Hz.
/// Supported exponents run from white PM (0) to random-walk FM (-4).
struct NoiseTerm {
    int alpha = 0;
    double level_rad2_hz = 0.0;
};

struct NoiseSpec {
    std::vector<NoiseTerm> terms;
    double carrier_hz = 194.4e12;
    double cutoff_hz = 0.0; // 0 = extend to the Nyquist of the generated series

    bool is_silent() const;
    bool has_colored_terms() const; // any alpha <= -1 with nonzero level
    double psd_at(double f_hz) const;
    NoiseSpec scaled(double power_factor) const;
    void validate(const std::string& where) const;

    static NoiseSpec white_pm(double level_rad2_hz, double carrier_hz = 194.4e12);
    static NoiseSpec single(int alpha, double level_rad2_hz, double carrier_hz = 194.4e12);
};

/// Slow ambient-temperature model driving the interferometric noise:
/// mean + diurnal sinusoid + linear drift + random walk.
struct TemperatureProcess {
    double mean_k = 298.0;
    double diurnal_amplitude_k = 0.0;
    double diurnal_period_s = 86400.0;
    double linear_drift_k_per_s = 0.0;
    double random_walk_level_k2_hz = 0.0;

    bool is_constant() const;
    void validate(const std::string& where) const;
};

/// Synthesizes a phase series whose PSD follows the spec's power-law sum.
/// Frequency-domain shaping: a white Gaussian spectrum is weighted by
/// sqrt(S_phi(f)) and transformed back. The DC bin is pinned to zero and,
/// when terms steeper than f^-1 are present, one linear detrend removes the
/// circular-wraparound ramp. Same (spec, n, dt, seed) gives bit-identical
/// output.
PhaseSeries gen_powerlaw(const NoiseSpec& spec, std::size_t n, double dt_s, std::uint64_t seed);

/// Deterministic temperature series in kelvin (gap-free).
std::vector<double> gen_temperature(const TemperatureProcess& proc, std::size_t n, double dt_s,
                                    std::uint64_t seed);

/// Two series sharing a common-mode component weighted so the population
/// Pearson correlation equals rho; each marginal PSD matches the spec.
/// Sub-streams: 0 = common mode, 1 = first independent part, 2 = second.
std::pair<PhaseSeries, PhaseSeries> gen_correlated_pair(const NoiseSpec& spec, double rho,
                                                        std::size_t n, double dt_s,
                                                        std::uint64_t seed);

} // namespace fiberlink
