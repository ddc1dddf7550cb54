#pragma once

#include "fiberlink/noise.hpp"
#include "fiberlink/series.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fiberlink {

struct AncServoConfig {
    enum class Mode { Ideal, DelayedLoop };
    Mode mode = Mode::Ideal;
    double bandwidth_hz = 100.0; // delayed-loop only; bounded by 1/(4 tau)
};

std::string to_string(AncServoConfig::Mode m);
AncServoConfig::Mode anc_mode_from_string(const std::string& s);

/// Physical parameters of the hybrid two-fiber link. The fiber noise spec
/// describes the round-trip PSD of the bidirectional fiber; one-way processes
/// are derived from it. The nonreciprocal offset is the fractional-frequency
/// bias recovered by the two-way observables TWB1/TWB3 (see link.cpp for how
/// it rides the forward pass).
struct LinkConfig {
    double length_km = 43.0;
    double group_index = 1.468;
    double tau_s = 0.0; // 0 = derive from length and group index
    double carrier_hz = 194.4e12;
    double gamma_fs_per_k_m = 37.0; // phase-temperature coefficient of silica fiber
    double l_bc_m = 0.10;
    double l_oa_m = 0.30;
    double l_ob_m = 0.25; // default mismatch l_bc + l_oa - l_ob = 0.15 m
    double anc_mismatch_m = 0.0;
    NoiseSpec fiber_noise;
    double interfiber_rho = 1.0;
    NoiseSpec detection_floor;                  // white PM added per beat note
    std::optional<NoiseSpec> detection_floor_owf; // override for the weak forward beat
    TemperatureProcess temperature;
    double nonreciprocal_offset = 0.0;
    NoiseSpec laser_residual; // zero by default
    NoiseSpec rf_residual;    // zero by default
    AncServoConfig anc;

    double effective_tau_s() const;
    double mismatch_m() const { return l_bc_m + l_oa_m - l_ob_m; }
    void validate() const; // throws config_error listing every violation
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// Four raw beat-note phase series plus the seven derived observables.
/// simulate_link fills the raw members; combine_observables fills the rest.
struct ObservableSet {
    PhaseSeries anc, rt, owb, owf;
    PhaseSeries twu1, twu2, twu3, twb1, twb2, twb3, twnf;
    Provenance provenance;

    static const std::vector<std::string>& raw_names();
    static const std::vector<std::string>& derived_names();
    const PhaseSeries& channel(const std::string& name) const;
    PhaseSeries& channel(const std::string& name);
    bool has_derived() const { return !twnf.phase_rad.empty(); }
};

/// Interferometric phase phi = 2 pi nu gamma dT dL from a temperature
/// excursion series (kelvin) and an arm-length mismatch.
PhaseSeries interferometric_phase(double carrier_hz, double gamma_fs_per_k_m,
                                  std::span<const double> delta_t_k, double dt_s,
                                  double mismatch_m);

/// Servo correction for the compensated fiber. Ideal mode returns exactly
/// -1/2 of the round-trip phase; delayed-loop mode tracks that target through
/// a first-order loop acting on round-trip-delayed observations.
PhaseSeries anc_correction(const PhaseSeries& round_trip_phase, const AncServoConfig& servo,
                           double tau_s);

/// Simulates the hybrid link and returns the four raw beat notes.
/// Sub-streams of the seed are fixed and documented in link.cpp.
ObservableSet simulate_link(const LinkConfig& config, double duration_s, double internal_rate_hz,
                            std::uint64_t seed);

} // namespace fiberlink
