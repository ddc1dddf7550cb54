#include "fiberlink/link.hpp"

#include "fiberlink/errors.hpp"
#include "fiberlink/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fiberlink {

// Fixed sub-stream layout of the simulation master seed. These ids are part
// of the reproducibility contract recorded in provenance sidecars.
namespace stream {
constexpr std::uint64_t kFiberCommon = 0; // correlated part shared by F1 and F2
constexpr std::uint64_t kFiberF1 = 1;     // independent part of F1
constexpr std::uint64_t kFiberF2 = 2;     // independent part of F2
constexpr std::uint64_t kTemperature = 3;
constexpr std::uint64_t kDetectAnc = 4;
constexpr std::uint64_t kDetectRt = 5;
constexpr std::uint64_t kDetectOwb = 6;
constexpr std::uint64_t kDetectOwf = 7;
constexpr std::uint64_t kLaser = 8;
constexpr std::uint64_t kRf = 9;
} // namespace stream

std::string to_string(AncServoConfig::Mode m) {
    return m == AncServoConfig::Mode::Ideal ? "ideal" : "delayed_loop";
}

AncServoConfig::Mode anc_mode_from_string(const std::string& s) {
    if (s == "ideal") return AncServoConfig::Mode::Ideal;
    if (s == "delayed_loop") return AncServoConfig::Mode::DelayedLoop;
    throw config_error("unknown ANC servo mode '" + s + "' (expected ideal or delayed_loop)");
}

double LinkConfig::effective_tau_s() const {
    if (tau_s > 0.0) return tau_s;
    return group_index * length_km * 1000.0 / kSpeedOfLight_m_s;
}

void LinkConfig::validate() const {
    std::string problems;
    auto add = [&](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };

    if (!(length_km > 0.0)) add("length_km must be positive");
    if (!(group_index >= 1.0)) add("group_index must be >= 1");
    if (!(carrier_hz > 0.0)) add("carrier_hz must be positive");
    if (!(gamma_fs_per_k_m >= 0.0)) add("gamma_fs_per_k_m must be >= 0");
    if (l_bc_m < 0.0 || l_oa_m < 0.0 || l_ob_m < 0.0) add("arm lengths must be >= 0");
    if (anc_mismatch_m < 0.0) add("anc_mismatch_m must be >= 0");
    if (!(interfiber_rho >= 0.0 && interfiber_rho <= 1.0))
        add("interfiber_rho must lie in [0, 1]");
    if (tau_s > 0.0) {
        const double derived = group_index * length_km * 1000.0 / kSpeedOfLight_m_s;
        if (std::abs(tau_s - derived) > 0.01 * derived)
            add("tau_s disagrees with group_index * length / c by more than 1%");
    } else if (tau_s < 0.0) {
        add("tau_s must be >= 0");
    }
    try {
        fiber_noise.validate("fiber_noise");
        detection_floor.validate("detection_floor");
        if (detection_floor_owf) detection_floor_owf->validate("detection_floor_owf");
        laser_residual.validate("laser_residual");
        rf_residual.validate("rf_residual");
        temperature.validate("temperature");
    } catch (const std::invalid_argument& e) {
        add(e.what());
    }
    for (const auto& t : detection_floor.terms)
        if (t.alpha != 0 && t.level_rad2_hz > 0.0) add("detection_floor must be white PM");
    if (detection_floor_owf)
        for (const auto& t : detection_floor_owf->terms)
            if (t.alpha != 0 && t.level_rad2_hz > 0.0)
                add("detection_floor_owf must be white PM");
    if (anc.mode == AncServoConfig::Mode::DelayedLoop) {
        const double bound = 1.0 / (4.0 * effective_tau_s());
        if (!(anc.bandwidth_hz > 0.0)) add("anc.bandwidth_hz must be positive");
        else if (anc.bandwidth_hz > bound)
            add("anc.bandwidth_hz exceeds the delay-limited bound 1/(4 tau)");
    }
    if (!problems.empty()) throw config_error("link config: " + problems);
}

const std::vector<std::string>& ObservableSet::raw_names() {
    static const std::vector<std::string> names = {"ANC", "RT", "OWB", "OWF"};
    return names;
}

const std::vector<std::string>& ObservableSet::derived_names() {
    static const std::vector<std::string> names = {"TWU1", "TWU2", "TWU3", "TWB1",
                                                   "TWB2", "TWB3", "TWNF"};
    return names;
}

const PhaseSeries& ObservableSet::channel(const std::string& name) const {
    return const_cast<ObservableSet*>(this)->channel(name);
}

PhaseSeries& ObservableSet::channel(const std::string& name) {
    if (name == "ANC") return anc;
    if (name == "RT") return rt;
    if (name == "OWB") return owb;
    if (name == "OWF") return owf;
    if (name == "TWU1") return twu1;
    if (name == "TWU2") return twu2;
    if (name == "TWU3") return twu3;
    if (name == "TWB1") return twb1;
    if (name == "TWB2") return twb2;
    if (name == "TWB3") return twb3;
    if (name == "TWNF") return twnf;
    throw std::invalid_argument("unknown observable channel '" + name + "'");
}

PhaseSeries interferometric_phase(double carrier_hz, double gamma_fs_per_k_m,
                                  std::span<const double> delta_t_k, double dt_s,
                                  double mismatch_m) {
    if (delta_t_k.empty())
        throw std::invalid_argument("interferometric_phase: empty temperature series");
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("interferometric_phase: carrier must be positive");
    PhaseSeries out;
    out.dt_s = dt_s;
    out.carrier_hz = carrier_hz;
    out.phase_rad.resize(delta_t_k.size());
    // gamma is quoted in fs/(K m); the product gamma dT dL is a time error.
    const double coeff = kTwoPi * carrier_hz * gamma_fs_per_k_m * 1e-15 * mismatch_m;
    for (std::size_t i = 0; i < delta_t_k.size(); ++i) out.phase_rad[i] = coeff * delta_t_k[i];
    return out;
}

PhaseSeries anc_correction(const PhaseSeries& round_trip_phase, const AncServoConfig& servo,
                           double tau_s) {
    const std::size_t n = round_trip_phase.size();
    PhaseSeries out = round_trip_phase;
    if (servo.mode == AncServoConfig::Mode::Ideal) {
        for (auto& v : out.phase_rad) v *= -0.5;
        return out;
    }
    if (!(servo.bandwidth_hz > 0.0))
        throw std::invalid_argument("anc_correction: loop bandwidth must be positive");
    if (tau_s > 0.0 && servo.bandwidth_hz > 1.0 / (4.0 * tau_s))
        throw std::invalid_argument(
            "anc_correction: bandwidth exceeds the delay-limited bound 1/(4 tau)");

    // One-pole integrator tracking -1/2 of the round trip, observing it one
    // loop delay (2 tau) late.
    const double dt = round_trip_phase.dt_s;
    const auto delay = static_cast<std::size_t>(std::llround(2.0 * tau_s / dt));
    const double gain = 1.0 - std::exp(-kTwoPi * servo.bandwidth_hz * dt);
    double state = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double target =
            k >= delay ? -0.5 * round_trip_phase.phase_rad[k - delay] : 0.0;
        state += gain * (target - state);
        out.phase_rad[k] = state;
    }
    return out;
}

namespace {

void add_inplace(std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

} // namespace

ObservableSet simulate_link(const LinkConfig& config, double duration_s, double internal_rate_hz,
                            std::uint64_t seed) {
    config.validate();
    if (!(duration_s > 0.0) || !(internal_rate_hz > 0.0))
        throw std::invalid_argument("simulate_link: duration and rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * internal_rate_hz)) + 1;
    if (n < (1u << 10) + 1)
        throw std::invalid_argument("simulate_link: duration * rate must give at least 2^10 samples");
    const double dt = 1.0 / internal_rate_hz;
    const double f_nyq = 0.5 * internal_rate_hz;
    for (const NoiseSpec* spec : {&config.fiber_noise, &config.detection_floor,
                                  &config.laser_residual, &config.rf_residual}) {
        if (spec->cutoff_hz > f_nyq * (1.0 + 1e-12))
            throw std::invalid_argument(
                "simulate_link: internal rate below twice a configured noise cutoff");
    }

    ObservableSet set;
    set.provenance.seed = seed;

    const double tau = config.effective_tau_s();
    const auto delay = static_cast<std::size_t>(std::llround(tau * internal_rate_hz));
    if (delay == 0)
        set.provenance.warnings.push_back(
            "propagation delay rounds to zero internal samples; raise internal_rate_hz for "
            "delay-sensitive studies");

    auto blank = [&](PhaseSeries& s) {
        s.t0_s = 0.0;
        s.dt_s = dt;
        s.carrier_hz = config.carrier_hz;
        s.phase_rad.assign(n, 0.0);
    };
    blank(set.anc);
    blank(set.rt);
    blank(set.owb);
    blank(set.owf);

    // One-way accumulated fiber phase for each fiber. The configured spec
    // describes the ROUND TRIP, so one-way processes carry a quarter of the
    // PSD. The extra `delay` samples of pre-history let the forward term be
    // read at t - tau without wraparound.
    const std::size_t n_ext = n + delay;
    std::vector<double> ow_f1, ow_f2;
    if (!config.fiber_noise.is_silent()) {
        NoiseSpec one_way = config.fiber_noise.scaled(0.25);
        const NoiseSpec common_spec = one_way.scaled(config.interfiber_rho);
        const NoiseSpec indep_spec = one_way.scaled(1.0 - config.interfiber_rho);
        PhaseSeries common = gen_powerlaw(common_spec, n_ext, dt,
                                          derive_seed(seed, stream::kFiberCommon));
        PhaseSeries u1 = gen_powerlaw(indep_spec, n_ext, dt, derive_seed(seed, stream::kFiberF1));
        PhaseSeries u2 = gen_powerlaw(indep_spec, n_ext, dt, derive_seed(seed, stream::kFiberF2));
        ow_f1 = std::move(u1.phase_rad);
        ow_f2 = std::move(u2.phase_rad);
        add_inplace(ow_f1, common.phase_rad);
        add_inplace(ow_f2, common.phase_rad);
    } else {
        ow_f1.assign(n_ext, 0.0);
        ow_f2.assign(n_ext, 0.0);
    }

    // Nonreciprocal content rides the forward pass only. It is scaled so the
    // two-way observables (OWB - RT/2 and (OWB - OWF)/2) recover the
    // configured fractional-frequency bias one to one.
    const bool nonreciprocal = config.nonreciprocal_offset != 0.0;
    const double nr_rate = -2.0 * kTwoPi * config.carrier_hz * config.nonreciprocal_offset * dt;

    // Raw fiber terms. Index i in the extended arrays is time (i - delay)*dt.
    // backward(t) = ow(t), forward(t - tau) = ow(t - tau) + ramp, and the
    // round trip is their sum, so the fiber content of OWB + OWF - RT
    // cancels exactly by construction.
    for (std::size_t k = 0; k < n; ++k) {
        const double bw = ow_f2[k + delay];
        double fw = ow_f2[k];
        if (nonreciprocal)
            fw += nr_rate * (static_cast<double>(k) - static_cast<double>(delay));
        set.owb.phase_rad[k] = bw;
        set.owf.phase_rad[k] = fw;
        set.rt.phase_rad[k] = bw + fw;
    }

    // ANC records the servo correction content: +1/2 of the F1 round trip in
    // ideal mode, the loop-filtered version otherwise.
    {
        PhaseSeries rt_f1;
        rt_f1.dt_s = dt;
        rt_f1.carrier_hz = config.carrier_hz;
        rt_f1.phase_rad.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            rt_f1.phase_rad[k] = ow_f1[k + delay] + ow_f1[k];
        PhaseSeries corr = anc_correction(rt_f1, config.anc, tau);
        for (std::size_t k = 0; k < n; ++k) set.anc.phase_rad[k] = -corr.phase_rad[k];
    }

    // Interferometric terms from the shared temperature excursion. A constant
    // process has zero excursion and contributes nothing.
    if (!config.temperature.is_constant() && config.gamma_fs_per_k_m > 0.0) {
        std::vector<double> temp = gen_temperature(config.temperature, n, dt,
                                                   derive_seed(seed, stream::kTemperature));
        for (auto& v : temp) v -= config.temperature.mean_k; // excursion around the mean
        const double coeff = kTwoPi * config.carrier_hz * config.gamma_fs_per_k_m * 1e-15;
        const double arm_rt = 2.0 * config.l_bc_m;
        const double arm_owb = 2.0 * config.l_bc_m + config.l_oa_m - config.l_ob_m;
        const double arm_owf = config.l_ob_m - config.l_oa_m;
        const double arm_anc = config.anc_mismatch_m;
        for (std::size_t k = 0; k < n; ++k) {
            const double base = coeff * temp[k];
            set.rt.phase_rad[k] += base * arm_rt;
            set.owb.phase_rad[k] += base * arm_owb;
            set.owf.phase_rad[k] += base * arm_owf;
            set.anc.phase_rad[k] += base * arm_anc;
        }
    }

    // Independent white detection floor per beat note.
    auto add_noise = [&](PhaseSeries& dst, const NoiseSpec& spec, std::uint64_t stream_id) {
        if (spec.is_silent()) return;
        PhaseSeries noise = gen_powerlaw(spec, n, dt, derive_seed(seed, stream_id));
        add_inplace(dst.phase_rad, noise.phase_rad);
    };
    add_noise(set.anc, config.detection_floor, stream::kDetectAnc);
    add_noise(set.rt, config.detection_floor, stream::kDetectRt);
    add_noise(set.owb, config.detection_floor, stream::kDetectOwb);
    add_noise(set.owf, config.detection_floor_owf ? *config.detection_floor_owf
                                                  : config.detection_floor,
              stream::kDetectOwf);

    // Residual laser and RF contributions are zero by default but remain
    // configurable; they enter every beat note as common mode.
    if (!config.laser_residual.is_silent() || !config.rf_residual.is_silent()) {
        std::vector<double> common(n, 0.0);
        if (!config.laser_residual.is_silent()) {
            PhaseSeries s = gen_powerlaw(config.laser_residual, n, dt,
                                         derive_seed(seed, stream::kLaser));
            add_inplace(common, s.phase_rad);
        }
        if (!config.rf_residual.is_silent()) {
            PhaseSeries s = gen_powerlaw(config.rf_residual, n, dt,
                                         derive_seed(seed, stream::kRf));
            add_inplace(common, s.phase_rad);
        }
        add_inplace(set.anc.phase_rad, common);
        add_inplace(set.rt.phase_rad, common);
        add_inplace(set.owb.phase_rad, common);
        add_inplace(set.owf.phase_rad, common);
    }

    return set;
}

} // namespace fiberlink
