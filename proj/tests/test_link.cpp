#include "fiberlink/counters.hpp"
#include "fiberlink/errors.hpp"
#include "fiberlink/link.hpp"
#include "fiberlink/rng.hpp"
#include "fiberlink/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace fiberlink;

namespace {

LinkConfig quiet_link() {
    LinkConfig cfg;
    cfg.temperature.mean_k = 298.0; // constant: zero excursion
    return cfg;
}

} // namespace

TEST_CASE("interferometric phase: the 1.5 K / 0.15 m case gives 8.325 fs") {
    const std::vector<double> dT(16, 1.5);
    PhaseSeries phi = interferometric_phase(194.4e12, 37.0, dT, 1.0, 0.15);
    CHECK(std::abs(phi.time_error_s(0) / 8.325e-15 - 1.0) < 1e-9);
    CHECK(phi.phase_rad[0] == doctest::Approx(10.1685).epsilon(1e-3));

    const std::vector<double> zero(16, 0.0);
    PhaseSeries none = interferometric_phase(194.4e12, 37.0, zero, 1.0, 0.15);
    for (double v : none.phase_rad) CHECK(v == 0.0);

    PhaseSeries flipped = interferometric_phase(194.4e12, 37.0, dT, 1.0, -0.15);
    for (std::size_t i = 0; i < phi.size(); ++i)
        CHECK(flipped.phase_rad[i] == -phi.phase_rad[i]);
}

TEST_CASE("ideal servo correction is exactly minus half the round trip") {
    PhaseSeries rt = gen_powerlaw(NoiseSpec::single(-2, 1.0), 4096, 1e-3, 17);
    AncServoConfig servo; // ideal
    PhaseSeries corr = anc_correction(rt, servo, 2.1e-4);
    for (std::size_t i = 0; i < rt.size(); ++i)
        CHECK(corr.phase_rad[i] == -0.5 * rt.phase_rad[i]);

    PhaseSeries zero = rt;
    zero.phase_rad.assign(zero.size(), 0.0);
    for (auto mode : {AncServoConfig::Mode::Ideal, AncServoConfig::Mode::DelayedLoop}) {
        AncServoConfig s;
        s.mode = mode;
        s.bandwidth_hz = 50.0;
        PhaseSeries c = anc_correction(zero, s, 2.1e-4);
        for (double v : c.phase_rad) CHECK(v == 0.0);
    }
}

TEST_CASE("delayed loop suppresses white FM fiber noise by 20 dB below B/10") {
    const double rate = 1000.0;
    const double tau = 5e-6; // short fiber keeps the loop delay negligible
    PhaseSeries rt = gen_powerlaw(NoiseSpec::single(-2, 1e2), 1u << 18, 1.0 / rate, 23);
    AncServoConfig servo;
    servo.mode = AncServoConfig::Mode::DelayedLoop;
    servo.bandwidth_hz = 10.0;
    PhaseSeries corr = anc_correction(rt, servo, tau);

    // Residual = target - tracked correction.
    PhaseSeries residual = rt;
    for (std::size_t i = 0; i < rt.size(); ++i)
        residual.phase_rad[i] = -0.5 * rt.phase_rad[i] - corr.phase_rad[i];
    PhaseSeries uncompensated = rt;
    for (auto& v : uncompensated.phase_rad) v *= -0.5;

    Psd res_psd = phase_psd(residual);
    Psd unc_psd = phase_psd(uncompensated);
    double res_power = 0.0, unc_power = 0.0;
    for (std::size_t i = 0; i < res_psd.f_hz.size(); ++i) {
        const double f = res_psd.f_hz[i];
        if (f < 4.0 * res_psd.f_hz.front() || f > servo.bandwidth_hz / 10.0) continue;
        res_power += res_psd.s_rad2_hz[i];
        unc_power += unc_psd.s_rad2_hz[i];
    }
    CHECK(unc_power / res_power > 100.0); // >= 20 dB

    AncServoConfig too_fast = servo;
    too_fast.bandwidth_hz = 1e6;
    CHECK_THROWS_AS(anc_correction(rt, too_fast, 2.1e-4), std::invalid_argument);
}

TEST_CASE("silent link simulates to four zero series") {
    LinkConfig cfg = quiet_link();
    ObservableSet set = simulate_link(cfg, 10.0, 200.0, 5);
    for (const auto& name : ObservableSet::raw_names()) {
        const PhaseSeries& s = set.channel(name);
        REQUIRE(s.size() == 2001);
        for (double v : s.phase_rad) CHECK(v == 0.0);
    }
    CHECK(!set.provenance.warnings.empty()); // delay rounds to zero at 200 Hz
}

TEST_CASE("fiber-only link: OWB + OWF - RT cancels identically") {
    LinkConfig cfg = quiet_link();
    cfg.fiber_noise = NoiseSpec::single(-2, 10.0);
    ObservableSet set = simulate_link(cfg, 20.0, 100.0, 77);
    for (std::size_t i = 0; i < set.rt.size(); ++i) {
        const double r = set.owb.phase_rad[i] + set.owf.phase_rad[i] - set.rt.phase_rad[i];
        CHECK(r == 0.0);
    }
}

TEST_CASE("temperature-only link reproduces the predicted round-trip term") {
    LinkConfig cfg = quiet_link();
    cfg.temperature.diurnal_amplitude_k = 1.5;
    cfg.temperature.diurnal_period_s = 3600.0;
    ObservableSet set = simulate_link(cfg, 1800.0, 1.0, 3);

    std::vector<double> dT =
        gen_temperature(cfg.temperature, set.rt.size(), 1.0, derive_seed(3, 3));
    for (auto& v : dT) v -= cfg.temperature.mean_k;
    const double coeff = kTwoPi * cfg.carrier_hz * cfg.gamma_fs_per_k_m * 1e-15;
    for (std::size_t i = 0; i < set.rt.size(); ++i) {
        const double expected = coeff * dT[i] * (2.0 * cfg.l_bc_m);
        CHECK(std::abs(set.rt.phase_rad[i] - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("raw series superpose their fiber and interferometric contents") {
    // With detection off, each raw beat note is exactly the sum of what a
    // fiber-only and a temperature-only run produce from the same seed.
    LinkConfig fiber_only = quiet_link();
    fiber_only.fiber_noise = NoiseSpec::single(-2, 8.0);

    LinkConfig temp_only = quiet_link();
    temp_only.temperature.diurnal_amplitude_k = 1.0;
    temp_only.temperature.diurnal_period_s = 100.0;

    LinkConfig both = fiber_only;
    both.temperature = temp_only.temperature;

    ObservableSet a = simulate_link(fiber_only, 300.0, 10.0, 88);
    ObservableSet b = simulate_link(temp_only, 300.0, 10.0, 88);
    ObservableSet c = simulate_link(both, 300.0, 10.0, 88);
    for (const auto& name : ObservableSet::raw_names()) {
        const PhaseSeries& sa = a.channel(name);
        const PhaseSeries& sb = b.channel(name);
        const PhaseSeries& sc = c.channel(name);
        for (std::size_t i = 0; i < sc.size(); ++i)
            CHECK(sc.phase_rad[i] == sa.phase_rad[i] + sb.phase_rad[i]);
    }
}

TEST_CASE("forward and backward content line up at the propagation delay") {
    LinkConfig cfg = quiet_link();
    cfg.fiber_noise = NoiseSpec::white_pm(1e-2); // delta-correlated, sharp peak
    const double rate = 100000.0;
    ObservableSet set = simulate_link(cfg, 0.5, rate, 31);
    const auto expected_lag =
        static_cast<std::size_t>(std::llround(cfg.effective_tau_s() * rate));
    REQUIRE(expected_lag == 21);
    CHECK(set.provenance.warnings.empty());

    // corr(OWB[k - lag], OWF[k]) peaks where OWB leads OWF by the delay.
    double best = -2.0;
    std::size_t best_lag = 0;
    const std::size_t n = set.owb.size();
    for (std::size_t lag = 0; lag <= 40; ++lag) {
        double num = 0.0, da = 0.0, db = 0.0;
        for (std::size_t k = lag; k < n; ++k) {
            const double a = set.owb.phase_rad[k - lag];
            const double b = set.owf.phase_rad[k];
            num += a * b;
            da += a * a;
            db += b * b;
        }
        const double r = num / std::sqrt(da * db);
        if (r > best) {
            best = r;
            best_lag = lag;
        }
    }
    CHECK(best_lag == expected_lag);
    CHECK(best > 0.9);
}

TEST_CASE("nonreciprocal offset is recovered one to one by TWB1 and TWB3") {
    LinkConfig cfg = quiet_link();
    cfg.nonreciprocal_offset = 5e-18;
    ObservableSet set = simulate_link(cfg, 4096.0, 1.0, 9);

    // TWB3's fiber content is a pure frequency ramp: (OWB - OWF)/2.
    PhaseSeries twb3;
    twb3.dt_s = 1.0;
    twb3.carrier_hz = cfg.carrier_hz;
    twb3.phase_rad.resize(set.owb.size());
    for (std::size_t i = 0; i < set.owb.size(); ++i)
        twb3.phase_rad[i] = 0.5 * (set.owb.phase_rad[i] - set.owf.phase_rad[i]);
    FrequencySeries y = count_pi(twb3, 1.0);
    CHECK(std::abs(mean_valid(y) / 5e-18 - 1.0) < 1e-9);

    PhaseSeries twb1;
    twb1.dt_s = 1.0;
    twb1.carrier_hz = cfg.carrier_hz;
    twb1.phase_rad.resize(set.owb.size());
    for (std::size_t i = 0; i < set.owb.size(); ++i)
        twb1.phase_rad[i] = set.owb.phase_rad[i] - 0.5 * set.rt.phase_rad[i];
    CHECK(std::abs(mean_valid(count_pi(twb1, 1.0)) / 5e-18 - 1.0) < 1e-9);
}

TEST_CASE("link config validation rejects inconsistent inputs") {
    LinkConfig cfg = quiet_link();
    cfg.tau_s = 1e-3; // wildly off group_index * length / c
    CHECK_THROWS_AS(cfg.validate(), config_error);

    LinkConfig bw = quiet_link();
    bw.anc.mode = AncServoConfig::Mode::DelayedLoop;
    bw.anc.bandwidth_hz = 1e5; // above 1/(4 tau) ~ 1.19 kHz
    CHECK_THROWS_AS(bw.validate(), config_error);

    LinkConfig rho = quiet_link();
    rho.interfiber_rho = 1.5;
    CHECK_THROWS_AS(rho.validate(), config_error);

    LinkConfig colored = quiet_link();
    colored.detection_floor = NoiseSpec::single(-2, 1.0);
    CHECK_THROWS_AS(colored.validate(), config_error);

    // Rate below twice the configured cutoff is inconsistent.
    LinkConfig fast = quiet_link();
    fast.fiber_noise = NoiseSpec::single(-2, 1.0);
    fast.fiber_noise.cutoff_hz = 100.0;
    CHECK_THROWS_AS(simulate_link(fast, 100.0, 50.0, 1), std::invalid_argument);

    // Too few samples.
    CHECK_THROWS_AS(simulate_link(quiet_link(), 1.0, 10.0, 1), std::invalid_argument);
}

TEST_CASE("simulation is deterministic in the seed") {
    LinkConfig cfg = quiet_link();
    cfg.fiber_noise = NoiseSpec::single(-3, 0.1);
    cfg.detection_floor = NoiseSpec::white_pm(1e-3);
    cfg.temperature.diurnal_amplitude_k = 0.5;
    ObservableSet a = simulate_link(cfg, 60.0, 50.0, 123);
    ObservableSet b = simulate_link(cfg, 60.0, 50.0, 123);
    ObservableSet c = simulate_link(cfg, 60.0, 50.0, 124);
    CHECK(a.rt.phase_rad == b.rt.phase_rad);
    CHECK(a.owf.phase_rad == b.owf.phase_rad);
    CHECK(a.rt.phase_rad != c.rt.phase_rad);
}
