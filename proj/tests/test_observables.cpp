#include "fiberlink/counters.hpp"
#include "fiberlink/observables.hpp"
#include "fiberlink/rng.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace fiberlink;

namespace {

ObservableSet random_raw_set(std::size_t n, std::uint64_t seed, bool with_gaps) {
    ObservableSet set;
    Rng rng(seed);
    auto fill = [&](PhaseSeries& s) {
        s.dt_s = 1.0;
        s.carrier_hz = 194.4e12;
        s.phase_rad.resize(n);
        for (auto& v : s.phase_rad) v = 10.0 * rng.gaussian();
    };
    fill(set.anc);
    fill(set.rt);
    fill(set.owb);
    fill(set.owf);
    if (with_gaps) {
        for (int i = 0; i < 20; ++i) {
            set.rt.mark_invalid(rng.next_u64() % n);
            set.owf.mark_invalid(rng.next_u64() % n);
        }
    }
    return set;
}

double scale_of(const ObservableSet& set, std::size_t i) {
    return std::max({std::abs(set.owb.phase_rad[i]), std::abs(set.owf.phase_rad[i]),
                     std::abs(set.rt.phase_rad[i]), 1.0});
}

} // namespace

TEST_CASE("derived observables satisfy the defining algebra, gaps included") {
    for (bool gaps : {false, true}) {
        ObservableSet set = random_raw_set(4096, gaps ? 8 : 9, gaps);
        combine_observables(set);

        for (std::size_t i = 0; i < set.anc.size(); ++i) {
            const bool twb_pair_valid = set.twb1.is_valid(i) && set.twb2.is_valid(i);
            if (twb_pair_valid && set.twb3.is_valid(i)) {
                const double lhs = set.twb3.phase_rad[i];
                const double rhs = 0.5 * (set.twb1.phase_rad[i] - set.twb2.phase_rad[i]);
                CHECK(std::abs(lhs - rhs) <= 8e-16 * scale_of(set, i));
            }
            if (twb_pair_valid && set.twnf.is_valid(i)) {
                const double lhs = set.twnf.phase_rad[i];
                const double rhs = 0.5 * (set.twb1.phase_rad[i] + set.twb2.phase_rad[i]);
                CHECK(std::abs(lhs - rhs) <= 8e-16 * scale_of(set, i));
            }
            // Gap propagation: any gapped operand gaps the derived sample.
            CHECK(set.twu1.is_valid(i) == (set.anc.is_valid(i) && set.rt.is_valid(i)));
            CHECK(set.twb3.is_valid(i) == (set.owb.is_valid(i) && set.owf.is_valid(i)));
            CHECK(set.twnf.is_valid(i) ==
                  (set.owb.is_valid(i) && set.owf.is_valid(i) && set.rt.is_valid(i)));
        }
    }
}

TEST_CASE("combine rejects misaligned raw members") {
    ObservableSet set = random_raw_set(512, 4, false);
    set.owf.phase_rad.resize(256);
    CHECK_THROWS_AS(combine_observables(set), std::invalid_argument);
}

TEST_CASE("noise-free reciprocal simulation has an identically zero TWNF") {
    LinkConfig cfg;
    cfg.fiber_noise = NoiseSpec::single(-2, 25.0);
    cfg.temperature.diurnal_amplitude_k = 0.0;
    ObservableSet set = simulate_link(cfg, 60.0, 50.0, 41);
    combine_observables(set);
    for (double v : set.twnf.phase_rad) CHECK(v == 0.0);
}

TEST_CASE("temperature-only simulation matches the TWB interferometric prediction") {
    LinkConfig cfg;
    cfg.temperature.diurnal_amplitude_k = 2.0;
    cfg.temperature.diurnal_period_s = 600.0;
    ObservableSet set = simulate_link(cfg, 1200.0, 2.0, 6);
    combine_observables(set);

    std::vector<double> dT =
        gen_temperature(cfg.temperature, set.rt.size(), 0.5, derive_seed(6, 3));
    for (auto& v : dT) v -= cfg.temperature.mean_k;
    InterferometricLedger ledger = predict_interferometric_ledger(cfg, dT, 0.5);
    for (std::size_t i = 0; i < set.rt.size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(ledger.twb1.phase_rad[i]));
        CHECK(std::abs(set.twb1.phase_rad[i] - ledger.twb1.phase_rad[i]) <= tol);
        CHECK(std::abs(set.twb2.phase_rad[i] - ledger.twb2.phase_rad[i]) <= tol);
        CHECK(std::abs(set.twb3.phase_rad[i] - ledger.twb3.phase_rad[i]) <= tol);
        CHECK(std::abs(set.owf.phase_rad[i] - ledger.owf.phase_rad[i]) <= tol);
    }
}

TEST_CASE("interferometric ledger sign structure is exact") {
    LinkConfig cfg;
    std::vector<double> dT(256);
    Rng rng(12);
    for (auto& v : dT) v = rng.gaussian();
    InterferometricLedger ledger = predict_interferometric_ledger(cfg, dT, 1.0);

    for (std::size_t i = 0; i < dT.size(); ++i) {
        CHECK(ledger.twb2.phase_rad[i] == -ledger.twb1.phase_rad[i]); // exact negation
        CHECK(ledger.twb3.phase_rad[i] == ledger.twb1.phase_rad[i]);  // exact copy
        CHECK(ledger.twnf.phase_rad[i] == 0.0);
        // One-way interferometric terms sum to the round-trip term.
        const double sum = ledger.owb.phase_rad[i] + ledger.owf.phase_rad[i];
        CHECK(std::abs(sum - ledger.rt.phase_rad[i]) <=
              4e-16 * std::max(1.0, std::abs(ledger.rt.phase_rad[i])));
    }

    // TWB1 time-error step for the 1.5 K / 0.15 m reference case.
    LinkConfig ref;
    REQUIRE(ref.mismatch_m() == doctest::Approx(0.15).epsilon(1e-12));
    const std::vector<double> step{0.0, 1.5};
    InterferometricLedger lref = predict_interferometric_ledger(ref, step, 1.0);
    const double fs_step = (lref.twb1.time_error_s(1) - lref.twb1.time_error_s(0)) * 1e15;
    CHECK(fs_step == doctest::Approx(8.325).epsilon(1e-6));

    // Matched one-way arms null the forward interferometric term.
    LinkConfig matched;
    matched.l_oa_m = 0.4;
    matched.l_ob_m = 0.4;
    InterferometricLedger lm = predict_interferometric_ledger(matched, dT, 1.0);
    for (double v : lm.owf.phase_rad) CHECK(v == 0.0);
}

TEST_CASE("counted-data combination matches counting the combined phase") {
    LinkConfig cfg;
    cfg.fiber_noise = NoiseSpec::single(-2, 5.0);
    cfg.detection_floor = NoiseSpec::white_pm(1e-4);
    cfg.temperature.diurnal_amplitude_k = 0.3;
    cfg.temperature.diurnal_period_s = 120.0;
    ObservableSet set = simulate_link(cfg, 600.0, 10.0, 55);
    combine_observables(set);

    FrequencySeries anc = count_pi(set.anc, 1.0);
    FrequencySeries rt = count_pi(set.rt, 1.0);
    FrequencySeries owb = count_pi(set.owb, 1.0);
    FrequencySeries owf = count_pi(set.owf, 1.0);
    CountedObservables counted = combine_counted(anc, rt, owb, owf);

    FrequencySeries direct = count_pi(set.twnf, 1.0);
    REQUIRE(direct.size() == counted.twnf.size());
    for (std::size_t k = 0; k < direct.size(); ++k) {
        if (!direct.is_valid(k)) continue;
        CHECK(std::abs(counted.twnf.y[k] - direct.y[k]) <= 1e-24);
    }
}

TEST_CASE("reciprocity estimate: verdicts, gating and failure modes") {
    FrequencySeries y;
    y.gate_s = 1.0;
    y.carrier_hz = 194.4e12;
    y.kind = CounterKind::Lambda;
    Rng rng(64);
    y.y.resize(40000);
    for (auto& v : y.y) v = 1e-18 * rng.gaussian();

    ReciprocityResult r = reciprocity_estimate(y, 10000.0);
    CHECK(r.uncertainty == std::max(r.oadev_at_tau, r.mdev_at_tau));
    CHECK(r.consistent_with_zero == (std::abs(r.mean) <= r.uncertainty));
    CHECK(r.rendered.find("±") != std::string::npos);

    // A blatant offset cannot be consistent with zero.
    FrequencySeries shifted = y;
    for (auto& v : shifted.y) v += 1e-15;
    ReciprocityResult r2 = reciprocity_estimate(shifted, 10000.0);
    CHECK(!r2.consistent_with_zero);
    CHECK(std::abs(r2.mean / 1e-15 - 1.0) < 1e-2);

    // Record shorter than 4 tau_avg.
    CHECK_THROWS_AS(reciprocity_estimate(y, 20000.0), std::invalid_argument);

    // More than half the record gapped.
    FrequencySeries holey = y;
    for (std::size_t i = 0; i < holey.size(); i += 3) {
        holey.mark_invalid(i);
        if (i + 1 < holey.size()) holey.mark_invalid(i + 1);
    }
    CHECK_THROWS_AS(reciprocity_estimate(holey, 10000.0), std::invalid_argument);
}
