#include "fiberlink/counters.hpp"
#include "fiberlink/noise.hpp"
#include "fiberlink/rng.hpp"
#include "fiberlink/stats.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace fiberlink;

namespace {

FrequencySeries white_fm_counts(double h0, std::size_t n_gates, std::uint64_t seed) {
    // S_y(f) = h0 corresponds to S_phi(f) = nu^2 h0 / f^2.
    const double nu = 194.4e12;
    PhaseSeries x = gen_powerlaw(NoiseSpec::single(-2, h0 * nu * nu, nu), n_gates + 1, 1.0, seed);
    return count_pi(x, 1.0);
}

// Phase oversampled well past the gate, the way the counters see it in
// operation; a gate-rate synthesis misses the aliased content of a
// continuous process and biases the shortest averaging times.
FrequencySeries white_fm_counts_oversampled(double h0, std::size_t n_gates,
                                            std::uint64_t seed) {
    const double nu = 194.4e12;
    const double rate = 100.0;
    PhaseSeries x = gen_powerlaw(NoiseSpec::single(-2, h0 * nu * nu, nu),
                                 n_gates * static_cast<std::size_t>(rate) + 1, 1.0 / rate,
                                 seed);
    return count_pi(x, 1.0);
}

} // namespace

TEST_CASE("constant input has zero deviation everywhere") {
    FrequencySeries y;
    y.gate_s = 1.0;
    y.carrier_hz = 194.4e12;
    y.y.assign(1024, 4.2e-16);
    for (DeviationEstimator est :
         {DeviationEstimator::Adev, DeviationEstimator::Oadev, DeviationEstimator::Mdev}) {
        StabilityCurve c = stability_deviation(y, est);
        REQUIRE(!c.points.empty());
        for (const auto& p : c.points) CHECK(p.dev == 0.0);
    }
}

TEST_CASE("white FM: ADev follows sqrt(h0 / (2 tau))") {
    const double h0 = 2e-26;
    FrequencySeries y = white_fm_counts_oversampled(h0, 8192, 404);
    StabilityCurve c = stability_deviation(y, DeviationEstimator::Oadev);
    REQUIRE(c.points.size() >= 8);
    for (std::size_t i = 0; i < 6; ++i) {
        const double tau = c.points[i].tau_s;
        const double expected = std::sqrt(h0 / (2.0 * tau)); // 1e-13 at tau = 1 s
        CHECK(oracles::close_rel(c.points[i].dev, expected, 0.10));
    }
    CHECK(oracles::close_rel(c.points[0].dev, 1e-13, 0.10));
}

TEST_CASE("overlapping estimator agrees with the brute-force Allan oracle") {
    FrequencySeries y = white_fm_counts(1e-26, 4096, 11);
    for (std::size_t m : {1u, 4u, 16u}) {
        const double taus[1] = {static_cast<double>(m)};
        StabilityCurve c = stability_deviation(y, DeviationEstimator::Adev, taus);
        REQUIRE(c.points.size() == 1);
        const double oracle = oracles::adev_bruteforce(y.y, m);
        CHECK(oracles::close_rel(c.points[0].dev, oracle, 1e-10));
    }
}

TEST_CASE("white PM: MDEV slope is -3/2 and pi-ADEV slope is -1") {
    PhaseSeries x = gen_powerlaw(NoiseSpec::white_pm(1e-2), 6401, 1.0, 77);
    FrequencySeries y = count_pi(x, 1.0);
    StabilityCurve mdev = stability_deviation(y, DeviationEstimator::Mdev);
    SlopeFit mfit = fit_loglog_slope(mdev, 1.0, 100.0);
    CHECK(mfit.exponent == doctest::Approx(-1.5).epsilon(0.067));
    StabilityCurve adev = stability_deviation(y, DeviationEstimator::Oadev);
    SlopeFit afit = fit_loglog_slope(adev, 1.0, 100.0);
    CHECK(afit.exponent == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("estimator closure across the PSD-to-deviation slope map") {
    // white PM -> ADEV ~ tau^-1, white FM -> tau^-1/2, flicker FM -> tau^0,
    // each within 0.15 of the mapping.
    struct Case {
        int alpha;
        double adev_slope;
    };
    for (const Case c : {Case{0, -1.0}, Case{-2, -0.5}, Case{-3, 0.0}}) {
        CAPTURE(c.alpha);
        PhaseSeries x = gen_powerlaw(NoiseSpec::single(c.alpha, 1e-3), (1u << 17) + 1, 1.0,
                                     500 + c.alpha);
        FrequencySeries y = count_pi(x, 1.0);
        StabilityCurve curve = stability_deviation(y, DeviationEstimator::Oadev);
        SlopeFit fit = fit_loglog_slope(curve, 2.0, 2000.0);
        CHECK(std::abs(fit.exponent - c.adev_slope) < 0.15);
    }
}

TEST_CASE("taus beyond a quarter of the record are omitted") {
    FrequencySeries y = white_fm_counts(1e-26, 1024, 3);
    StabilityCurve c = stability_deviation(y, DeviationEstimator::Oadev);
    for (const auto& p : c.points) CHECK(p.tau_s <= 256.0);
    const double too_long[1] = {512.0};
    CHECK(stability_deviation(y, DeviationEstimator::Oadev, too_long).points.empty());
}

TEST_CASE("scale equivariance is exact for power-of-two factors") {
    FrequencySeries y = white_fm_counts(1e-26, 2048, 51);
    FrequencySeries scaled = y;
    for (auto& v : scaled.y) v *= 4.0;
    StabilityCurve c1 = stability_deviation(y, DeviationEstimator::Mdev);
    StabilityCurve c2 = stability_deviation(scaled, DeviationEstimator::Mdev);
    REQUIRE(c1.points.size() == c2.points.size());
    for (std::size_t i = 0; i < c1.points.size(); ++i)
        CHECK(c2.points[i].dev == 4.0 * c1.points[i].dev);
    CHECK(mean_valid(scaled) == 4.0 * mean_valid(y));
}

TEST_CASE("small random gaps move deviations by less than the error bar") {
    FrequencySeries y = white_fm_counts(1e-26, 20000, 15);
    FrequencySeries gapped = y;
    Rng rng(99);
    std::size_t removed = 0;
    while (removed < 150) { // 0.75% of samples
        const auto i = static_cast<std::size_t>(rng.next_u64() % gapped.size());
        if (gapped.is_valid(i)) {
            gapped.mark_invalid(i);
            ++removed;
        }
    }
    StabilityCurve full = stability_deviation(y, DeviationEstimator::Oadev);
    StabilityCurve cut = stability_deviation(gapped, DeviationEstimator::Oadev);
    REQUIRE(!cut.points.empty());
    for (std::size_t i = 0; i < std::min(full.points.size(), cut.points.size()); ++i) {
        CAPTURE(full.points[i].tau_s);
        CHECK(std::abs(full.points[i].dev - cut.points[i].dev) <
              full.points[i].ci_1sigma + cut.points[i].ci_1sigma);
    }
}

TEST_CASE("phase PSD: sinusoid line carries its a^2/2 power") {
    const std::size_t n = 16384;
    const double fs = 1.0;
    const double f0 = fs * 128.0 / 4096.0; // lands on a segment bin
    const double a = 0.7;
    PhaseSeries x;
    x.dt_s = 1.0 / fs;
    x.carrier_hz = 194.4e12;
    x.phase_rad.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        x.phase_rad[i] = a * std::sin(kTwoPi * f0 * static_cast<double>(i) / fs);
    Psd psd = phase_psd(x);
    double line_power = 0.0;
    double peak_f = 0.0, peak_s = 0.0;
    const double df = psd.f_hz[1] - psd.f_hz[0];
    for (std::size_t i = 0; i < psd.f_hz.size(); ++i) {
        if (std::abs(psd.f_hz[i] - f0) <= 10.0 * df) line_power += psd.s_rad2_hz[i] * df;
        if (psd.s_rad2_hz[i] > peak_s) {
            peak_s = psd.s_rad2_hz[i];
            peak_f = psd.f_hz[i];
        }
    }
    CHECK(oracles::close_rel(peak_f, f0, 1e-9));
    CHECK(oracles::close_rel(line_power, a * a / 2.0, 0.05));
}

TEST_CASE("phase PSD is Parseval-consistent and the two methods agree") {
    PhaseSeries x = gen_powerlaw(NoiseSpec::white_pm(2.5e-3), 1u << 16, 0.5, 21);
    const double var = oracles::variance(x.phase_rad);

    for (PsdMethod method : {PsdMethod::Welch, PsdMethod::BlackmanTukey}) {
        PsdParams params;
        params.method = method;
        Psd psd = phase_psd(x, params);
        double integral = 0.0;
        for (std::size_t i = 1; i < psd.f_hz.size(); ++i)
            integral += psd.s_rad2_hz[i] * (psd.f_hz[i] - psd.f_hz[i - 1]);
        CAPTURE(to_string(method));
        CHECK(oracles::close_rel(integral, var, 0.10));
    }

    PsdParams bt;
    bt.method = PsdMethod::BlackmanTukey;
    Psd w = phase_psd(x);
    Psd b = phase_psd(x, bt);
    auto band_mean = [](const Psd& p, double lo, double hi) {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < p.f_hz.size(); ++i)
            if (p.f_hz[i] >= lo && p.f_hz[i] <= hi) {
                s += p.s_rad2_hz[i];
                ++n;
            }
        return s / static_cast<double>(n);
    };
    CHECK(oracles::close_rel(band_mean(w, 0.05, 0.5), band_mean(b, 0.05, 0.5), 0.25));
}

TEST_CASE("phase PSD rejects gapped or too-short input") {
    PhaseSeries x = gen_powerlaw(NoiseSpec::white_pm(1e-3), 1024, 1.0, 2);
    x.mark_invalid(3);
    CHECK_THROWS_AS(phase_psd(x), std::invalid_argument);
    PhaseSeries tiny;
    tiny.dt_s = 1.0;
    tiny.phase_rad.assign(7, 0.0);
    CHECK_THROWS_AS(phase_psd(tiny), std::invalid_argument);
}

TEST_CASE("log-log slope fit recovers an exact power law to machine precision") {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 8; ++i) {
        const double x = std::pow(2.0, i);
        xs.push_back(x);
        ys.push_back(3.7 * std::pow(x, -1.75));
    }
    SlopeFit fit = fit_loglog_slope(xs, ys, 0.0, 1e9);
    CHECK(fit.exponent == doctest::Approx(-1.75).epsilon(1e-12));
    CHECK(fit.stderr_exponent < 1e-12);

    CHECK_THROWS_AS(fit_loglog_slope(xs, ys, 2.0, 8.0), std::invalid_argument); // 2 points only
    ys[3] = -1.0;
    CHECK_THROWS_AS(fit_loglog_slope(xs, ys, 0.0, 1e9), std::invalid_argument);
}

TEST_CASE("cross correlation endpoints and failure modes") {
    std::vector<double> a(256), b(256);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::sin(0.1 * static_cast<double>(i)) + 0.3 * static_cast<double>(i % 7);
        b[i] = -a[i];
    }
    CHECK(cross_correlation(a, a) == 1.0);
    CHECK(cross_correlation(a, b) == -1.0);

    std::vector<double> flat(256, 1.0);
    CHECK_THROWS_AS(cross_correlation(a, flat), std::invalid_argument);
    std::vector<double> tiny(50, 0.0);
    CHECK_THROWS_AS(cross_correlation(tiny, tiny), std::invalid_argument);

    CHECK(format_correlation(0.5) == "r = 0.500000");
    CHECK(format_correlation(1.0 - 1e-4).find("1 - r") != std::string::npos);
}

TEST_CASE("accuracy report: constant offset row and table layout") {
    FrequencySeries y;
    y.gate_s = 1.0;
    y.carrier_hz = 194.4e12;
    y.kind = CounterKind::Lambda;
    y.y.assign(4096, 1e-17);

    AccuracyReport report = accuracy_report({{"TWB3", &y}}, 1024.0);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].mean == 1e-17);
    CHECK(report.rows[0].oadev_at_tau == 0.0);
    CHECK(report.rows[0].mdev_at_tau == 0.0);
    CHECK(report.rows[0].gap_fraction == 0.0);

    const std::string table = render_accuracy_table(report);
    CHECK(table.find("TWB3") != std::string::npos);
    CHECK(table.find("Lambda  Mean") != std::string::npos);
    CHECK(table.find("MDEV at 1024 s") != std::string::npos);

    FrequencySeries brief = y;
    brief.y.resize(100);
    CHECK_THROWS_AS(accuracy_report({{"TWB3", &brief}}, 1024.0), std::invalid_argument);
}

TEST_CASE("uptime fractions") {
    FrequencySeries y;
    y.gate_s = 1.0;
    y.y.assign(1000, 1e-18);
    CHECK(uptime(y) == 1.0);
    for (std::size_t i = 0; i < 35; ++i) y.mark_invalid(i * 7);
    CHECK(uptime(y) == doctest::Approx(0.965).epsilon(1e-12));
    for (std::size_t i = 0; i < y.size(); ++i) y.mark_invalid(i);
    CHECK(uptime(y) == 0.0);
}

TEST_CASE("value(+-uncertainty) rendering matches the reporting style") {
    CHECK(format_value_pm(3.1e-20, 3.9e-20) == "3.1(±3.9)×10⁻²⁰");
    CHECK(format_value_pm(-2.2e-17, 1.0e-17) == "-2.2(±1.0)×10⁻¹⁷");
    CHECK(format_value_pm(0.0, 0.0) == "0.0(±0.0)");
}
