#include "fiberlink/noise.hpp"

#include "fiberlink/errors.hpp"
#include "fiberlink/fft.hpp"
#include "fiberlink/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fiberlink {

namespace {

// Colored terms below this length leave no resolved decade between the first
// Fourier bin and the band of interest (ten periods of the lowest decade).
constexpr std::size_t kMinColoredSamples = 100;

void linear_detrend(std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return;
    // Least-squares line against sample index.
    const double mean_i = 0.5 * static_cast<double>(n - 1);
    double sxx = 0.0, sxy = 0.0, mean_x = 0.0;
    for (double v : x) mean_x += v;
    mean_x /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(i) - mean_i;
        sxx += di * di;
        sxy += di * (x[i] - mean_x);
    }
    const double slope = sxy / sxx;
    for (std::size_t i = 0; i < n; ++i)
        x[i] -= mean_x + slope * (static_cast<double>(i) - mean_i);
}

} // namespace

bool NoiseSpec::is_silent() const {
    return std::all_of(terms.begin(), terms.end(),
                       [](const NoiseTerm& t) { return t.level_rad2_hz == 0.0; });
}

bool NoiseSpec::has_colored_terms() const {
    return std::any_of(terms.begin(), terms.end(),
                       [](const NoiseTerm& t) { return t.alpha <= -1 && t.level_rad2_hz > 0.0; });
}

double NoiseSpec::psd_at(double f_hz) const {
    if (f_hz <= 0.0) return 0.0;
    if (cutoff_hz > 0.0 && f_hz > cutoff_hz) return 0.0;
    double s = 0.0;
    for (const auto& t : terms) s += t.level_rad2_hz * std::pow(f_hz, t.alpha);
    return s;
}

NoiseSpec NoiseSpec::scaled(double power_factor) const {
    NoiseSpec out = *this;
    for (auto& t : out.terms) t.level_rad2_hz *= power_factor;
    return out;
}

void NoiseSpec::validate(const std::string& where) const {
    for (const auto& t : terms) {
        if (t.alpha > 0 || t.alpha < -4)
            throw std::invalid_argument(where + ": unsupported PSD exponent alpha=" +
                                        std::to_string(t.alpha) + " (supported: 0..-4)");
        if (!(t.level_rad2_hz >= 0.0))
            throw std::invalid_argument(where + ": negative or non-finite PSD level");
    }
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument(where + ": carrier frequency must be positive");
    if (cutoff_hz < 0.0)
        throw std::invalid_argument(where + ": cutoff frequency must be >= 0");
}

NoiseSpec NoiseSpec::white_pm(double level_rad2_hz, double carrier_hz) {
    return NoiseSpec{{{0, level_rad2_hz}}, carrier_hz, 0.0};
}

NoiseSpec NoiseSpec::single(int alpha, double level_rad2_hz, double carrier_hz) {
    return NoiseSpec{{{alpha, level_rad2_hz}}, carrier_hz, 0.0};
}

bool TemperatureProcess::is_constant() const {
    return diurnal_amplitude_k == 0.0 && linear_drift_k_per_s == 0.0 &&
           random_walk_level_k2_hz == 0.0;
}

void TemperatureProcess::validate(const std::string& where) const {
    if (!(diurnal_amplitude_k >= 0.0))
        throw std::invalid_argument(where + ": diurnal amplitude must be >= 0");
    if (!(diurnal_period_s >= 0.0))
        throw std::invalid_argument(where + ": diurnal period must be >= 0");
    if (diurnal_amplitude_k > 0.0 && diurnal_period_s == 0.0)
        throw std::invalid_argument(where + ": diurnal amplitude set but period is zero");
    if (!(random_walk_level_k2_hz >= 0.0))
        throw std::invalid_argument(where + ": random-walk level must be >= 0");
}

PhaseSeries gen_powerlaw(const NoiseSpec& spec, std::size_t n, double dt_s, std::uint64_t seed) {
    spec.validate("gen_powerlaw");
    if (n < 2) throw std::invalid_argument("gen_powerlaw: need at least 2 samples");
    if (!(dt_s > 0.0)) throw std::invalid_argument("gen_powerlaw: dt must be positive");
    const double f_nyquist = 0.5 / dt_s;
    if (spec.cutoff_hz > f_nyquist * (1.0 + 1e-12))
        throw std::invalid_argument("gen_powerlaw: cutoff above the Nyquist of the series");
    if (spec.has_colored_terms() && n < kMinColoredSamples)
        throw std::invalid_argument(
            "gen_powerlaw: record too short to resolve the requested low-frequency terms "
            "(fewer than 10 periods of the lowest resolved decade)");

    PhaseSeries out;
    out.t0_s = 0.0;
    out.dt_s = dt_s;
    out.carrier_hz = spec.carrier_hz;
    out.phase_rad.assign(n, 0.0);
    if (spec.is_silent()) return out;

    const double df = 1.0 / (static_cast<double>(n) * dt_s);
    std::vector<double> hc(n, 0.0); // halfcomplex spectrum; DC stays zero
    Rng rng(seed);

    // Interior bins carry independent cosine/sine amplitudes with variance
    // S(f_k) * df each; the Nyquist bin (even n) is real-only.
    const std::size_t k_top = (n - 1) / 2;
    for (std::size_t k = 1; k <= k_top; ++k) {
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        const double amp = std::sqrt(spec.psd_at(static_cast<double>(k) * df) * df);
        hc[k] = 0.5 * amp * a;
        hc[n - k] = -0.5 * amp * b;
    }
    if (n % 2 == 0) {
        const double g = rng.gaussian();
        hc[n / 2] = std::sqrt(spec.psd_at(f_nyquist) * df) * g;
    }

    fft::halfcomplex_backward(hc);
    out.phase_rad = std::move(hc);

    // Steep spectra pick up a spurious ramp from the missing sub-DC content.
    bool steep = std::any_of(spec.terms.begin(), spec.terms.end(), [](const NoiseTerm& t) {
        return t.alpha <= -2 && t.level_rad2_hz > 0.0;
    });
    if (steep) linear_detrend(out.phase_rad);
    return out;
}

std::vector<double> gen_temperature(const TemperatureProcess& proc, std::size_t n, double dt_s,
                                    std::uint64_t seed) {
    proc.validate("gen_temperature");
    if (n < 1) throw std::invalid_argument("gen_temperature: need at least 1 sample");
    if (!(dt_s > 0.0)) throw std::invalid_argument("gen_temperature: dt must be positive");

    std::vector<double> t_k(n, proc.mean_k);
    if (proc.diurnal_amplitude_k > 0.0) {
        const double omega = kTwoPi / proc.diurnal_period_s;
        for (std::size_t i = 0; i < n; ++i)
            t_k[i] += proc.diurnal_amplitude_k * std::sin(omega * static_cast<double>(i) * dt_s);
    }
    if (proc.linear_drift_k_per_s != 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            t_k[i] += proc.linear_drift_k_per_s * static_cast<double>(i) * dt_s;
    }
    if (proc.random_walk_level_k2_hz > 0.0) {
        Rng rng = Rng::substream(seed, 0);
        const double step = std::sqrt(proc.random_walk_level_k2_hz * dt_s);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            t_k[i] += acc;
            acc += step * rng.gaussian();
        }
    }
    return t_k;
}

std::pair<PhaseSeries, PhaseSeries> gen_correlated_pair(const NoiseSpec& spec, double rho,
                                                        std::size_t n, double dt_s,
                                                        std::uint64_t seed) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("gen_correlated_pair: rho must lie in [0, 1]");

    // PSD levels add in power, so the common/independent split is linear in rho.
    const NoiseSpec common_spec = spec.scaled(rho);
    const NoiseSpec indep_spec = spec.scaled(1.0 - rho);

    PhaseSeries common = gen_powerlaw(common_spec, n, dt_s, derive_seed(seed, 0));
    PhaseSeries first = gen_powerlaw(indep_spec, n, dt_s, derive_seed(seed, 1));
    PhaseSeries second = gen_powerlaw(indep_spec, n, dt_s, derive_seed(seed, 2));

    for (std::size_t i = 0; i < n; ++i) {
        first.phase_rad[i] += common.phase_rad[i];
        second.phase_rad[i] += common.phase_rad[i];
    }
    return {std::move(first), std::move(second)};
}

} // namespace fiberlink
