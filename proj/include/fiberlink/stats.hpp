#pragma once

#include "fiberlink/series.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fiberlink {

enum class DeviationEstimator { Adev, Oadev, Mdev };

std::string to_string(DeviationEstimator e);
DeviationEstimator deviation_estimator_from_string(const std::string& s);

struct StabilityPoint {
    double tau_s = 0.0;
    double dev = 0.0;
    double ci_1sigma = 0.0; // one-sigma error bar from the chi^2/edf approximation
    double edf = 0.0;
    std::size_t n_terms = 0;
};

struct StabilityCurve {
    DeviationEstimator estimator = DeviationEstimator::Oadev;
    CounterKind source_kind = CounterKind::Pi;
    std::vector<StabilityPoint> points;

    std::vector<double> taus() const;
    std::vector<double> devs() const;
};

/// Octave-spaced averaging times gate, 2*gate, ... capped at span/4.
std::vector<double> octave_taus(double gate_s, double span_s);

/// Overlapping (or strided) Allan and modified Allan deviations with
/// gap-skipping: differences that cross a gap are dropped, and each point
/// needs at least 4 contributing differences or it is omitted. Taus beyond a
/// quarter of the record are omitted as well.
///
/// Estimators run on whatever series is supplied, including Lambda-counted
/// data. Note the known bias of the ADEV of Lambda data at short averaging
/// times (the triangular weighting suppresses white PM); Pi- and Lambda-ADEV
/// converge at long integration times.
StabilityCurve stability_deviation(const FrequencySeries& y, DeviationEstimator est,
                                   std::span<const double> taus_s = {});

/// Single-tau convenience; empty when the tau cannot be formed.
std::optional<StabilityPoint> deviation_at(const FrequencySeries& y, DeviationEstimator est,
                                           double tau_s);

enum class PsdMethod { Welch, BlackmanTukey };

std::string to_string(PsdMethod m);

struct PsdParams {
    PsdMethod method = PsdMethod::Welch;
    int welch_segments = 4;        // segments before 50% overlap
    double bt_lag_fraction = 0.25; // Blackman-Tukey max lag as a fraction of n
};

struct Psd {
    PsdMethod method = PsdMethod::Welch;
    std::vector<double> f_hz;
    std::vector<double> s_rad2_hz; // one-sided
};

/// One-sided phase PSD of a gap-free series, linearly detrended per segment.
/// Parseval-consistent: sum(S) * df tracks the variance of the detrended data.
Psd phase_psd(const PhaseSeries& x, const PsdParams& params = {});

struct SlopeFit {
    double exponent = 0.0;
    double stderr_exponent = 0.0;
    std::size_t n_points = 0;
};

/// Least-squares slope of log10(y) against log10(x) restricted to x in
/// [lo, hi]. Requires at least 4 points in range, all positive.
SlopeFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys, double lo,
                          double hi);
SlopeFit fit_loglog_slope(const Psd& psd, double f_lo_hz, double f_hi_hz);
SlopeFit fit_loglog_slope(const StabilityCurve& curve, double tau_lo_s, double tau_hi_s);

/// Pearson correlation over jointly valid samples (needs >= 100 of them).
double cross_correlation(std::span<const double> a, std::span<const double> b);
double cross_correlation(const FrequencySeries& a, const FrequencySeries& b);
double cross_correlation(const PhaseSeries& a, const PhaseSeries& b);

/// Renders r, switching to "1 - r" once r > 0.999 for legibility.
std::string format_correlation(double r);

struct AccuracyRow {
    std::string observable;
    CounterKind kind = CounterKind::Pi;
    double mean = 0.0;
    double oadev_at_tau = 0.0;
    double mdev_at_tau = 0.0;
    std::size_t n_samples = 0;
    double gap_fraction = 0.0;
};

struct AccuracyReport {
    double tau_avg_s = 0.0;
    std::vector<AccuracyRow> rows;
};

/// Per-observable mean offset and long-term OADEV/MDEV at the averaging time.
/// Each series must be at least 4 * tau_avg long.
AccuracyReport accuracy_report(const std::vector<std::pair<std::string, const FrequencySeries*>>& obs,
                               double tau_avg_s);

/// Text table: one column per observable, Mean / ADEV / MDEV row blocks per
/// counter kind.
std::string render_accuracy_table(const AccuracyReport& report);

/// Valid samples over scheduled samples.
double uptime(const FrequencySeries& y);

/// Mean of the valid samples.
double mean_valid(const FrequencySeries& y);

/// "3.1(+-3.9)x10^-20" style rendering with a shared decimal exponent
/// (UTF-8 superscripts).
std::string format_value_pm(double value, double uncertainty);

} // namespace fiberlink
