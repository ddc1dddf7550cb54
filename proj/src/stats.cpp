#include "fiberlink/stats.hpp"

#include "fiberlink/errors.hpp"
#include "fiberlink/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fiberlink {

namespace {

// Time-error samples reconstructed per contiguous run of valid y samples.
// Each run gets its own arbitrary phase origin; estimators only ever form
// differences inside one run.
struct PhasePath {
    std::vector<double> x_s;        // size n_y + 1, zero where undefined
    std::vector<std::int32_t> run;  // run id per x index, -1 where undefined
    double tau0_s = 0.0;
};

PhasePath build_phase_path(const FrequencySeries& y) {
    const std::size_t n = y.size();
    PhasePath p;
    p.tau0_s = y.gate_s;
    p.x_s.assign(n + 1, 0.0);
    p.run.assign(n + 1, -1);
    // Allan-family statistics are invariant under a constant frequency shift;
    // integrating y minus a reference sample keeps the path small and makes a
    // constant series integrate to exact zeros.
    double ref = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (y.is_valid(j)) {
            ref = y.y[j];
            break;
        }
    }
    std::int32_t run = -1;
    bool in_run = false;
    for (std::size_t j = 0; j < n; ++j) {
        if (y.is_valid(j)) {
            if (!in_run) {
                ++run;
                in_run = true;
                p.x_s[j] = 0.0;
                p.run[j] = run;
            }
            p.x_s[j + 1] = p.x_s[j] + (y.y[j] - ref) * y.gate_s;
            p.run[j + 1] = run;
        } else {
            in_run = false;
        }
    }
    return p;
}

// Equivalent degrees of freedom, white-FM approximation. Good enough for
// one-sigma error bars; the verdict logic never relies on it.
double edf_white_fm(double n_points, double m) {
    if (n_points <= 2.0 * m + 1.0) return 1.0;
    const double a = 3.0 * (n_points - 1.0) / (2.0 * m) - 2.0 * (n_points - 2.0) / n_points;
    const double b = 4.0 * m * m / (4.0 * m * m + 5.0);
    return std::max(1.0, a * b);
}

StabilityPoint allan_point(const PhasePath& p, std::size_t m, double tau_s, bool overlapping) {
    StabilityPoint pt;
    pt.tau_s = tau_s;
    const std::size_t nx = p.x_s.size();
    if (nx < 2 * m + 1) return pt;
    double sum = 0.0;
    std::size_t count = 0;
    const std::size_t stride = overlapping ? 1 : m;
    for (std::size_t i = 0; i + 2 * m < nx; i += stride) {
        if (p.run[i] < 0 || p.run[i] != p.run[i + 2 * m]) continue;
        const double d = p.x_s[i + 2 * m] - 2.0 * p.x_s[i + m] + p.x_s[i];
        sum += d * d;
        ++count;
    }
    if (count == 0) return pt;
    const double md = static_cast<double>(m) * p.tau0_s;
    pt.dev = std::sqrt(sum / (2.0 * md * md * static_cast<double>(count)));
    pt.n_terms = count;
    pt.edf = edf_white_fm(static_cast<double>(count) * stride + 2.0 * m, static_cast<double>(m));
    pt.ci_1sigma = pt.dev / std::sqrt(2.0 * pt.edf);
    return pt;
}

StabilityPoint mdev_point(const PhasePath& p, std::size_t m, double tau_s) {
    StabilityPoint pt;
    pt.tau_s = tau_s;
    const std::size_t nx = p.x_s.size();
    if (nx < 3 * m) return pt;
    // Prefix sums make the inner phase average an O(1) four-term stencil.
    std::vector<double> s(nx + 1, 0.0);
    for (std::size_t i = 0; i < nx; ++i) s[i + 1] = s[i] + p.x_s[i];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j + 3 * m < nx + 1; ++j) {
        if (p.run[j] < 0 || p.run[j] != p.run[j + 3 * m - 1]) continue;
        const double d = s[j + 3 * m] - 3.0 * s[j + 2 * m] + 3.0 * s[j + m] - s[j];
        sum += d * d;
        ++count;
    }
    if (count == 0) return pt;
    const double md = static_cast<double>(m) * p.tau0_s;
    const double m2 = static_cast<double>(m) * static_cast<double>(m);
    pt.dev = std::sqrt(sum / (2.0 * m2 * md * md * static_cast<double>(count)));
    pt.n_terms = count;
    pt.edf = edf_white_fm(static_cast<double>(count) + 3.0 * m, static_cast<double>(m));
    pt.ci_1sigma = pt.dev / std::sqrt(2.0 * pt.edf);
    return pt;
}

void linear_detrend_span(std::span<double> x) {
    const std::size_t n = x.size();
    if (n < 2) return;
    const double mean_i = 0.5 * static_cast<double>(n - 1);
    double mean_x = 0.0;
    for (double v : x) mean_x += v;
    mean_x /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(i) - mean_i;
        sxx += di * di;
        sxy += di * (x[i] - mean_x);
    }
    const double slope = sxy / sxx;
    for (std::size_t i = 0; i < n; ++i)
        x[i] -= mean_x + slope * (static_cast<double>(i) - mean_i);
}

Psd welch_psd(std::span<const double> x, double fs_hz, int n_segments) {
    const std::size_t n = x.size();
    if (n_segments < 1) throw std::invalid_argument("phase_psd: need at least 1 segment");
    const std::size_t seg_len = n / static_cast<std::size_t>(n_segments);
    if (seg_len < 8) throw std::invalid_argument("phase_psd: segment shorter than 8 samples");
    const std::size_t hop = std::max<std::size_t>(1, seg_len / 2);
    const std::size_t n_psd = seg_len / 2;

    // Periodic Hann window.
    std::vector<double> window(seg_len);
    double norm = 0.0;
    for (std::size_t j = 0; j < seg_len; ++j) {
        window[j] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(j) /
                                          static_cast<double>(seg_len)));
        norm += window[j] * window[j];
    }

    std::vector<double> acc(n_psd + 1, 0.0);
    std::vector<double> seg(seg_len);
    std::size_t n_avg = 0;
    for (std::size_t start = 0; start + seg_len <= n; start += hop) {
        std::copy(x.begin() + start, x.begin() + start + seg_len, seg.begin());
        linear_detrend_span(seg);
        for (std::size_t j = 0; j < seg_len; ++j) seg[j] *= window[j];
        auto spec = fft::real_forward(seg);
        for (std::size_t k = 0; k <= n_psd; ++k) acc[k] += std::norm(spec[k]);
        ++n_avg;
    }

    Psd out;
    out.method = PsdMethod::Welch;
    const double scale = 1.0 / (fs_hz * norm * static_cast<double>(n_avg));
    out.f_hz.reserve(n_psd);
    out.s_rad2_hz.reserve(n_psd);
    for (std::size_t k = 1; k <= n_psd; ++k) {
        const bool nyquist = (seg_len % 2 == 0) && (k == n_psd);
        out.f_hz.push_back(static_cast<double>(k) * fs_hz / static_cast<double>(seg_len));
        out.s_rad2_hz.push_back(acc[k] * scale * (nyquist ? 1.0 : 2.0));
    }
    return out;
}

Psd blackman_tukey_psd(std::span<const double> x, double fs_hz, double lag_fraction) {
    const std::size_t n = x.size();
    std::vector<double> detrended(x.begin(), x.end());
    linear_detrend_span(detrended);
    std::size_t max_lag = static_cast<std::size_t>(
        std::llround(lag_fraction * static_cast<double>(n)));
    max_lag = std::clamp<std::size_t>(max_lag, 8, n - 1);

    auto acov = fft::autocovariance(detrended, max_lag);

    // Bartlett lag window keeps the estimate non-negative.
    const std::size_t m2 = 2 * max_lag;
    std::vector<double> sym(m2, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const double w = 1.0 - static_cast<double>(k) / static_cast<double>(max_lag);
        const double v = acov[k] * w;
        sym[k] = v;
        if (k > 0 && k < max_lag) sym[m2 - k] = v;
    }
    auto spec = fft::real_forward(sym);

    Psd out;
    out.method = PsdMethod::BlackmanTukey;
    const double dt = 1.0 / fs_hz;
    out.f_hz.reserve(max_lag);
    out.s_rad2_hz.reserve(max_lag);
    for (std::size_t j = 1; j <= max_lag; ++j) {
        const double one_sided = (j == max_lag) ? 1.0 : 2.0;
        out.f_hz.push_back(static_cast<double>(j) * fs_hz / static_cast<double>(m2));
        out.s_rad2_hz.push_back(std::max(0.0, spec[j].real()) * dt * one_sided);
    }
    return out;
}

std::string superscript(int value) {
    static const char* digits[10] = {"⁰", "¹", "²", "³", "⁴",
                                     "⁵", "⁶", "⁷", "⁸", "⁹"};
    std::string plain = std::to_string(value);
    std::string out;
    for (char c : plain) {
        if (c == '-') out += "⁻";
        else out += digits[c - '0'];
    }
    return out;
}

} // namespace

std::string to_string(DeviationEstimator e) {
    switch (e) {
        case DeviationEstimator::Adev: return "adev";
        case DeviationEstimator::Oadev: return "oadev";
        case DeviationEstimator::Mdev: return "mdev";
    }
    return "?";
}

DeviationEstimator deviation_estimator_from_string(const std::string& s) {
    if (s == "adev" || s == "ADEV") return DeviationEstimator::Adev;
    if (s == "oadev" || s == "OADEV") return DeviationEstimator::Oadev;
    if (s == "mdev" || s == "MDEV") return DeviationEstimator::Mdev;
    throw data_error("unknown deviation estimator '" + s + "'");
}

std::string to_string(PsdMethod m) {
    return m == PsdMethod::Welch ? "welch" : "blackman_tukey";
}

std::vector<double> StabilityCurve::taus() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.tau_s);
    return out;
}

std::vector<double> StabilityCurve::devs() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.dev);
    return out;
}

std::vector<double> octave_taus(double gate_s, double span_s) {
    std::vector<double> taus;
    for (double tau = gate_s; tau <= span_s / 4.0 * (1.0 + 1e-9); tau *= 2.0)
        taus.push_back(tau);
    return taus;
}

StabilityCurve stability_deviation(const FrequencySeries& y, DeviationEstimator est,
                                   std::span<const double> taus_s) {
    if (y.size() < 8)
        throw std::invalid_argument("stability_deviation: need at least 8 samples");
    std::vector<double> default_taus;
    if (taus_s.empty()) {
        default_taus = octave_taus(y.gate_s, y.duration_s());
        taus_s = default_taus;
    }

    const PhasePath path = build_phase_path(y);
    const double span = y.duration_s();

    StabilityCurve curve;
    curve.estimator = est;
    curve.source_kind = y.kind;
    std::vector<std::size_t> used_m;
    for (double tau : taus_s) {
        const auto m = static_cast<std::size_t>(std::llround(tau / y.gate_s));
        if (m < 1) continue;
        if (tau > span / 4.0 * (1.0 + 1e-9)) continue; // tau beyond T/4 is omitted
        if (std::find(used_m.begin(), used_m.end(), m) != used_m.end()) continue;
        used_m.push_back(m);
        const double tau_snapped = static_cast<double>(m) * y.gate_s;
        StabilityPoint pt;
        switch (est) {
            case DeviationEstimator::Adev: pt = allan_point(path, m, tau_snapped, false); break;
            case DeviationEstimator::Oadev: pt = allan_point(path, m, tau_snapped, true); break;
            case DeviationEstimator::Mdev: pt = mdev_point(path, m, tau_snapped); break;
        }
        if (pt.n_terms < 4) continue; // not enough contributing differences
        curve.points.push_back(pt);
    }
    return curve;
}

std::optional<StabilityPoint> deviation_at(const FrequencySeries& y, DeviationEstimator est,
                                           double tau_s) {
    const double taus[1] = {tau_s};
    StabilityCurve c = stability_deviation(y, est, taus);
    if (c.points.empty()) return std::nullopt;
    return c.points.front();
}

Psd phase_psd(const PhaseSeries& x, const PsdParams& params) {
    if (x.has_gaps())
        throw std::invalid_argument("phase_psd: input must be gap-free (split at gaps first)");
    if (x.size() < 8) throw std::invalid_argument("phase_psd: segment shorter than 8 samples");
    const double fs = 1.0 / x.dt_s;
    if (params.method == PsdMethod::Welch)
        return welch_psd(x.phase_rad, fs, params.welch_segments);
    return blackman_tukey_psd(x.phase_rad, fs, params.bt_lag_fraction);
}

SlopeFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys, double lo,
                          double hi) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_loglog_slope: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < lo || xs[i] > hi) continue;
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_loglog_slope: non-positive value in range");
        lx.push_back(std::log10(xs[i]));
        ly.push_back(std::log10(ys[i]));
    }
    if (lx.size() < 4)
        throw std::invalid_argument("fit_loglog_slope: fewer than 4 points in range");

    const auto n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate abscissa");
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - my - slope * (lx[i] - mx);
        ss_res += r * r;
    }
    SlopeFit fit;
    fit.exponent = slope;
    fit.n_points = lx.size();
    fit.stderr_exponent = lx.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return fit;
}

SlopeFit fit_loglog_slope(const Psd& psd, double f_lo_hz, double f_hi_hz) {
    return fit_loglog_slope(psd.f_hz, psd.s_rad2_hz, f_lo_hz, f_hi_hz);
}

SlopeFit fit_loglog_slope(const StabilityCurve& curve, double tau_lo_s, double tau_hi_s) {
    return fit_loglog_slope(curve.taus(), curve.devs(), tau_lo_s, tau_hi_s);
}

double cross_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cross_correlation: size mismatch");
    const std::size_t n = a.size();
    if (n < 100)
        throw std::invalid_argument("cross_correlation: need at least 100 joint samples");
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw std::invalid_argument("cross_correlation: zero variance input");
    return sab / std::sqrt(saa * sbb);
}

namespace {

double correlation_on_masks(std::span<const double> a, std::span<const double> b,
                            const std::vector<std::uint8_t>& va,
                            const std::vector<std::uint8_t>& vb) {
    if (a.size() != b.size())
        throw std::invalid_argument("cross_correlation: size mismatch");
    std::vector<double> ja, jb;
    ja.reserve(a.size());
    jb.reserve(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool ok_a = va.empty() || va[i];
        const bool ok_b = vb.empty() || vb[i];
        if (ok_a && ok_b) {
            ja.push_back(a[i]);
            jb.push_back(b[i]);
        }
    }
    return cross_correlation(ja, jb);
}

} // namespace

double cross_correlation(const FrequencySeries& a, const FrequencySeries& b) {
    return correlation_on_masks(a.y, b.y, a.valid, b.valid);
}

double cross_correlation(const PhaseSeries& a, const PhaseSeries& b) {
    return correlation_on_masks(a.phase_rad, b.phase_rad, a.valid, b.valid);
}

std::string format_correlation(double r) {
    char buf[64];
    if (r > 0.999) {
        std::snprintf(buf, sizeof buf, "1 - r = %.3e", 1.0 - r);
    } else {
        std::snprintf(buf, sizeof buf, "r = %.6f", r);
    }
    return buf;
}

AccuracyReport accuracy_report(
    const std::vector<std::pair<std::string, const FrequencySeries*>>& obs, double tau_avg_s) {
    AccuracyReport report;
    report.tau_avg_s = tau_avg_s;
    for (const auto& [name, series] : obs) {
        if (!series) throw std::invalid_argument("accuracy_report: null series for " + name);
        if (series->duration_s() < 4.0 * tau_avg_s * (1.0 - 1e-9))
            throw std::invalid_argument("accuracy_report: record for " + name +
                                        " shorter than 4 * tau_avg");
        AccuracyRow row;
        row.observable = name;
        row.kind = series->kind;
        row.mean = mean_valid(*series);
        auto oa = deviation_at(*series, DeviationEstimator::Oadev, tau_avg_s);
        auto md = deviation_at(*series, DeviationEstimator::Mdev, tau_avg_s);
        row.oadev_at_tau = oa ? oa->dev : std::numeric_limits<double>::quiet_NaN();
        row.mdev_at_tau = md ? md->dev : std::numeric_limits<double>::quiet_NaN();
        row.n_samples = series->valid_count();
        row.gap_fraction = series->gap_fraction();
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string render_accuracy_table(const AccuracyReport& report) {
    // Column per observable, Mean/ADEV/MDEV row blocks per counter kind.
    std::vector<std::string> names;
    for (const auto& row : report.rows)
        if (std::find(names.begin(), names.end(), row.observable) == names.end())
            names.push_back(row.observable);

    auto find_row = [&](const std::string& name, CounterKind kind) -> const AccuracyRow* {
        for (const auto& row : report.rows)
            if (row.observable == name && row.kind == kind) return &row;
        return nullptr;
    };

    char buf[128];
    std::string out;
    out += "Accuracy of the frequency comparisons\n";
    std::snprintf(buf, sizeof buf, "averaging time: %.0f s\n\n", report.tau_avg_s);
    out += buf;

    std::snprintf(buf, sizeof buf, "%-26s", "Quantity");
    out += buf;
    for (const auto& n : names) {
        std::snprintf(buf, sizeof buf, "%12s", n.c_str());
        out += buf;
    }
    out += "\n";

    for (CounterKind kind : {CounterKind::Pi, CounterKind::Lambda}) {
        bool any = false;
        for (const auto& row : report.rows) any = any || row.kind == kind;
        if (!any) continue;
        const std::string tag = kind == CounterKind::Pi ? "Pi" : "Lambda";
        std::snprintf(buf, sizeof buf, "%.0f", report.tau_avg_s);
        const std::string at_tau = std::string(" at ") + buf + " s";
        const std::vector<std::pair<std::string, double AccuracyRow::*>> lines = {
            {tag + "  Mean", &AccuracyRow::mean},
            {tag + "  ADEV" + at_tau, &AccuracyRow::oadev_at_tau},
            {tag + "  MDEV" + at_tau, &AccuracyRow::mdev_at_tau},
        };
        for (const auto& [label, field] : lines) {
            std::snprintf(buf, sizeof buf, "%-26s", label.c_str());
            out += buf;
            for (const auto& n : names) {
                const AccuracyRow* row = find_row(n, kind);
                if (row) std::snprintf(buf, sizeof buf, "%12.1e", row->*field);
                else std::snprintf(buf, sizeof buf, "%12s", "-");
                out += buf;
            }
            out += "\n";
        }
        // Uptime line per kind (valid over scheduled samples).
        std::snprintf(buf, sizeof buf, "%-26s", (tag + "  uptime").c_str());
        out += buf;
        for (const auto& n : names) {
            const AccuracyRow* row = find_row(n, kind);
            if (row) std::snprintf(buf, sizeof buf, "%12.4f", 1.0 - row->gap_fraction);
            else std::snprintf(buf, sizeof buf, "%12s", "-");
            out += buf;
        }
        out += "\n";
    }
    return out;
}

double uptime(const FrequencySeries& y) {
    if (y.size() == 0) return 1.0;
    return static_cast<double>(y.valid_count()) / static_cast<double>(y.size());
}

double mean_valid(const FrequencySeries& y) {
    // Mean of the residuals against a reference sample, with Neumaier
    // compensation: a constant series averages to exactly its value, and
    // tiny fluctuations on a large offset do not lose precision.
    double ref = 0.0;
    bool have_ref = false;
    for (std::size_t i = 0; i < y.size() && !have_ref; ++i) {
        if (y.is_valid(i)) {
            ref = y.y[i];
            have_ref = true;
        }
    }
    if (!have_ref) throw std::invalid_argument("mean_valid: series has no valid samples");
    double sum = 0.0, comp = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!y.is_valid(i)) continue;
        const double v = y.y[i] - ref;
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
        else comp += (v - t) + sum;
        sum = t;
        ++n;
    }
    return ref + (sum + comp) / static_cast<double>(n);
}

std::string format_value_pm(double value, double uncertainty) {
    const double scale = std::max(std::abs(value), std::abs(uncertainty));
    if (scale == 0.0) return "0.0(±0.0)";
    const int exponent = static_cast<int>(std::floor(std::log10(scale)));
    const double p = std::pow(10.0, exponent);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.1f(±%.1f)×10%s", value / p, uncertainty / p,
                  superscript(exponent).c_str());
    return buf;
}

} // namespace fiberlink
