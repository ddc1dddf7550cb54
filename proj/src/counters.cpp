#include "fiberlink/counters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fiberlink {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::size_t samples_per_gate(const PhaseSeries& phase, double gate_s) {
    if (!(gate_s > 0.0)) throw std::invalid_argument("counter: gate must be positive");
    if (!(phase.carrier_hz > 0.0))
        throw std::invalid_argument("counter: phase series needs a positive carrier");
    const double ratio = gate_s / phase.dt_s;
    const auto m = static_cast<std::size_t>(std::llround(ratio));
    if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * ratio)
        throw std::invalid_argument("counter: gate is not an integer multiple of the phase step");
    return m;
}

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    auto lo_it = std::max_element(v.begin(), mid);
    return 0.5 * (*lo_it + hi);
}

} // namespace

FrequencySeries count_pi(const PhaseSeries& phase, double gate_s) {
    const std::size_t m = samples_per_gate(phase, gate_s);
    const std::size_t n = phase.size();
    if (n < m + 1) throw std::invalid_argument("count_pi: record shorter than one gate");
    const std::size_t gates = (n - 1) / m;

    FrequencySeries out;
    out.t0_s = phase.t0_s;
    out.gate_s = gate_s;
    out.carrier_hz = phase.carrier_hz;
    out.kind = CounterKind::Pi;
    out.y.assign(gates, 0.0);
    const bool gappy = phase.has_gaps();
    if (gappy) out.valid.assign(gates, 1);

    const double denom = kTwoPi * phase.carrier_hz * gate_s;
    for (std::size_t k = 0; k < gates; ++k) {
        const std::size_t a = k * m;
        const std::size_t b = a + m;
        bool ok = true;
        if (gappy) {
            for (std::size_t i = a; i <= b && ok; ++i) ok = phase.is_valid(i);
        }
        if (!ok) {
            out.y[k] = kNan;
            out.valid[k] = 0;
            continue;
        }
        out.y[k] = (phase.phase_rad[b] - phase.phase_rad[a]) / denom;
    }
    return out;
}

FrequencySeries count_lambda(const PhaseSeries& phase, double gate_s) {
    const std::size_t m = samples_per_gate(phase, gate_s);
    if (m < 2)
        throw std::invalid_argument("count_lambda: need at least 2 phase samples per gate");
    const std::size_t n = phase.size();
    if (n < 2 * m) throw std::invalid_argument("count_lambda: record shorter than two gates");
    const std::size_t windows = (n - 1) / m; // boxcar means over [k*gate, (k+1)*gate)

    FrequencySeries out;
    out.t0_s = phase.t0_s;
    out.gate_s = gate_s;
    out.carrier_hz = phase.carrier_hz;
    out.kind = CounterKind::Lambda;
    out.y.assign(windows, kNan);
    out.valid.assign(windows, 0); // row 0 has no preceding window

    const bool gappy = phase.has_gaps();
    const double inv_m = 1.0 / static_cast<double>(m);
    const double denom = kTwoPi * phase.carrier_hz * gate_s;

    std::vector<double> means(windows, 0.0);
    std::vector<std::uint8_t> mean_ok(windows, 1);
    for (std::size_t w = 0; w < windows; ++w) {
        const std::size_t a = w * m;
        double sum = 0.0;
        bool ok = true;
        for (std::size_t i = a; i < a + m; ++i) {
            if (gappy && !phase.is_valid(i)) {
                ok = false;
                break;
            }
            sum += phase.phase_rad[i];
        }
        means[w] = sum * inv_m;
        mean_ok[w] = ok ? 1 : 0;
    }
    for (std::size_t w = 1; w < windows; ++w) {
        if (!mean_ok[w] || !mean_ok[w - 1]) continue;
        out.y[w] = (means[w] - means[w - 1]) / denom;
        out.valid[w] = 1;
    }
    return out;
}

SlipScan detect_cycle_slips(const FrequencySeries& y, double threshold_sigma) {
    if (y.size() < 100)
        throw std::invalid_argument("detect_cycle_slips: need at least 100 samples");
    if (!(threshold_sigma > 0.0))
        throw std::invalid_argument("detect_cycle_slips: threshold must be positive");

    const std::size_t n = y.size();
    constexpr std::size_t kBlock = 128;
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;

    // Local medians track slow wander; the scale is a global MAD of the
    // residuals so that the false-alarm rate stays at the Gaussian tail bound.
    std::vector<double> block_median(n_blocks, 0.0);
    std::vector<std::uint8_t> block_has(n_blocks, 0);
    std::vector<double> scratch;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        scratch.clear();
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(n, lo + kBlock);
        for (std::size_t i = lo; i < hi; ++i)
            if (y.is_valid(i)) scratch.push_back(y.y[i]);
        if (!scratch.empty()) {
            block_median[b] = median_of(scratch);
            block_has[b] = 1;
        }
    }
    // Fill empty blocks from the nearest populated neighbor.
    for (std::size_t b = 0; b < n_blocks; ++b) {
        if (block_has[b]) continue;
        for (std::size_t d = 1; d < n_blocks; ++d) {
            if (b >= d && block_has[b - d]) {
                block_median[b] = block_median[b - d];
                break;
            }
            if (b + d < n_blocks && block_has[b + d]) {
                block_median[b] = block_median[b + d];
                break;
            }
        }
    }

    std::vector<double> residual_abs;
    residual_abs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!y.is_valid(i)) continue;
        residual_abs.push_back(std::abs(y.y[i] - block_median[i / kBlock]));
    }
    if (residual_abs.empty())
        throw std::invalid_argument("detect_cycle_slips: series has no valid samples");
    const double mad = median_of(residual_abs);
    const double sigma = 1.4826 * mad;

    SlipScan scan;
    scan.cleaned = y;
    for (std::size_t i = 0; i < n; ++i) {
        if (!y.is_valid(i)) continue;
        const double dev = std::abs(y.y[i] - block_median[i / kBlock]);
        if (dev > threshold_sigma * sigma) {
            scan.flagged.push_back(i);
            scan.cleaned.mark_invalid(i);
        }
    }
    return scan;
}

} // namespace fiberlink
