#include "fiberlink/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace fiberlink::fft {

namespace {

// The FFTW planner is not thread-safe; execution of a created plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanGuard {
    fftw_plan plan;
    ~PlanGuard() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
};

} // namespace

std::vector<std::complex<double>> real_forward(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("fft::real_forward: need at least 2 samples");
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    if (!plan) throw std::runtime_error("fft::real_forward: FFTW plan creation failed");
    PlanGuard guard{plan};
    fftw_execute(plan);
    return out;
}

void halfcomplex_backward(std::vector<double>& data) {
    const std::size_t n = data.size();
    if (n < 2) throw std::invalid_argument("fft::halfcomplex_backward: need at least 2 samples");
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_r2r_1d(static_cast<int>(n), data.data(), data.data(),
                                FFTW_HC2R, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fft::halfcomplex_backward: FFTW plan creation failed");
    PlanGuard guard{plan};
    fftw_execute(plan);
}

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("fft::autocovariance: need at least 2 samples");
    if (max_lag >= n) max_lag = n - 1;

    // Zero-pad to at least 2n to avoid circular wrap of lags <= max_lag.
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;

    std::vector<double> padded(m, 0.0);
    std::memcpy(padded.data(), x.data(), n * sizeof(double));
    auto spec = real_forward(padded);
    // |X|^2 is real and even, so the halfcomplex imaginary slots stay zero.
    std::vector<double> power(m, 0.0);
    for (std::size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);
    halfcomplex_backward(power); // unnormalized: result is m * raw lag sums

    std::vector<double> acov(max_lag + 1);
    const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(n));
    for (std::size_t k = 0; k <= max_lag; ++k) acov[k] = power[k] * scale;
    return acov;
}

} // namespace fiberlink::fft
