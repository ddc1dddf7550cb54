#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fiberlink::fft {

/// Forward real-to-complex transform (unnormalized); returns n/2+1 bins.
std::vector<std::complex<double>> real_forward(std::span<const double> x);

/// In-place backward transform of a spectrum in FFTW halfcomplex layout
/// (r0, r1, ..., r_{n/2}, i_{(n+1)/2-1}, ..., i_1), unnormalized:
///   x_j = r_0 + 2 sum_k [r_k cos(2 pi j k / n) - i_k sin(2 pi j k / n)] (+ Nyquist)
void halfcomplex_backward(std::vector<double>& data);

/// Biased autocovariance r[k] = (1/n) sum_i x_i x_{i+k}, k = 0..max_lag,
/// computed with zero-padded FFTs.
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag);

} // namespace fiberlink::fft
