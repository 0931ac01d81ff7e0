#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cdaug {

// Direct O(n^2) discrete Fourier transform. Window lengths here are a few
// hundred samples, so a radix-split FFT would buy nothing; the direct sum is
// exact, allocation-free beyond the output, and identical on every platform.

/// X[k] = sum_t x[t] * exp(-2*pi*i*k*t/n), k = 0..n-1.
std::vector<std::complex<double>> dft(std::span<const double> x);

/// Real part of the inverse transform of a full-length spectrum.
std::vector<double> idft_real(std::span<const std::complex<double>> spectrum);

/// Frequency in Hz of bin k for an n-point transform at sampling rate fs.
double bin_frequency(std::size_t k, std::size_t n, double fs);

} // namespace cdaug
