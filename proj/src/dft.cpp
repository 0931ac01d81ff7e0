#include "cdaug/dft.hpp"

#include <cmath>

namespace cdaug {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

std::vector<std::complex<double>> dft(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        const double w = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = w * static_cast<double>(t);
            re += x[t] * std::cos(angle);
            im -= x[t] * std::sin(angle);
        }
        out[k] = {re, im};
    }
    return out;
}

std::vector<double> idft_real(std::span<const std::complex<double>> spectrum) {
    const std::size_t n = spectrum.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        const double w = kTwoPi * static_cast<double>(t) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double angle = w * static_cast<double>(k);
            acc += spectrum[k].real() * std::cos(angle) - spectrum[k].imag() * std::sin(angle);
        }
        out[t] = acc / static_cast<double>(n);
    }
    return out;
}

double bin_frequency(std::size_t k, std::size_t n, double fs) {
    return fs * static_cast<double>(k) / static_cast<double>(n);
}

} // namespace cdaug
