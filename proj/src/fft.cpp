#include "fbmcss/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbmcss {

Fft::Fft(std::size_t n) : n_(n) {
    if (!is_pow2(n)) throw std::invalid_argument("Fft: size must be a power of two");
    bitrev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (std::size_t i = 0; i < n / 2; ++i) {
        double ang = -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        twiddle_[i] = {std::cos(ang), std::sin(ang)};
    }
}

void Fft::transform(std::span<cplx> x, bool inverse) const {
    if (x.size() != n_) throw std::invalid_argument("Fft: buffer size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t j = bitrev_[i];
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        std::size_t half = len >> 1;
        std::size_t step = n_ / len;
        for (std::size_t i = 0; i < n_; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                cplx w = twiddle_[k * step];
                if (inverse) w = std::conj(w);
                cplx u = x[i + k];
                cplx v = x[i + k + half] * w;
                x[i + k] = u + v;
                x[i + k + half] = u - v;
            }
        }
    }
    if (inverse) {
        double s = 1.0 / static_cast<double>(n_);
        for (auto& v : x) v *= s;
    }
}

void Fft::forward(std::span<cplx> x) const { transform(x, false); }
void Fft::inverse(std::span<cplx> x) const { transform(x, true); }

std::vector<cplx> fft(std::vector<cplx> x) {
    Fft plan(x.size());
    plan.forward(x);
    return x;
}

std::vector<cplx> ifft(std::vector<cplx> x) {
    Fft plan(x.size());
    plan.inverse(x);
    return x;
}

std::vector<cplx> fft_zero_padded(std::span<const cplx> x, std::size_t n) {
    std::vector<cplx> buf(n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < x.size() && i < n; ++i) buf[i] = x[i];
    Fft plan(n);
    plan.forward(buf);
    return buf;
}

std::vector<cplx> fft_zero_padded(std::span<const double> x, std::size_t n) {
    std::vector<cplx> buf(n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < x.size() && i < n; ++i) buf[i] = cplx{x[i], 0.0};
    Fft plan(n);
    plan.forward(buf);
    return buf;
}

void fwht_inplace(std::span<double> x) {
    std::size_t n = x.size();
    if (!is_pow2(n)) throw std::invalid_argument("fwht: size must be a power of two");
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t i = 0; i < n; i += len << 1) {
            for (std::size_t k = 0; k < len; ++k) {
                double a = x[i + k];
                double b = x[i + k + len];
                x[i + k] = a + b;
                x[i + k + len] = a - b;
            }
        }
    }
}

} // namespace fbmcss
