#ifndef FBMCSS_FFT_HPP
#define FBMCSS_FFT_HPP

#include <complex>
#include <span>
#include <vector>

namespace fbmcss {

using cplx = std::complex<double>;

// Radix-2 DIT transform for power-of-two sizes. A plan owns the twiddle
// and bit-reversal tables for one size; execution is in-place and
// thread-safe on distinct buffers.
class Fft {
  public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }

    // X[f] = sum_t x[t] e^{-j2pi f t / n}
    void forward(std::span<cplx> x) const;
    // x[t] = (1/n) sum_f X[f] e^{+j2pi f t / n}
    void inverse(std::span<cplx> x) const;

  private:
    void transform(std::span<cplx> x, bool inverse) const;
    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<cplx> twiddle_; // forward twiddles, n/2 entries
};

// one-shot helpers (plan built per call; fine outside hot loops)
std::vector<cplx> fft(std::vector<cplx> x);
std::vector<cplx> ifft(std::vector<cplx> x);

// DFT of x zero-padded to length n
std::vector<cplx> fft_zero_padded(std::span<const cplx> x, std::size_t n);
std::vector<cplx> fft_zero_padded(std::span<const double> x, std::size_t n);

// In-place fast Walsh-Hadamard transform (natural/Hadamard order),
// unnormalized: y = H_n x with H entries +-1. n must be a power of two.
void fwht_inplace(std::span<double> x);

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// j^m for integer m (any sign)
inline cplx jpow(long long m) {
    switch (((m % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

} // namespace fbmcss

#endif
