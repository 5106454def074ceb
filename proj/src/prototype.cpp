#include "fbmcss/prototype.hpp"

#include "fbmcss/errors.hpp"

#include <cmath>
#include <numbers>

namespace fbmcss {

namespace {

// sqrt of the raised-cosine spectrum at frequency f (in units of the symbol
// rate B), roll-off a
double sqrt_rc(double f, double a) {
    double af = std::abs(f);
    double f1 = (1.0 - a) / 2.0;
    double f2 = (1.0 + a) / 2.0;
    if (af <= f1) return 1.0;
    if (af >= f2) return 0.0;
    return std::sqrt(0.5 * (1.0 + std::cos(std::numbers::pi / a * (af - f1))));
}

// Coarse-grid coefficients H_l at offsets l/(kappa*T). The roll_off = 1.0
// sets for kappa 3 and 4 are the classic frequency-sampling values with
// optimized stopband decay; they keep H_l^2 + H_{kappa-l}^2 = 1.
std::vector<double> coarse_coefficients(int kappa, double roll_off) {
    std::vector<double> h(kappa, 0.0);
    h[0] = 1.0;
    if (roll_off == 1.0 && kappa == 4) {
        const double a1 = 0.971960;
        h[1] = a1;
        h[2] = std::numbers::sqrt2 / 2.0;
        h[3] = std::sqrt(1.0 - a1 * a1);
        return h;
    }
    if (roll_off == 1.0 && kappa == 3) {
        const double a1 = 0.91143783;
        h[1] = a1;
        h[2] = std::sqrt(1.0 - a1 * a1);
        return h;
    }
    for (int l = 1; l < kappa; ++l)
        h[l] = sqrt_rc(static_cast<double>(l) / kappa, roll_off);
    return h;
}

} // namespace

PrototypeFilter design_prototype(const SmtConfig& config, int overlap_factor, double roll_off) {
    if (overlap_factor < 3) throw ConfigError("prototype overlap factor must be >= 3");
    if (!(roll_off > 0.0 && roll_off <= 1.0)) throw ConfigError("roll_off must be in (0, 1]");

    const int M = config.num_subcarriers;
    const int kappa = overlap_factor;
    const int Nd = kappa * M;
    const int P = Nd + 1;
    auto coef = coarse_coefficients(kappa, roll_off);

    // p[i] = (1/Nd) [ H_0 + 2 sum_l H_l cos(2 pi l (i - Nd/2) / Nd) ],
    // evaluated directly so Nd need not be a power of two
    PrototypeFilter f;
    f.overlap_factor = kappa;
    f.roll_off = roll_off;
    f.taps.resize(P);
    const double c0 = (P - 1) / 2.0;
    for (int i = 0; i < P; ++i) {
        double t = static_cast<double>(i) - c0;
        double acc = coef[0];
        for (int l = 1; l < kappa; ++l)
            acc += 2.0 * coef[l] * std::cos(2.0 * std::numbers::pi * l * t / Nd);
        f.taps[i] = acc;
    }
    // exact even symmetry, then unit energy
    for (int i = 0; i < P / 2; ++i) {
        double avg = 0.5 * (f.taps[i] + f.taps[P - 1 - i]);
        f.taps[i] = f.taps[P - 1 - i] = avg;
    }
    double e = 0.0;
    for (double v : f.taps) e += v * v;
    double s = 1.0 / std::sqrt(e);
    for (double& v : f.taps) v *= s;

    double worst = prototype_max_offpeak_db(f, M);
    if (worst > -40.0) {
        throw DesignError("prototype does not meet the square-root Nyquist floor "
                          "(worst off-peak " + std::to_string(worst) + " dB) at overlap " +
                          std::to_string(kappa) + ", roll-off " + std::to_string(roll_off),
                          prototype_isi_floor_db(f, M));
    }
    return f;
}

double prototype_max_offpeak_db(const PrototypeFilter& filter, int M) {
    const auto& p = filter.taps;
    const int P = filter.length();
    double peak = 0.0;
    for (double v : p) peak += v * v;
    double worst = 0.0;
    for (int m = 1; m * M < P; ++m) {
        double acc = 0.0;
        for (int i = m * M; i < P; ++i) acc += p[i] * p[i - m * M];
        worst = std::max(worst, std::abs(acc));
    }
    return 20.0 * std::log10(worst / peak + 1e-300);
}

double prototype_isi_floor_db(const PrototypeFilter& filter, int M) {
    const auto& p = filter.taps;
    const int P = filter.length();
    double peak = 0.0;
    for (double v : p) peak += v * v;
    double acc2 = 0.0;
    for (int m = 1; m * M < P; ++m) {
        double acc = 0.0;
        for (int i = m * M; i < P; ++i) acc += p[i] * p[i - m * M];
        acc2 += 2.0 * acc * acc; // both lag signs
    }
    return 10.0 * std::log10(acc2 / (peak * peak) + 1e-300);
}

std::vector<cplx> prototype_spectrum(const PrototypeFilter& filter, int fft_len) {
    return fft_zero_padded(std::span<const double>(filter.taps), static_cast<std::size_t>(fft_len));
}

std::vector<cplx> freq_response(const PrototypeFilter& filter, const SmtConfig& config, int band) {
    if (!config.is_active(band)) throw DomainError("freq_response: band is not active");
    const int N = config.fc_block_len;
    const int Lsub = config.subband_size();
    auto spec = prototype_spectrum(filter, N);
    std::vector<cplx> h(Lsub);
    cplx rot = jpow(-band);
    for (int n = 0; n < Lsub; ++n) {
        int off = ((n - Lsub / 2) % N + N) % N;
        h[n] = rot * std::conj(spec[off]);
    }
    return h;
}

} // namespace fbmcss
