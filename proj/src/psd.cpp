#include "fbmcss/psd.hpp"

#include "fbmcss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fbmcss {

double PsdEstimate::max_in(double f_lo, double f_hi) const {
    double best = -1.0;
    for (std::size_t i = 0; i < freq_hz.size(); ++i)
        if (freq_hz[i] >= f_lo && freq_hz[i] <= f_hi) best = std::max(best, density[i]);
    return best;
}

double PsdEstimate::min_in(double f_lo, double f_hi) const {
    double best = -1.0;
    for (std::size_t i = 0; i < freq_hz.size(); ++i)
        if (freq_hz[i] >= f_lo && freq_hz[i] <= f_hi)
            best = best < 0.0 ? density[i] : std::min(best, density[i]);
    return best;
}

PsdEstimate measure_psd(std::span<const cplx> samples, double fs, double rbw) {
    if (fs <= 0.0 || rbw <= 0.0) throw EstimationError("measure_psd: bad rates");
    // Hann ENBW is 1.5 bins
    std::size_t want = static_cast<std::size_t>(std::ceil(1.5 * fs / rbw));
    std::size_t nseg = 1;
    while (nseg < want) nseg <<= 1;
    std::size_t hop = nseg / 2;
    if (samples.size() < nseg || (samples.size() - nseg) / hop + 1 < 8)
        throw EstimationError("measure_psd: input too short for 8 averaging segments");
    std::size_t count = (samples.size() - nseg) / hop + 1;

    std::vector<double> win(nseg);
    double wss = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) {
        win[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / nseg));
        wss += win[i] * win[i];
    }

    Fft plan(nseg);
    std::vector<double> acc(nseg, 0.0);
    std::vector<cplx> buf(nseg);
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t i = 0; i < nseg; ++i) buf[i] = samples[s * hop + i] * win[i];
        plan.forward(buf);
        for (std::size_t i = 0; i < nseg; ++i) acc[i] += std::norm(buf[i]);
    }

    PsdEstimate est;
    est.sample_rate_hz = fs;
    est.resolution_bw_hz = 1.5 * fs / static_cast<double>(nseg);
    est.segments = static_cast<int>(count);
    est.freq_hz.resize(nseg);
    est.density.resize(nseg);
    double norm = 1.0 / (fs * wss * static_cast<double>(count));
    // fftshift so frequencies ascend from -fs/2
    for (std::size_t i = 0; i < nseg; ++i) {
        std::size_t src = (i + nseg / 2) % nseg;
        double f = (static_cast<double>(i) - static_cast<double>(nseg) / 2.0) * fs /
                   static_cast<double>(nseg);
        est.freq_hz[i] = f;
        est.density[i] = acc[src] * norm;
    }
    return est;
}

} // namespace fbmcss
