#ifndef FBMCSS_PSD_HPP
#define FBMCSS_PSD_HPP

#include "fbmcss/fft.hpp"

#include <span>
#include <vector>

namespace fbmcss {

// Averaged-periodogram PSD of a complex baseband sequence. Frequencies are
// baseband-centered (fftshift order, [-fs/2, fs/2)); density is power per Hz
// so a unit-variance white sequence measures 1/fs.
struct PsdEstimate {
    std::vector<double> freq_hz;
    std::vector<double> density; // power / Hz
    double sample_rate_hz = 0.0;
    double resolution_bw_hz = 0.0; // achieved (Hann ENBW)
    int segments = 0;

    double max_in(double f_lo, double f_hi) const;
    double min_in(double f_lo, double f_hi) const;
};

// Welch estimate, Hann window, 50% overlap. Segment length is chosen so the
// achieved resolution bandwidth is <= resolution_bw_hz. Throws
// EstimationError when fewer than 8 segments fit.
PsdEstimate measure_psd(std::span<const cplx> samples, double sample_rate_hz,
                        double resolution_bw_hz);

} // namespace fbmcss

#endif
