#ifndef FBMCSS_PROTOTYPE_HPP
#define FBMCSS_PROTOTYPE_HPP

#include "fbmcss/core.hpp"
#include "fbmcss/fft.hpp"

#include <vector>

namespace fbmcss {

// Square-root Nyquist(T) prototype pulse at the system sample rate.
// Length overlap_factor*M + 1, even-symmetric about the center tap,
// unit energy.
struct PrototypeFilter {
    std::vector<double> taps;
    int overlap_factor = 0; // kappa
    double roll_off = 0.0;

    int length() const { return static_cast<int>(taps.size()); }
    int center() const { return (length() - 1) / 2; }
};

// Frequency-sampling design with 2*kappa-1 nonzero coefficients on the
// kappa*M grid. roll_off 1.0 with kappa in {3, 4} uses coefficient sets
// optimized for spectral containment; other parameters fall back to
// sqrt-raised-cosine samples. Throws DesignError (with the measured ISI
// level) if the square-root-Nyquist invariant is not met.
PrototypeFilter design_prototype(const SmtConfig& config, int overlap_factor = 4,
                                 double roll_off = 1.0);

// Matched-filter tone gains h_{k,n} for band `band`: the N-point DFT of the
// zero-padded prototype, shifted to the band center and restricted to the
// band's L_sub bins, conjugated and rotated by j^{-k} to undo the transmit
// phase lattice.
std::vector<cplx> freq_response(const PrototypeFilter& filter, const SmtConfig& config, int band);

// N-point DFT of the zero-padded prototype (shared by all bands; callers
// that loop over bands should compute this once).
std::vector<cplx> prototype_spectrum(const PrototypeFilter& filter, int fft_len);

// worst off-peak linear autocorrelation at multiples of T, as a power ratio
// relative to the peak, and the summed ISI floor, both in dB
double prototype_max_offpeak_db(const PrototypeFilter& filter, int samples_per_symbol);
double prototype_isi_floor_db(const PrototypeFilter& filter, int samples_per_symbol);

} // namespace fbmcss

#endif
