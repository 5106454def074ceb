#ifndef FBMCSS_RECEIVER_HPP
#define FBMCSS_RECEIVER_HPP

#include "fbmcss/channel.hpp"
#include "fbmcss/core.hpp"
#include "fbmcss/prototype.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fbmcss {

// Frequency-domain receiver grid from the overlap-save analysis bank.
//
// Block b covers padded input samples [b*R, b*R + N) where R = N - N_o and
// the stream is front-padded with N_o/2 zeros; the middle R samples of each
// block are the valid region, so block b's subband outputs cover absolute
// half-symbol indices [b*R/D, (b+1)*R/D) with zero framing delay. Band k's
// tone n is the raw DFT bin (k*N/M - L_sub/2 + n) mod N: adjacent bands
// share exactly half their bins.
struct SubbandFrame {
    int num_blocks = 0;
    int subband_size = 0;       // L_sub
    int valid_per_block = 0;    // R / D subband samples per block
    std::vector<int> bands;     // active subcarriers, ascending
    std::vector<cplx> tones;    // [block][band_index][tone]

    cplx& at(int block, int band_idx, int tone) {
        return tones[(static_cast<std::size_t>(block) * bands.size() + band_idx) * subband_size +
                     tone];
    }
    const cplx& at(int block, int band_idx, int tone) const {
        return tones[(static_cast<std::size_t>(block) * bands.size() + band_idx) * subband_size +
                     tone];
    }
    int total_slots() const { return num_blocks * valid_per_block; }
};

// Raw band-bin extraction (matched filtering lives in the equalizer taps).
SubbandFrame overlap_save_analyze(std::span<const cplx> samples, const SmtConfig& config);

// Exact fast-convolution matched-filter subband stream for one band:
// frequency-domain filtering with the full prototype response (all alias
// bins folded), small IDFT, overlap discard. Equals direct time-domain
// matched filtering + downconversion + decimation to ~1e-12 RMS; the
// 1e-9 contract in the acceptance suite is checked against a direct oracle.
std::vector<cplx> matched_filter_subband(std::span<const cplx> samples,
                                         const PrototypeFilter& filter, const SmtConfig& config,
                                         int band);

// checks the overlap budget N_o >= 2 (P - 1) rounded up to the subband hop
void check_overlap_budget(const SmtConfig& config, const PrototypeFilter& filter);

// Per-band channel state consumed by the equalizer. sigma2 is the mean
// noise-plus-interference power per DFT bin over the band (a per-band
// scalar); snr_per_band is the in-band signal-to-(noise+interference) ratio
// SNR_l used in the tap denominators.
struct ChannelState {
    enum class Source { Oracle, Estimated };
    std::vector<int> bands;
    std::vector<cplx> c_bins;          // [band_index][tone]
    std::vector<double> sigma2;        // per band
    std::vector<double> snr_per_band;  // per band (may be +inf when noiseless)
    Source source = Source::Oracle;
    int subband_size = 0;

    cplx c(int band_idx, int tone) const {
        return c_bins[static_cast<std::size_t>(band_idx) * subband_size + tone];
    }
};

// Ground-truth state from the generator: channel gains from the realization's
// DFT, sigma2 from the closed-form noise + interferer-overlap expression.
// noise_variance = 0 selects the noiseless sentinel (flat unit sigma2,
// infinite SNR). symbol_variance is the per-slot lattice variance
// (symbol_variance(map)).
ChannelState oracle_channel_state(const ChannelRealization& channel,
                                  const PrototypeFilter& filter, const SmtConfig& config,
                                  double noise_variance, std::span<const Interferer> interferers,
                                  double symbol_variance);

// Robust per-band noise estimate from a signal-free frame: per block, the
// median of in-band bin powers corrected by 1/ln 2, averaged over blocks.
std::vector<double> estimate_band_noise(const SubbandFrame& frame);

// x' = x / sqrt(sigma2_band)
SubbandFrame whiten(const SubbandFrame& frame, std::span<const double> sigma2);

// SNR'_m = (1/L) sum_{l in S_m} SNR_l
std::vector<double> average_stream_snr(const ChannelState& state, const StreamMap& map);

enum class TapForm {
    Whitened, // numerator h c* / sigma_k, applied to whitened tones
    Raw,      // numerator h c* / sigma_k^2, applied to raw tones (joint MMSE)
    PerBand,  // single-band denominator: equalization without NBI suppression
};

const char* tap_form_name(TapForm form);

struct EqualizerTapSet {
    TapForm form = TapForm::Raw;
    int subband_size = 0;
    std::vector<int> bands;
    std::vector<int> stream_of_band;   // stream owning each band index
    std::vector<cplx> taps;            // [band_index][tone]
    std::vector<double> stream_snr;    // SNR'_m per stream

    cplx w(int band_idx, int tone) const {
        return taps[static_cast<std::size_t>(band_idx) * subband_size + tone];
    }
};

// Tap weights for every active band. The alias partner of tone n is
// n' = (n + L_sub/2) mod L_sub.
EqualizerTapSet compute_taps(const ChannelState& state, const PrototypeFilter& filter,
                             const SmtConfig& config, const StreamMap& map, TapForm form);

// y_m[block][tone] = sum_{k in S_m} w_{k,tone} x_{k,tone}
std::vector<std::vector<cplx>> equalize_combine(const SubbandFrame& frame,
                                                const EqualizerTapSet& taps, const StreamMap& map);

// Per-stream demodulation results. `combined` is the joint (despread)
// lattice; `branches` keeps each subcarrier's contribution separate for
// multicode correlation (branch order follows S_m).
struct StreamSymbols {
    int num_slots = 0;
    std::vector<double> combined;  // [slot]
    std::vector<double> branches;  // [branch][slot]
    double branch(int b, int slot) const {
        return branches[static_cast<std::size_t>(b) * num_slots + slot];
    }
};

// Combined-tone demodulation (L_sub-point inverse DFT per block, overlap
// discard, j^{-n} derotation, real part), one lattice per stream.
std::vector<std::vector<double>> subband_demod(const std::vector<std::vector<cplx>>& stream_tones,
                                               const SmtConfig& config);

// Full per-branch demodulation used by detection.
std::vector<StreamSymbols> demod_streams(const SubbandFrame& frame, const EqualizerTapSet& taps,
                                         const StreamMap& map, const SmtConfig& config);

struct DetectResult {
    std::vector<std::vector<std::uint8_t>> bits; // per stream
    std::vector<std::vector<double>> soft;       // per stream, per decision
};

// RepetitionQpsk: sign decisions on the combined lattice. Hadamard: FWHT
// across the L branch outputs per slot, argmax row (lowest index on ties),
// row index emitted MSB-first.
DetectResult detect(const std::vector<StreamSymbols>& streams, const StreamMap& map);

// slots at each frame edge too contaminated by filter ramp-up to count
int demod_guard_slots(const PrototypeFilter& filter, const SmtConfig& config,
                      int channel_taps = 1);

} // namespace fbmcss

#endif
