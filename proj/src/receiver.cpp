#include "fbmcss/receiver.hpp"

#include "fbmcss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbmcss {

namespace {

int band_origin_bin(int band, const SmtConfig& config) {
    const int N = config.fc_block_len;
    const int Lsub = config.subband_size();
    int o = band * (N / config.num_subcarriers) - Lsub / 2;
    return ((o % N) + N) % N;
}

// circular overlap length of [a0, a1) and [b0, b1) on a circle of size W
double circular_overlap(double a0, double a1, double b0, double b1, double W) {
    auto wrap = [W](double f) {
        double r = std::fmod(f, W);
        return r < 0.0 ? r + W : r;
    };
    double overlap = 0.0;
    double a = wrap(a0), la = a1 - a0, lb = b1 - b0;
    double b = wrap(b0);
    // split each interval at the wrap point and intersect linearly
    auto pieces = [W](double start, double len) {
        std::vector<std::pair<double, double>> out;
        if (start + len <= W) {
            out.emplace_back(start, start + len);
        } else {
            out.emplace_back(start, W);
            out.emplace_back(0.0, start + len - W);
        }
        return out;
    };
    for (auto [x0, x1] : pieces(a, la))
        for (auto [y0, y1] : pieces(b, lb))
            overlap += std::max(0.0, std::min(x1, y1) - std::max(x0, y0));
    return overlap;
}

} // namespace

void check_overlap_budget(const SmtConfig& config, const PrototypeFilter& filter) {
    const int D = config.half_symbol_hop();
    int need = 2 * (filter.length() - 1);
    need = (need + D - 1) / D * D;
    if (config.fc_overlap_len < need)
        throw ConfigError("fc_overlap_len " + std::to_string(config.fc_overlap_len) +
                          " is below the filtering budget " + std::to_string(need) +
                          " for prototype length " + std::to_string(filter.length()));
}

SubbandFrame overlap_save_analyze(std::span<const cplx> samples, const SmtConfig& config) {
    const int N = config.fc_block_len;
    const int No = config.fc_overlap_len;
    const int R = config.block_hop();
    const int D = config.half_symbol_hop();
    const int Lsub = config.subband_size();
    if (static_cast<int>(samples.size()) < N)
        throw ConfigError("overlap_save_analyze: need at least one full block of samples");

    const int num_blocks = static_cast<int>((samples.size() + R - 1) / R);
    const std::size_t padded_len = static_cast<std::size_t>(num_blocks - 1) * R + N;
    const int lead = No / 2;

    SubbandFrame frame;
    frame.num_blocks = num_blocks;
    frame.subband_size = Lsub;
    frame.valid_per_block = R / D;
    frame.bands = config.active_subcarriers;
    frame.tones.resize(static_cast<std::size_t>(num_blocks) * frame.bands.size() * Lsub);

    Fft plan(static_cast<std::size_t>(N));
    std::vector<cplx> block(N);
    for (int b = 0; b < num_blocks; ++b) {
        for (int i = 0; i < N; ++i) {
            std::ptrdiff_t src = static_cast<std::ptrdiff_t>(b) * R + i - lead;
            block[i] = (src >= 0 && src < static_cast<std::ptrdiff_t>(samples.size()))
                           ? samples[static_cast<std::size_t>(src)]
                           : cplx{0.0, 0.0};
        }
        plan.forward(block);
        for (std::size_t bi = 0; bi < frame.bands.size(); ++bi) {
            const int o = band_origin_bin(frame.bands[bi], config);
            cplx* dst = &frame.at(b, static_cast<int>(bi), 0);
            for (int n = 0; n < Lsub; ++n) dst[n] = block[(o + n) % N];
        }
    }
    return frame;
}

std::vector<cplx> matched_filter_subband(std::span<const cplx> samples,
                                         const PrototypeFilter& filter, const SmtConfig& config,
                                         int band) {
    if (!config.is_active(band)) throw DomainError("matched_filter_subband: inactive band");
    const int N = config.fc_block_len;
    const int No = config.fc_overlap_len;
    const int R = config.block_hop();
    const int D = config.half_symbol_hop();
    const int Lsub = config.subband_size();
    const int M = config.num_subcarriers;
    if (filter.length() - 1 > No)
        throw ConfigError("matched_filter_subband: prototype exceeds the overlap budget");
    if (static_cast<int>(samples.size()) < N)
        throw ConfigError("matched_filter_subband: need at least one full block");

    // full matched-filter response on all N bins: H_k[f] = j^{-k} conj(Phat[f - kN/M])
    auto spec = prototype_spectrum(filter, N);
    std::vector<cplx> H(N);
    const cplx rot = jpow(-band);
    const int shift = band * (N / M);
    for (int f = 0; f < N; ++f) H[f] = rot * std::conj(spec[((f - shift) % N + N) % N]);

    // The matched response is anticausal (time-reversed pulse), so the
    // corrupted samples sit at the block tail: keep the first R outputs of
    // each block. Budget: P - 1 <= N_o.
    const int num_blocks = static_cast<int>((samples.size() + R - 1) / R);
    const int lead = 0;
    const int o = band_origin_bin(band, config);
    const int i0 = 0;

    Fft plan_n(static_cast<std::size_t>(N));
    Fft plan_sub(static_cast<std::size_t>(Lsub));
    std::vector<cplx> block(N), tones(Lsub);
    std::vector<cplx> out(static_cast<std::size_t>(num_blocks) * (R / D));

    for (int b = 0; b < num_blocks; ++b) {
        for (int i = 0; i < N; ++i) {
            std::ptrdiff_t src = static_cast<std::ptrdiff_t>(b) * R + i - lead;
            block[i] = (src >= 0 && src < static_cast<std::ptrdiff_t>(samples.size()))
                           ? samples[static_cast<std::size_t>(src)]
                           : cplx{0.0, 0.0};
        }
        plan_n.forward(block);
        // fold all D alias bins onto each subband tone
        for (int n = 0; n < Lsub; ++n) {
            cplx acc{0.0, 0.0};
            for (int a = 0; a < D; ++a) {
                int f = (o + n + a * Lsub) % N;
                acc += block[f] * H[f];
            }
            tones[n] = acc;
        }
        plan_sub.inverse(tones);
        const double scale = static_cast<double>(Lsub) / N;
        for (int j = 0; j < R / D; ++j) {
            int iloc = i0 + j;
            cplx v = tones[iloc] * scale;
            if (iloc & 1) v = -v; // downconvert by band center instead of window origin
            out[static_cast<std::size_t>(b) * (R / D) + j] = v;
        }
    }
    return out;
}

ChannelState oracle_channel_state(const ChannelRealization& channel,
                                  const PrototypeFilter& filter, const SmtConfig& config,
                                  double noise_variance, std::span<const Interferer> interferers,
                                  double symbol_variance) {
    const int N = config.fc_block_len;
    const int Lsub = config.subband_size();
    const int M = config.num_subcarriers;
    const double W = config.total_bandwidth_hz;
    const double B = config.subcarrier_spacing_hz;
    check_overlap_budget(config, filter);

    ChannelState st;
    st.source = ChannelState::Source::Oracle;
    st.bands = config.active_subcarriers;
    st.subband_size = Lsub;
    st.c_bins.resize(st.bands.size() * static_cast<std::size_t>(Lsub));
    st.sigma2.resize(st.bands.size());
    st.snr_per_band.resize(st.bands.size());

    auto C = fft_zero_padded(std::span<const cplx>(channel.taps), static_cast<std::size_t>(N));
    auto spec = prototype_spectrum(filter, N);
    std::vector<double> hmag2(Lsub);
    for (int n = 0; n < Lsub; ++n) hmag2[n] = std::norm(spec[((n - Lsub / 2) % N + N) % N]);

    for (std::size_t bi = 0; bi < st.bands.size(); ++bi) {
        const int k = st.bands[bi];
        const int o = band_origin_bin(k, config);
        for (int n = 0; n < Lsub; ++n)
            st.c_bins[bi * Lsub + n] = C[(o + n) % N];

        if (noise_variance <= 0.0) {
            // noiseless sentinel: whitening is a no-op, 1/SNR terms vanish
            st.sigma2[bi] = 1.0;
            st.snr_per_band[bi] = std::numeric_limits<double>::infinity();
            continue;
        }
        // Interferer overlap with the band's 2B tone window, on the circular
        // baseband of width W. The window (not the B-wide slice) is what the
        // extracted tones span, and it is what the estimated path measures.
        double boost = 0.0;
        double f_center = k * B; // circular position
        for (const auto& it : interferers) {
            double frac = circular_overlap(f_center - B, f_center + B,
                                           it.center_freq_hz - it.bandwidth_hz / 2,
                                           it.center_freq_hz + it.bandwidth_hz / 2, W) /
                          (2.0 * B);
            boost += frac * std::pow(10.0, it.psd_above_noise_db / 10.0);
        }
        st.sigma2[bi] = static_cast<double>(N) * noise_variance * (1.0 + boost);

        double mean_g2 = 0.0;
        for (int n = 0; n < Lsub; ++n)
            mean_g2 += hmag2[n] * std::norm(st.c_bins[bi * Lsub + n]);
        mean_g2 /= Lsub;
        st.snr_per_band[bi] = Lsub * symbol_variance * mean_g2 / st.sigma2[bi];
    }
    (void)M;
    return st;
}

std::vector<double> estimate_band_noise(const SubbandFrame& frame) {
    if (frame.num_blocks == 0 || frame.bands.empty())
        throw EstimationError("estimate_band_noise: empty measurement frame");
    const int Lsub = frame.subband_size;
    std::vector<double> out(frame.bands.size(), 0.0);
    std::vector<double> pw(Lsub);
    const double ln2 = std::log(2.0);
    for (std::size_t bi = 0; bi < frame.bands.size(); ++bi) {
        double acc = 0.0;
        for (int b = 0; b < frame.num_blocks; ++b) {
            for (int n = 0; n < Lsub; ++n) pw[n] = std::norm(frame.at(b, static_cast<int>(bi), n));
            std::nth_element(pw.begin(), pw.begin() + Lsub / 2, pw.end());
            double hi = pw[Lsub / 2];
            std::nth_element(pw.begin(), pw.begin() + Lsub / 2 - 1, pw.begin() + Lsub / 2);
            double median = 0.5 * (hi + pw[Lsub / 2 - 1]);
            acc += median / ln2;
        }
        out[bi] = acc / frame.num_blocks;
    }
    return out;
}

SubbandFrame whiten(const SubbandFrame& frame, std::span<const double> sigma2) {
    if (sigma2.size() != frame.bands.size())
        throw DomainError("whiten: sigma2 size mismatch");
    SubbandFrame out = frame;
    for (std::size_t bi = 0; bi < frame.bands.size(); ++bi) {
        if (!(sigma2[bi] > 0.0)) throw DomainError("whiten: sigma2 must be positive");
        double s = 1.0 / std::sqrt(sigma2[bi]);
        for (int b = 0; b < frame.num_blocks; ++b)
            for (int n = 0; n < frame.subband_size; ++n)
                out.at(b, static_cast<int>(bi), n) *= s;
    }
    return out;
}

std::vector<double> average_stream_snr(const ChannelState& state, const StreamMap& map) {
    std::vector<double> out(map.num_streams());
    for (int m = 0; m < map.num_streams(); ++m) {
        const auto& sm = map.streams[m];
        if (sm.empty()) throw DomainError("average_stream_snr: empty stream");
        double acc = 0.0;
        for (int k : sm) {
            auto it = std::lower_bound(state.bands.begin(), state.bands.end(), k);
            if (it == state.bands.end() || *it != k)
                throw DomainError("average_stream_snr: band missing from channel state");
            acc += state.snr_per_band[static_cast<std::size_t>(it - state.bands.begin())];
        }
        out[m] = acc / static_cast<double>(sm.size());
    }
    return out;
}

const char* tap_form_name(TapForm form) {
    switch (form) {
        case TapForm::Whitened: return "whitened";
        case TapForm::Raw: return "joint";
        case TapForm::PerBand: return "perband";
    }
    return "?";
}

EqualizerTapSet compute_taps(const ChannelState& state, const PrototypeFilter& filter,
                             const SmtConfig& config, const StreamMap& map, TapForm form) {
    const int N = config.fc_block_len;
    const int Lsub = config.subband_size();
    if (state.subband_size != Lsub) throw DomainError("compute_taps: state/config mismatch");

    auto spec = prototype_spectrum(filter, N);
    std::vector<cplx> h0(Lsub);
    for (int n = 0; n < Lsub; ++n) h0[n] = std::conj(spec[((n - Lsub / 2) % N + N) % N]);

    EqualizerTapSet ts;
    ts.form = form;
    ts.subband_size = Lsub;
    ts.bands = state.bands;
    ts.taps.resize(state.bands.size() * static_cast<std::size_t>(Lsub));
    ts.stream_of_band.assign(state.bands.size(), -1);
    ts.stream_snr = average_stream_snr(state, map);

    auto band_index = [&state](int k) {
        auto it = std::lower_bound(state.bands.begin(), state.bands.end(), k);
        if (it == state.bands.end() || *it != k)
            throw DomainError("compute_taps: stream references unknown band");
        return static_cast<std::size_t>(it - state.bands.begin());
    };

    for (std::size_t bi = 0; bi < state.bands.size(); ++bi)
        if (!(state.sigma2[bi] > 0.0))
            throw DomainError("compute_taps: sigma2 must be positive");

    // |h c / sigma|^2 per band/tone, shared by all denominators
    std::vector<double> g2(state.bands.size() * static_cast<std::size_t>(Lsub));
    for (std::size_t bi = 0; bi < state.bands.size(); ++bi)
        for (int n = 0; n < Lsub; ++n)
            g2[bi * Lsub + n] =
                std::norm(h0[n]) * std::norm(state.c(static_cast<int>(bi), n)) / state.sigma2[bi];

    for (int m = 0; m < map.num_streams(); ++m) {
        double inv_snr_m = 0.0;
        if (form != TapForm::PerBand) {
            double snr = ts.stream_snr[m];
            if (!(snr > 0.0)) throw DomainError("compute_taps: stream SNR must be positive");
            inv_snr_m = std::isinf(snr) ? 0.0 : 1.0 / snr;
        }
        for (int k : map.streams[m]) {
            std::size_t bi = band_index(k);
            ts.stream_of_band[bi] = m;
            for (int n = 0; n < Lsub; ++n) {
                int np = (n + Lsub / 2) % Lsub;
                double den;
                if (form == TapForm::PerBand) {
                    double snr_k = state.snr_per_band[bi];
                    if (!(snr_k > 0.0)) throw DomainError("compute_taps: band SNR must be positive");
                    double inv_snr_k = std::isinf(snr_k) ? 0.0 : 1.0 / snr_k;
                    den = g2[bi * Lsub + n] + g2[bi * Lsub + np] + inv_snr_k;
                } else {
                    den = inv_snr_m;
                    for (int l : map.streams[m]) {
                        std::size_t li = band_index(l);
                        den += g2[li * Lsub + n] + g2[li * Lsub + np];
                    }
                }
                if (den <= 0.0) throw DomainError("compute_taps: degenerate denominator");
                cplx num = jpow(-k) * h0[n] * std::conj(state.c(static_cast<int>(bi), n));
                double sig = form == TapForm::Whitened ? std::sqrt(state.sigma2[bi])
                                                       : state.sigma2[bi];
                ts.taps[bi * Lsub + n] = num / sig / den;
            }
        }
    }
    return ts;
}

std::vector<std::vector<cplx>> equalize_combine(const SubbandFrame& frame,
                                                const EqualizerTapSet& taps,
                                                const StreamMap& map) {
    if (taps.subband_size != frame.subband_size || taps.bands != frame.bands)
        throw DomainError("equalize_combine: taps/frame dimension mismatch");
    const int Lsub = frame.subband_size;
    // independently equalized bands are averaged, jointly weighted ones summed
    const double comb = taps.form == TapForm::PerBand ? 1.0 / map.spread_factor : 1.0;
    std::vector<std::vector<cplx>> out(map.num_streams());
    for (auto& v : out)
        v.assign(static_cast<std::size_t>(frame.num_blocks) * Lsub, cplx{0.0, 0.0});
    for (std::size_t bi = 0; bi < frame.bands.size(); ++bi) {
        int m = taps.stream_of_band[bi];
        if (m < 0) continue;
        for (int b = 0; b < frame.num_blocks; ++b) {
            cplx* dst = &out[m][static_cast<std::size_t>(b) * Lsub];
            const cplx* w = &taps.taps[bi * Lsub];
            const cplx* x = &frame.at(b, static_cast<int>(bi), 0);
            for (int n = 0; n < Lsub; ++n) dst[n] += comb * w[n] * x[n];
        }
    }
    return out;
}

namespace {

// Shared lattice reconstruction: tones for one block -> real half-symbol
// estimates in the valid window. The IDFT is scaled by M L_sub / N = 2 so a
// unit folded tone gain lands at unit symbol amplitude; (-1)^i recenters the
// band downconversion and j^{-i} unwinds the transmit phase lattice.
class LatticeDemod {
  public:
    LatticeDemod(const SmtConfig& config)
        : plan_(static_cast<std::size_t>(config.subband_size())),
          buf_(config.subband_size()),
          i0_(config.fc_overlap_len / config.num_subcarriers),
          valid_(config.block_hop() / config.half_symbol_hop()) {}

    // writes `valid_` symbol estimates for block b into dst[b*valid_ ...]
    void run(const cplx* tones, int block, double* dst) {
        const int Lsub = static_cast<int>(buf_.size());
        std::copy(tones, tones + Lsub, buf_.begin());
        plan_.inverse(buf_);
        for (int j = 0; j < valid_; ++j) {
            int iloc = i0_ + j;
            long long iabs = static_cast<long long>(block) * valid_ + j;
            cplx v = buf_[iloc] * 2.0;
            if (iloc & 1) v = -v;
            dst[iabs] = (jpow(-iabs) * v).real();
        }
    }

    int valid_per_block() const { return valid_; }

  private:
    Fft plan_;
    std::vector<cplx> buf_;
    int i0_;
    int valid_;
};

} // namespace

std::vector<std::vector<double>> subband_demod(const std::vector<std::vector<cplx>>& stream_tones,
                                               const SmtConfig& config) {
    const int Lsub = config.subband_size();
    LatticeDemod dm(config);
    const int vb = dm.valid_per_block();
    std::vector<std::vector<double>> out(stream_tones.size());
    for (std::size_t m = 0; m < stream_tones.size(); ++m) {
        const auto& tones = stream_tones[m];
        if (tones.size() % Lsub != 0) throw FramingError("subband_demod: misaligned tone stream");
        int blocks = static_cast<int>(tones.size()) / Lsub;
        out[m].assign(static_cast<std::size_t>(blocks) * vb, 0.0);
        for (int b = 0; b < blocks; ++b)
            dm.run(&tones[static_cast<std::size_t>(b) * Lsub], b, out[m].data());
    }
    return out;
}

std::vector<StreamSymbols> demod_streams(const SubbandFrame& frame, const EqualizerTapSet& taps,
                                         const StreamMap& map, const SmtConfig& config) {
    if (taps.subband_size != frame.subband_size || taps.bands != frame.bands)
        throw DomainError("demod_streams: taps/frame dimension mismatch");
    const int Lsub = frame.subband_size;
    const int slots = frame.total_slots();
    LatticeDemod dm(config);

    std::vector<StreamSymbols> out(map.num_streams());
    for (int m = 0; m < map.num_streams(); ++m) {
        out[m].num_slots = slots;
        out[m].combined.assign(slots, 0.0);
        out[m].branches.assign(static_cast<std::size_t>(map.streams[m].size()) * slots, 0.0);
    }

    const double comb = taps.form == TapForm::PerBand ? 1.0 / map.spread_factor : 1.0;
    std::vector<cplx> prod(Lsub);
    for (std::size_t bi = 0; bi < frame.bands.size(); ++bi) {
        int m = taps.stream_of_band[bi];
        if (m < 0) continue;
        const auto& sm = map.streams[m];
        int branch = static_cast<int>(std::lower_bound(sm.begin(), sm.end(), frame.bands[bi]) -
                                      sm.begin());
        double* bdst = &out[m].branches[static_cast<std::size_t>(branch) * slots];
        for (int b = 0; b < frame.num_blocks; ++b) {
            const cplx* w = &taps.taps[bi * Lsub];
            const cplx* x = &frame.at(b, static_cast<int>(bi), 0);
            for (int n = 0; n < Lsub; ++n) prod[n] = comb * w[n] * x[n];
            dm.run(prod.data(), b, bdst);
        }
    }
    for (int m = 0; m < map.num_streams(); ++m) {
        const int nb = static_cast<int>(map.streams[m].size());
        for (int br = 0; br < nb; ++br)
            for (int s = 0; s < slots; ++s) out[m].combined[s] += out[m].branch(br, s);
    }
    return out;
}

DetectResult detect(const std::vector<StreamSymbols>& streams, const StreamMap& map) {
    DetectResult res;
    res.bits.resize(streams.size());
    res.soft.resize(streams.size());

    if (map.mode == SpreadMode::RepetitionQpsk) {
        for (std::size_t m = 0; m < streams.size(); ++m) {
            const auto& sym = streams[m].combined;
            res.bits[m].resize(sym.size());
            res.soft[m] = sym;
            for (std::size_t i = 0; i < sym.size(); ++i) res.bits[m][i] = sym[i] < 0.0 ? 1 : 0;
        }
        return res;
    }

    const int L = map.spread_factor;
    const int bph = map.bits_per_half_symbol();
    std::vector<double> corr(L);
    for (std::size_t m = 0; m < streams.size(); ++m) {
        const int slots = streams[m].num_slots;
        res.bits[m].resize(static_cast<std::size_t>(slots) * bph);
        res.soft[m].resize(slots);
        for (int s = 0; s < slots; ++s) {
            for (int br = 0; br < L; ++br) corr[br] = streams[m].branch(br, s);
            fwht_inplace(corr);
            int best = 0;
            for (int r = 1; r < L; ++r)
                if (corr[r] > corr[best]) best = r; // ties keep the lowest index
            res.soft[m][s] = corr[best];
            for (int b = 0; b < bph; ++b)
                res.bits[m][static_cast<std::size_t>(s) * bph + b] =
                    static_cast<std::uint8_t>((best >> (bph - 1 - b)) & 1);
        }
    }
    return res;
}

int demod_guard_slots(const PrototypeFilter& filter, const SmtConfig& config, int channel_taps) {
    const int D = config.half_symbol_hop();
    int reach = filter.length() - 1 + std::max(0, channel_taps - 1);
    return (reach + D - 1) / D + 2;
}

} // namespace fbmcss
