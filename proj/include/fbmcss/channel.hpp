#ifndef FBMCSS_CHANNEL_HPP
#define FBMCSS_CHANNEL_HPP

#include "fbmcss/fft.hpp"
#include "fbmcss/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fbmcss {

// Tap-delay-line channel at the system sample rate, normalized to unit
// average power gain (sum |tap|^2 = 1) so receiver-input SNR is well defined.
struct ChannelRealization {
    std::vector<cplx> taps; // first tap at delay 0
    double rms_delay_spread_s = 0.0;
    std::optional<double> los_k_factor_db;
};

enum class ChannelProfileKind { Los, Nlos };

// Simplified surrogate for the IEEE802.15.4 industrial models: exponential
// power-delay profile with independent complex Gaussian taps; LOS adds a
// deterministic first tap set by the K-factor. Surrogate values, not from
// the reference model.
struct ChannelProfile {
    int tap_count = 1;
    double decay_tau_samples = 1.0;
    std::optional<double> los_k_factor_db;

    static ChannelProfile identity();
    static ChannelProfile los(double sample_rate_hz);  // 32 taps, K = 6 dB
    static ChannelProfile nlos(double sample_rate_hz); // 64 taps, ~25 ns RMS spread
};

ChannelRealization draw_channel(const ChannelProfile& profile, RngStream& rng,
                                double sample_rate_hz);

// full-length linear convolution (output length = input + taps - 1)
std::vector<cplx> apply_channel(std::span<const cplx> samples, const ChannelRealization& ch);

// generic FFT overlap-save linear convolution
std::vector<cplx> fft_convolve(std::span<const cplx> x, std::span<const cplx> h);

// AWGN at the given SNR relative to signal_power_ref (per-sample power).
// snr_db = +infinity returns the input unchanged.
std::vector<cplx> add_awgn(std::span<const cplx> samples, double snr_db, double signal_power_ref,
                           RngStream& rng);

double mean_power(std::span<const cplx> samples);

// Narrowband interferers: band-limited Gaussian noise, each with a uniformly
// drawn center frequency and an in-band PSD of noise_psd * 10^(u/10) with u
// uniform over the configured dB range.
struct InterfererSpec {
    int count = 4;
    double bandwidth_hz = 20e6;
    double psd_above_noise_db_low = 5.0;
    double psd_above_noise_db_high = 40.0;

    void validate(double total_bandwidth_hz) const;
};

struct Interferer {
    double center_freq_hz = 0.0;      // baseband, in [-W/2, W/2)
    double psd_above_noise_db = 0.0;  // ground truth level
    double bandwidth_hz = 0.0;
};

// Adds the drawn interferers to `samples` in place and returns the ground
// truth for oracle-CSI receivers. noise_variance is the per-sample AWGN
// power the dB levels are measured against.
std::vector<Interferer> add_interferers(std::vector<cplx>& samples, const InterfererSpec& spec,
                                        double noise_variance, double sample_rate_hz,
                                        RngStream& rng);

// the shaping lowpass used by the interferer generator (exposed for tests)
std::vector<double> interferer_shaping_filter(double bandwidth_hz, double sample_rate_hz);

// channel tap file: CSV rows of (delay_samples, real, imag)
ChannelRealization load_channel_taps_csv(const std::string& path);
void save_channel_taps_csv(const std::string& path, const ChannelRealization& ch);

// interferer ground truth: CSV rows of (center_hz, psd_db_above_noise)
void save_interferers_csv(const std::string& path, std::span<const Interferer> list);

} // namespace fbmcss

#endif
