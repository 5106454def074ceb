#include "fbmcss/channel.hpp"

#include "fbmcss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace fbmcss {

ChannelProfile ChannelProfile::identity() { return ChannelProfile{1, 1.0, std::nullopt}; }

ChannelProfile ChannelProfile::los(double fs) {
    ChannelProfile p;
    p.tap_count = 32;
    p.decay_tau_samples = 10e-9 * fs; // ~10 ns diffuse decay
    p.los_k_factor_db = 6.0;
    return p;
}

ChannelProfile ChannelProfile::nlos(double fs) {
    ChannelProfile p;
    p.tap_count = 64;
    p.decay_tau_samples = 25e-9 * fs; // RMS delay spread ~= tau for an exponential PDP
    p.los_k_factor_db = std::nullopt;
    return p;
}

ChannelRealization draw_channel(const ChannelProfile& profile, RngStream& rng, double fs) {
    if (profile.tap_count < 1 || profile.decay_tau_samples <= 0.0)
        throw ConfigError("draw_channel: invalid profile");

    const int n = profile.tap_count;
    ChannelRealization ch;
    ch.los_k_factor_db = profile.los_k_factor_db;
    ch.taps.resize(n);

    if (n == 1) {
        ch.taps[0] = {1.0, 0.0};
        ch.rms_delay_spread_s = 0.0;
        return ch;
    }

    // diffuse part: E|h_i|^2 = exp(-i/tau), total diffuse power normalized to 1
    double diffuse_total = 0.0;
    for (int i = 0; i < n; ++i) diffuse_total += std::exp(-i / profile.decay_tau_samples);
    for (int i = 0; i < n; ++i) {
        double var = std::exp(-i / profile.decay_tau_samples) / diffuse_total;
        ch.taps[i] = rng.cnormal() * std::sqrt(var);
    }
    if (profile.los_k_factor_db) {
        double k_lin = std::pow(10.0, *profile.los_k_factor_db / 10.0);
        ch.taps[0] += cplx{std::sqrt(k_lin), 0.0}; // deterministic specular tap
    }

    double norm = 0.0;
    for (const auto& t : ch.taps) norm += std::norm(t);
    double s = 1.0 / std::sqrt(norm);
    for (auto& t : ch.taps) t *= s;

    // RMS delay spread of this realization
    double p0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double p = std::norm(ch.taps[i]);
        p0 += p;
        m1 += p * i;
        m2 += p * static_cast<double>(i) * i;
    }
    double mean = m1 / p0;
    ch.rms_delay_spread_s = std::sqrt(std::max(0.0, m2 / p0 - mean * mean)) / fs;
    return ch;
}

std::vector<cplx> fft_convolve(std::span<const cplx> x, std::span<const cplx> h) {
    if (x.empty() || h.empty()) return {};
    const std::size_t ny = x.size() + h.size() - 1;
    // block size: at least 8x filter length, power of two, capped for memory
    std::size_t nfft = 1024;
    while (nfft < 8 * h.size()) nfft <<= 1;
    while (nfft > ny * 2 && nfft > 1024) nfft >>= 1;
    if (nfft < 2 * h.size()) nfft = 2 * h.size();
    std::size_t n2 = 1;
    while (n2 < nfft) n2 <<= 1;
    nfft = n2;
    const std::size_t hop = nfft - (h.size() - 1);

    Fft plan(nfft);
    std::vector<cplx> H(nfft, cplx{0.0, 0.0});
    std::copy(h.begin(), h.end(), H.begin());
    plan.forward(H);

    std::vector<cplx> y(ny, cplx{0.0, 0.0});
    std::vector<cplx> buf(nfft);
    for (std::size_t start = 0; start < ny; start += hop) {
        // gather input block ending segment [start, start+nfft): overlap-save
        for (std::size_t i = 0; i < nfft; ++i) {
            // block index maps to x[start - (h.size()-1) + i]
            std::ptrdiff_t src = static_cast<std::ptrdiff_t>(start + i) -
                                 static_cast<std::ptrdiff_t>(h.size() - 1);
            buf[i] = (src >= 0 && src < static_cast<std::ptrdiff_t>(x.size()))
                         ? x[static_cast<std::size_t>(src)]
                         : cplx{0.0, 0.0};
        }
        plan.forward(buf);
        for (std::size_t i = 0; i < nfft; ++i) buf[i] *= H[i];
        plan.inverse(buf);
        for (std::size_t i = 0; i < hop && start + i < ny; ++i)
            y[start + i] = buf[h.size() - 1 + i];
    }
    return y;
}

std::vector<cplx> apply_channel(std::span<const cplx> samples, const ChannelRealization& ch) {
    if (ch.taps.empty()) throw ConfigError("apply_channel: empty channel");
    if (ch.taps.size() == 1) {
        std::vector<cplx> y(samples.begin(), samples.end());
        if (ch.taps[0] != cplx{1.0, 0.0})
            for (auto& v : y) v *= ch.taps[0];
        return y;
    }
    if (ch.taps.size() <= 8) {
        // short channels: direct form
        std::vector<cplx> y(samples.size() + ch.taps.size() - 1, cplx{0.0, 0.0});
        for (std::size_t i = 0; i < samples.size(); ++i)
            for (std::size_t j = 0; j < ch.taps.size(); ++j) y[i + j] += samples[i] * ch.taps[j];
        return y;
    }
    return fft_convolve(samples, ch.taps);
}

double mean_power(std::span<const cplx> samples) {
    double acc = 0.0;
    for (const auto& v : samples) acc += std::norm(v);
    return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

std::vector<cplx> add_awgn(std::span<const cplx> samples, double snr_db, double signal_power_ref,
                           RngStream& rng) {
    std::vector<cplx> y(samples.begin(), samples.end());
    if (std::isinf(snr_db) && snr_db > 0) return y;
    if (signal_power_ref <= 0.0) throw DomainError("add_awgn: signal power reference must be > 0");
    double nvar = signal_power_ref / std::pow(10.0, snr_db / 10.0);
    double s = std::sqrt(nvar);
    for (auto& v : y) v += s * rng.cnormal();
    return y;
}

void InterfererSpec::validate(double W) const {
    if (count < 0) throw ConfigError("interferer count must be >= 0");
    if (psd_above_noise_db_low > psd_above_noise_db_high)
        throw ConfigError("interferer PSD range: low > high");
    if (count > 0 && (bandwidth_hz <= 0.0 || bandwidth_hz >= W))
        throw ConfigError("interferer bandwidth must lie inside the signal band");
}

std::vector<double> interferer_shaping_filter(double bw, double fs) {
    // Kaiser lowpass, cutoff bw/2. The transition is kept narrow (6% of the
    // bandwidth) so the skirt stays close to the nominal band the oracle
    // noise model assumes; stopband is 80 dB, far past the 60 dB floor
    // required at 1.5x the half-bandwidth.
    const double atten_db = 80.0;
    const double beta = 0.1102 * (atten_db - 8.7);
    const double trans = 0.06 * bw / fs; // normalized transition width
    int len = static_cast<int>(std::ceil((atten_db - 8.0) / (2.285 * 2.0 * std::numbers::pi * trans)));
    if (len % 2 == 0) ++len;
    const int mid = len / 2;
    const double fc = 0.5 * bw / fs; // cutoff (cycles/sample)

    auto bessel_i0 = [](double x) {
        double sum = 1.0, term = 1.0;
        for (int k = 1; k < 64; ++k) {
            term *= (x / (2.0 * k)) * (x / (2.0 * k));
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return sum;
    };

    std::vector<double> h(len);
    double dc = 0.0;
    for (int i = 0; i < len; ++i) {
        double t = i - mid;
        double sinc = t == 0.0 ? 2.0 * fc
                               : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
        double r = 2.0 * static_cast<double>(i) / (len - 1) - 1.0;
        double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / bessel_i0(beta);
        h[i] = sinc * w;
        dc += h[i];
    }
    for (double& v : h) v /= dc; // unit passband gain
    return h;
}

std::vector<Interferer> add_interferers(std::vector<cplx>& samples, const InterfererSpec& spec,
                                        double noise_variance, double fs, RngStream& rng) {
    spec.validate(fs);
    std::vector<Interferer> truth;
    if (spec.count == 0 || samples.empty()) return truth;
    if (noise_variance <= 0.0)
        throw DomainError("add_interferers: noise variance reference must be > 0");

    auto h = interferer_shaping_filter(spec.bandwidth_hz, fs);
    const double half_span = 0.5 * (fs - spec.bandwidth_hz);

    for (int j = 0; j < spec.count; ++j) {
        Interferer it;
        it.center_freq_hz = rng.uniform(-half_span, half_span);
        it.psd_above_noise_db = rng.uniform(spec.psd_above_noise_db_low, spec.psd_above_noise_db_high);
        it.bandwidth_hz = spec.bandwidth_hz;
        truth.push_back(it);

        // white source with in-band PSD = rho * noise PSD after unit-gain shaping
        double rho = std::pow(10.0, it.psd_above_noise_db / 10.0);
        double src_sd = std::sqrt(rho * noise_variance);
        std::vector<cplx> w(samples.size() + h.size() - 1);
        for (auto& v : w) v = src_sd * rng.cnormal();
        std::vector<cplx> hh(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) hh[i] = cplx{h[i], 0.0};
        auto shaped = fft_convolve(w, hh);
        // trim the filter transient so shaped[i] aligns with samples[i]
        const std::size_t off = h.size() - 1;
        const double wstep = 2.0 * std::numbers::pi * it.center_freq_hz / fs;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double ang = wstep * static_cast<double>(i);
            samples[i] += shaped[off + i] * cplx{std::cos(ang), std::sin(ang)};
        }
    }
    return truth;
}

ChannelRealization load_channel_taps_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open channel tap file: " + path);
    std::vector<std::pair<long, cplx>> rows;
    std::string line;
    long max_delay = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw IoError("bad channel tap row: " + line);
        long delay = std::stol(a);
        if (delay < 0) throw IoError("negative tap delay in " + path);
        rows.emplace_back(delay, cplx{std::stod(b), std::stod(c)});
        max_delay = std::max(max_delay, delay);
    }
    if (rows.empty()) throw IoError("channel tap file is empty: " + path);
    ChannelRealization ch;
    ch.taps.assign(static_cast<std::size_t>(max_delay) + 1, cplx{0.0, 0.0});
    for (auto& [d, v] : rows) ch.taps[static_cast<std::size_t>(d)] += v;
    double norm = 0.0;
    for (const auto& t : ch.taps) norm += std::norm(t);
    if (norm <= 0.0) throw IoError("channel tap file has zero energy: " + path);
    double s = 1.0 / std::sqrt(norm);
    for (auto& t : ch.taps) t *= s;
    return ch;
}

void save_channel_taps_csv(const std::string& path, const ChannelRealization& ch) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write channel tap file: " + path);
    out << "# delay_samples,real,imag\n";
    out.precision(17);
    for (std::size_t i = 0; i < ch.taps.size(); ++i)
        out << i << "," << ch.taps[i].real() << "," << ch.taps[i].imag() << "\n";
}

void save_interferers_csv(const std::string& path, std::span<const Interferer> list) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write interferer file: " + path);
    out << "# center_hz,psd_db_above_noise\n";
    out.precision(17);
    for (const auto& it : list) out << it.center_freq_hz << "," << it.psd_above_noise_db << "\n";
}

} // namespace fbmcss
