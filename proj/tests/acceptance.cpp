// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include "fbmcss/channel.hpp"
#include "fbmcss/core.hpp"
#include "fbmcss/harness.hpp"
#include "fbmcss/io.hpp"
#include "fbmcss/prototype.hpp"
#include "fbmcss/receiver.hpp"
#include "fbmcss/rng.hpp"
#include "fbmcss/transmit.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

using namespace fbmcss;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- criterion 1: overlap-save analysis vs direct time-domain oracle -------

std::vector<cplx> direct_subband(const std::vector<cplx>& x, const PrototypeFilter& p,
                                 const SmtConfig& cfg, int band, int count) {
    const int D = cfg.half_symbol_hop();
    const int M = cfg.num_subcarriers;
    std::vector<cplx> y(count);
    const cplx rot = jpow(-band);
    for (int i = 0; i < count; ++i) {
        cplx acc{0.0, 0.0};
        for (int t = 0; t < p.length(); ++t) {
            std::size_t s = static_cast<std::size_t>(i) * D + t;
            if (s >= x.size()) break;
            double ang = -2.0 * std::numbers::pi * band * static_cast<double>(s) / M;
            acc += x[s] * p.taps[t] * cplx{std::cos(ang), std::sin(ang)};
        }
        y[i] = rot * acc;
    }
    return y;
}

void criterion_1() {
    const double t0 = now_s();
    RngStream rng(101);
    double worst = 0.0;
    const int configs = 100;
    const int m_choices[3] = {16, 64, 256};
    for (int i = 0; i < configs; ++i) {
        const int M = m_choices[rng.next_u64() % 3];
        const int N = M * (8 << (rng.next_u64() % 2));
        const int No = (rng.next_u64() & 1) ? N / 2 : 5 * N / 8;
        auto cfg = SmtConfig::create(1e6 * M, M, N, No);
        const int kappa = (rng.next_u64() & 1) ? 3 : 4;
        const double roll = (kappa == 3) ? 1.0 : ((rng.next_u64() & 1) ? 1.0 : 0.75);
        auto p = design_prototype(cfg, kappa, roll);

        std::vector<cplx> x(static_cast<std::size_t>(N) + 2 * cfg.block_hop());
        for (auto& v : x) v = rng.cnormal();

        for (int rep = 0; rep < 2; ++rep) {
            int band = static_cast<int>(rng.next_u64() % M);
            auto fc = matched_filter_subband(x, p, cfg, band);
            auto direct = direct_subband(x, p, cfg, band, static_cast<int>(fc.size()));
            double err = 0.0, ref = 0.0;
            for (std::size_t j = 0; j < fc.size(); ++j) {
                err += std::norm(fc[j] - direct[j]);
                ref += std::norm(direct[j]);
            }
            worst = std::max(worst, std::sqrt(err / ref));
        }
    }
    const double dt = now_s() - t0;
    char detail[160];
    std::snprintf(detail, sizeof detail, "worst RMS %.3e over %d configs, %.1f s", worst, configs,
                  dt);
    report(1, worst < 1e-9 && dt < 60.0, "fast-convolution analysis equals the direct oracle",
           detail);
}

// ---- criterion 2: perfect reconstruction at M = 512 -------------------------

void criterion_2() {
    auto cfg = SmtConfig::create(160e6, 512);
    auto proto = design_prototype(cfg, 4, 1.0);
    auto map = partition_streams(cfg, 512, SpreadMode::RepetitionQpsk); // independent symbols
    const int slots = 40; // 40 * 512 = 20480 real symbols

    RngStream rng(102);
    auto frame = OqamFrame::zeros(cfg, slots);
    for (int k = 0; k < 512; ++k)
        for (int n = 0; n < slots; ++n)
            frame.at(k, n) = (rng.next_u64() & 1 ? 1.0 : -1.0) / std::numbers::sqrt2;

    auto s = synthesize(frame, proto, cfg);
    auto sub = overlap_save_analyze(s, cfg);
    ChannelRealization ident;
    ident.taps = {cplx{1.0, 0.0}};
    auto state = oracle_channel_state(ident, proto, cfg, 0.0, {}, 0.5);
    auto taps = compute_taps(state, proto, cfg, map, TapForm::Raw);
    auto streams = demod_streams(sub, taps, map, cfg);

    const int guard = demod_guard_slots(proto, cfg);
    double err = 0.0, sig = 0.0;
    long long symbols = 0;
    for (int m = 0; m < map.num_streams(); ++m)
        for (int n = guard; n < slots - guard; ++n) {
            double want = frame.at(map.streams[m][0], n);
            double e = streams[m].combined[n] - want;
            err += e * e;
            sig += want * want;
            ++symbols;
        }
    double resid_db = 10.0 * std::log10(err / sig);
    char detail[120];
    std::snprintf(detail, sizeof detail, "residual %.1f dB over %lld symbols", resid_db, symbols);
    report(2, resid_db < -40.0 && symbols >= 10000, "back-to-back reconstruction at M = 512",
           detail);
}

// ---- criterion 3: despreading processing gain --------------------------------

void criterion_3() {
    const int M = 64;
    auto cfg = SmtConfig::create(64e6, M);
    auto proto = design_prototype(cfg, 4, 1.0);
    const double snr_in_db = -15.0;
    bool pass = true;
    std::ostringstream detail;

    for (int L : {4, 16, 64}) {
        auto map = partition_streams(cfg, M / L, SpreadMode::RepetitionQpsk);
        const long long want_symbols = 1000000;
        const int chunk_slots = 8192;
        RngStream rng(103 + L);

        double num = 0.0, den = 0.0, err = 0.0;
        long long measured = 0;
        std::vector<std::vector<double>> tx(map.num_streams());
        // first pass accumulates alpha, second the residual; do both jointly
        // by keeping per-chunk sums (alpha fits chunk-locally, symbols are
        // plentiful so the bias is negligible)
        while (measured < want_symbols) {
            auto frame = OqamFrame::zeros(cfg, chunk_slots);
            for (int m = 0; m < map.num_streams(); ++m) {
                tx[m].assign(chunk_slots, 0.0);
                for (int n = 0; n < chunk_slots; ++n) {
                    double d = (rng.next_u64() & 1 ? 1.0 : -1.0) / std::numbers::sqrt2;
                    tx[m][n] = d;
                    for (int k : map.streams[m]) frame.at(k, n) = d;
                }
            }
            auto s = synthesize(frame, proto, cfg);
            double sp = mean_power(s);
            auto noisy = add_awgn(s, snr_in_db, sp, rng);
            double nvar = sp / std::pow(10.0, snr_in_db / 10.0);
            auto sub = overlap_save_analyze(noisy, cfg);
            ChannelRealization ident;
            ident.taps = {cplx{1.0, 0.0}};
            auto state = oracle_channel_state(ident, proto, cfg, nvar, {}, 0.5);
            auto taps = compute_taps(state, proto, cfg, map, TapForm::Raw);
            auto streams = demod_streams(sub, taps, map, cfg);
            const int guard = demod_guard_slots(proto, cfg);
            double a_num = 0.0, a_den = 0.0;
            for (int m = 0; m < map.num_streams(); ++m)
                for (int n = guard; n < chunk_slots - guard; ++n) {
                    a_num += streams[m].combined[n] * tx[m][n];
                    a_den += tx[m][n] * tx[m][n];
                }
            double alpha = a_num / a_den;
            for (int m = 0; m < map.num_streams(); ++m)
                for (int n = guard; n < chunk_slots - guard; ++n) {
                    double e = streams[m].combined[n] - alpha * tx[m][n];
                    err += e * e;
                    num += alpha * alpha * tx[m][n] * tx[m][n];
                    den += 1.0;
                    ++measured;
                }
        }
        double out_snr_db = 10.0 * std::log10(num / err);
        double gain = out_snr_db - snr_in_db;
        double want = processing_gain_db(L);
        bool ok = std::abs(gain - want) < 0.5;
        pass = pass && ok;
        detail << "L=" << L << ": " << std::fixed << std::setprecision(2) << gain << " dB (want "
               << want << " +-0.5, n=" << measured << ") ";
    }
    report(3, pass, "despreading gain equals 10 log10 L", detail.str());
}

// ---- criterion 4: joint taps with a single-band stream reduce exactly --------

void criterion_4() {
    auto cfg = SmtConfig::create(8e6, 8, 128, 64);
    auto map = partition_streams(cfg, 8, SpreadMode::RepetitionQpsk); // L = 1
    auto proto = design_prototype(cfg, 4, 1.0);
    RngStream rng(104);
    double worst = 0.0;
    long long instances = 0;
    while (instances < 10000) {
        ChannelState st;
        st.bands = cfg.active_subcarriers;
        st.subband_size = cfg.subband_size();
        st.c_bins.resize(st.bands.size() * st.subband_size);
        for (auto& c : st.c_bins) c = rng.cnormal();
        st.sigma2.resize(8);
        st.snr_per_band.resize(8);
        for (int i = 0; i < 8; ++i) {
            st.sigma2[i] = 0.05 + rng.uniform() * 20.0;
            st.snr_per_band[i] = 0.01 + rng.uniform() * 100.0;
        }
        auto joint = compute_taps(st, proto, cfg, map, TapForm::Raw);
        auto perband = compute_taps(st, proto, cfg, map, TapForm::PerBand);
        for (std::size_t i = 0; i < joint.taps.size(); ++i) {
            double ref = std::abs(perband.taps[i]);
            if (ref > 0.0) worst = std::max(worst, std::abs(joint.taps[i] - perband.taps[i]) / ref);
        }
        instances += 8;
    }
    char detail[120];
    std::snprintf(detail, sizeof detail, "worst relative gap %.2e over %lld instances", worst,
                  instances);
    report(4, worst <= 1e-15, "joint taps with L = 1 equal the per-band taps", detail);
}

// ---- criterion 5: brute-force Wiener equivalence ------------------------------

std::vector<cplx> solve_linear(std::vector<std::vector<cplx>> A, std::vector<cplx> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            cplx f = A[r][col] / A[col][col];
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t i = n; i-- > 0;) {
        cplx acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= A[i][c] * x[c];
        x[i] = acc / A[i][i];
    }
    return x;
}

void criterion_5() {
    RngStream rng(105);
    double worst_tap = 0.0, worst_mse = 0.0;
    const int instances = 300;
    for (int rep = 0; rep < instances; ++rep) {
        int L = 1 << (rng.next_u64() % 4); // 1, 2, 4, 8
        std::vector<int> active(L);
        for (int i = 0; i < L; ++i) active[i] = i;
        auto cfg = SmtConfig::create(8e6, 8, 128, 64, active);
        auto map = StreamMap::create({active}, SpreadMode::RepetitionQpsk, cfg);
        auto proto = design_prototype(cfg, 4, 1.0);
        const int Lsub = cfg.subband_size();
        const int N = cfg.fc_block_len;

        ChannelState st;
        st.bands = active;
        st.subband_size = Lsub;
        st.c_bins.resize(static_cast<std::size_t>(L) * Lsub);
        for (auto& c : st.c_bins) c = rng.cnormal();
        st.sigma2.resize(L);
        st.snr_per_band.resize(L);
        for (int i = 0; i < L; ++i) {
            st.sigma2[i] = 0.1 + rng.uniform() * 8.0;
            st.snr_per_band[i] = 0.1 + rng.uniform() * 20.0;
        }
        auto taps = compute_taps(st, proto, cfg, map, TapForm::Raw);
        const double sVar = taps.stream_snr[0];

        auto spec = prototype_spectrum(proto, N);
        auto hval = [&](int tone) {
            int off = ((tone - Lsub / 2) % N + N) % N;
            return std::conj(spec[off]);
        };
        for (int tone_rep = 0; tone_rep < 4; ++tone_rep) {
            int n = static_cast<int>(rng.next_u64() % Lsub);
            int np = (n + Lsub / 2) % Lsub;
            const int dim = 2 * L;
            std::vector<cplx> g(dim);
            std::vector<double> nv(dim);
            for (int l = 0; l < L; ++l) {
                g[2 * l] = jpow(active[l]) * std::conj(hval(n)) * st.c(l, n);
                g[2 * l + 1] = jpow(active[l]) * std::conj(hval(np)) * st.c(l, np);
                nv[2 * l] = nv[2 * l + 1] = st.sigma2[l];
            }
            std::vector<std::vector<cplx>> R(dim, std::vector<cplx>(dim));
            std::vector<cplx> p(dim);
            for (int r = 0; r < dim; ++r) {
                for (int c = 0; c < dim; ++c) R[r][c] = sVar * g[r] * std::conj(g[c]);
                R[r][r] += nv[r];
                p[r] = sVar * g[r];
            }
            auto w_opt = solve_linear(R, p);

            auto mse_of = [&](const std::vector<cplx>& w) {
                cplx lin{0.0, 0.0};
                for (int r = 0; r < dim; ++r) lin += w[r] * p[r];
                cplx quad{0.0, 0.0};
                for (int r = 0; r < dim; ++r)
                    for (int c = 0; c < dim; ++c) quad += w[r] * R[r][c] * std::conj(w[c]);
                return sVar - 2.0 * lin.real() + quad.real();
            };
            std::vector<cplx> w_impl(dim), w_orc(dim);
            for (int l = 0; l < L; ++l) {
                w_impl[2 * l] = taps.w(l, n);
                w_impl[2 * l + 1] = taps.w(l, np);
                w_orc[2 * l] = std::conj(w_opt[2 * l]);
                w_orc[2 * l + 1] = std::conj(w_opt[2 * l + 1]);
                worst_tap = std::max(worst_tap, std::abs(w_impl[2 * l] - w_orc[2 * l]) /
                                                    std::abs(w_orc[2 * l]));
                worst_tap = std::max(worst_tap, std::abs(w_impl[2 * l + 1] - w_orc[2 * l + 1]) /
                                                    std::abs(w_orc[2 * l + 1]));
            }
            double m1 = mse_of(w_impl), m2 = mse_of(w_orc);
            worst_mse = std::max(worst_mse, std::abs(m1 - m2) / std::abs(m2));
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail, "worst tap gap %.2e, worst MSE gap %.2e over %d instances",
                  worst_tap, worst_mse, instances);
    report(5, worst_tap < 1e-9 && worst_mse < 1e-9,
           "compute_taps matches the stacked Wiener matrix inversion", detail);
}

// ---- criteria 6, 7, 10: desk-scale BER behavior ------------------------------

ExperimentSpec nbi_experiment() {
    ExperimentSpec spec;
    spec.system = preset_system_spec("desk-nlos");
    spec.channel_kind = ChannelProfileKind::Nlos;
    spec.interferers.count = 1;
    spec.interferers.bandwidth_hz = 16e6; // ~10% of the band
    spec.interferers.psd_above_noise_db_low = 30.0;
    spec.interferers.psd_above_noise_db_high = 30.0;
    spec.snr_db = {-12.0, -10.0};
    spec.payload_slots_per_trial = 512;
    spec.target_errors = 100;
    spec.max_trials_per_point = 192;
    spec.seed = 1;
    spec.workers = 4;
    return spec;
}

BerTable g_nbi_table; // shared between criteria 6 and 10

void criterion_6() {
    const double t0 = now_s();
    auto spec = nbi_experiment();
    g_nbi_table = run_ber_sweep(spec);
    const double dt = now_s() - t0;

    // lowest SNR point where the per-band BER exceeds 1e-2
    double chosen_snr = 0.0;
    bool found = false;
    for (double snr : spec.snr_db) {
        const auto& pb = g_nbi_table.at(snr, TapForm::PerBand);
        if (pb.ber() > 1e-2) {
            chosen_snr = snr;
            found = true;
            break;
        }
    }
    if (!found) {
        report(6, false, "joint equalizer suppresses the narrowband interferer",
               "no swept point has per-band BER above 1e-2");
        return;
    }
    const auto& joint = g_nbi_table.at(chosen_snr, TapForm::Raw);
    const auto& perband = g_nbi_table.at(chosen_snr, TapForm::PerBand);
    bool enough = joint.errors >= 100 && perband.errors >= 100;
    bool ordered = joint.ber() <= 0.1 * perband.ber();
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "at %+.0f dB: joint %.3e vs per-band %.3e (ratio %.3f, %lld/%lld errors), %.0f s",
                  chosen_snr, joint.ber(), perband.ber(), joint.ber() / perband.ber(),
                  joint.errors, perband.errors, dt);
    report(6, enough && ordered && dt < 1800.0,
           "joint equalizer suppresses the narrowband interferer", detail);
}

void criterion_7() {
    // zero interferers over the AWGN-only channel: with flat noise and flat
    // gains the two forms see identical per-branch statistics
    auto spec = nbi_experiment();
    spec.interferers.count = 0;
    spec.identity_channel = true;
    spec.snr_db = {-16.0, -14.0, -12.0, -10.0};
    spec.max_trials_per_point = 96;
    bool pass = true;
    auto table = run_ber_sweep(spec);
    std::ostringstream detail;
    for (double snr : spec.snr_db) {
        const auto& j = table.at(snr, TapForm::Raw);
        const auto& p = table.at(snr, TapForm::PerBand);
        auto cj = wilson_ci(j.errors, j.bits);
        auto cp = wilson_ci(p.errors, p.bits);
        bool overlap = cj.lo <= cp.hi && cp.lo <= cj.hi;
        pass = pass && overlap;
        detail << std::scientific << std::setprecision(2) << snr << " dB: " << j.ber() << "/"
               << p.ber() << (overlap ? " " : " DISJOINT ");
    }
    report(7, pass, "joint and per-band BERs coincide without interference", detail.str());
}

void criterion_10() {
    auto spec = nbi_experiment();
    auto dir_base = std::filesystem::temp_directory_path() / "fbmcss_acceptance";
    std::filesystem::remove_all(dir_base);

    spec.workers = 2;
    auto t_a = run_ber_sweep(spec);
    auto csv_a = emit_outputs(t_a, spec, (dir_base / "a").string());
    spec.workers = 5;
    auto t_b = run_ber_sweep(spec);
    auto csv_b = emit_outputs(t_b, spec, (dir_base / "b").string());

    bool identical = slurp(csv_a) == slurp(csv_b);
    // and both agree with the criterion-6 run (workers = 4)
    bool matches_6 = true;
    for (std::size_t i = 0; i < g_nbi_table.points.size(); ++i) {
        matches_6 = matches_6 && t_a.points[i].bits == g_nbi_table.points[i].bits &&
                    t_a.points[i].errors == g_nbi_table.points[i].errors;
    }
    report(10, identical && matches_6, "reruns are byte-identical regardless of worker count",
           identical ? (matches_6 ? "csv bodies identical across 2, 4, 5 workers"
                                  : "csv identical but differs from criterion 6 run")
                     : "csv bodies differ");
    std::filesystem::remove_all(dir_base);
}

// ---- criterion 8: documented non-goals replaced by rate arithmetic -----------

void criterion_8() {
    auto c = SmtConfig::create(1280e6, 128);
    auto m = partition_streams(c, 1, SpreadMode::HadamardMulticode);
    bool r140 = std::abs(raw_bit_rate_bps(c, m) - 140e6) < 1e-3;
    auto c2 = SmtConfig::create(1280e6, 16384);
    auto m2 = partition_streams(c2, 1, SpreadMode::HadamardMulticode);
    bool r22 = std::abs(raw_bit_rate_bps(c2, m2) - 2.1875e6) < 1e-6;
    bool g = std::abs(processing_gain_db(100) - 20.0) < 1e-12;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "140 Mbps and 2.1875 Mbps reproduced exactly; absolute Table-I rates and the "
                  "-36 dB waterfall stay out of scope (no LDPC, desk-scale bandwidth)");
    report(8, r140 && r22 && g, "reference rate arithmetic replaces absolute-scale numbers",
           detail);
}

// ---- criterion 9: mask closed loop -------------------------------------------

void criterion_9() {
    struct Case {
        Region region;
        double carrier_hz;
    };
    const Case cases[] = {
        {Region::FccUsa, 6.85e9},
        {Region::EccEurope, 7.25e9},
        {Region::Japan, 8.75e9},
    };
    bool pass = true;
    std::ostringstream detail;
    for (const auto& c : cases) {
        PsdReportSpec spec;
        spec.system = preset_system_spec("desk-los");
        spec.region = c.region;
        spec.carrier_hz = c.carrier_hz;
        spec.margin_db = 1.0;
        spec.payload_slots = 8192;
        auto rep = run_psd_report(spec);
        bool ok = !rep.degenerate && rep.compliance.pass && rep.in_band_ripple_db < 1.0;
        pass = pass && ok;
        detail << region_name(c.region) << ": " << (rep.compliance.pass ? "pass" : "FAIL")
               << std::fixed << std::setprecision(2) << " ripple " << rep.in_band_ripple_db
               << " dB; ";
    }
    report(9, pass, "plan -> synthesize -> measure -> compliance closes for all regions",
           detail.str());
}

} // namespace

int main() {
    std::printf("fbmcss acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
