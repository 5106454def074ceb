#include "fbmcss/harness.hpp"

#include "fbmcss/errors.hpp"
#include "fbmcss/io.hpp"
#include "fbmcss/prototype.hpp"
#include "fbmcss/rng.hpp"
#include "fbmcss/transmit.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fbmcss {

namespace {

// stage labels used when propagating component failures
struct StageGuard {
    const char* stage;
    template <typename F>
    auto run(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const Error& e) {
            throw Error(std::string(stage) + ": " + e.what());
        }
    }
};

ChannelRealization trial_channel(const ExperimentSpec& spec, const SmtConfig& config,
                                 RngStream& rng) {
    if (spec.channel_taps_file) return load_channel_taps_csv(*spec.channel_taps_file);
    if (spec.identity_channel) {
        ChannelRealization ch;
        ch.taps = {cplx{1.0, 0.0}};
        return ch;
    }
    auto profile = spec.channel_kind == ChannelProfileKind::Los
                       ? ChannelProfile::los(config.total_bandwidth_hz)
                       : ChannelProfile::nlos(config.total_bandwidth_hz);
    return draw_channel(profile, rng, config.total_bandwidth_hz);
}

} // namespace

void ExperimentSpec::validate() const {
    if (snr_db.empty()) throw ConfigError("experiment: SNR list is empty");
    if (forms.empty()) throw ConfigError("experiment: no equalizer forms selected");
    if (payload_slots_per_trial < 4 || payload_slots_per_trial % 2 != 0)
        throw ConfigError("experiment: payload slots must be even and >= 4");
    if (target_errors < 1) throw ConfigError("experiment: target errors must be >= 1");
    if (max_trials_per_point < 1) throw ConfigError("experiment: trial cap must be >= 1");
    if (trial_batch < 1) throw ConfigError("experiment: trial batch must be >= 1");
    if (interferers.count > 0) {
        interferers.validate(system.total_bandwidth_hz);
        for (double s : snr_db)
            if (std::isinf(s))
                throw ConfigError("experiment: interferer levels are undefined without noise");
    }
}

TrialResult run_trial(const ExperimentSpec& spec, double snr_db, int point_idx, int trial_idx) {
    RngStream base(spec.seed);
    const std::uint64_t p = static_cast<std::uint64_t>(point_idx);
    const std::uint64_t t = static_cast<std::uint64_t>(trial_idx);
    RngStream payload_rng = base.derive({1, p, t});
    RngStream channel_rng = base.derive({2, p, t});
    RngStream nbi_rng = base.derive({3, p, t});
    RngStream noise_rng = base.derive({4, p, t});

    StageGuard cfg_stage{"core-model"};
    auto config = cfg_stage.run([&] { return spec.system.make_config(); });
    auto map = cfg_stage.run([&] { return spec.system.make_stream_map(config); });
    StageGuard tx_stage{"smt-tx"};
    auto proto = tx_stage.run([&] {
        return design_prototype(config, spec.system.prototype_overlap, spec.system.roll_off);
    });

    const int nslots = spec.payload_slots_per_trial;
    const int bph = map.bits_per_half_symbol();
    std::vector<std::vector<std::uint8_t>> tx_bits(map.num_streams());
    for (auto& v : tx_bits) {
        v.resize(static_cast<std::size_t>(nslots) * bph);
        for (auto& b : v) b = payload_rng.next_u64() & 1;
    }

    auto frame = tx_stage.run([&] { return modulate_bits(tx_bits, map, config); });
    auto tx_samples = tx_stage.run([&] { return synthesize(frame, proto, config); });

    StageGuard env_stage{"channel-env"};
    auto channel = env_stage.run([&] { return trial_channel(spec, config, channel_rng); });
    auto rx = env_stage.run([&] { return apply_channel(tx_samples, channel); });

    const double sig_power = mean_power(rx);
    double noise_var = 0.0;
    std::vector<Interferer> truth;
    if (!std::isinf(snr_db)) {
        noise_var = sig_power / std::pow(10.0, snr_db / 10.0);
        if (spec.interferers.count > 0)
            truth = env_stage.run([&] {
                return add_interferers(rx, spec.interferers, noise_var,
                                       config.total_bandwidth_hz, nbi_rng);
            });
        rx = env_stage.run([&] { return add_awgn(rx, snr_db, sig_power, noise_rng); });
    }

    StageGuard rx_stage{"fc-rx"};
    auto sub = rx_stage.run([&] { return overlap_save_analyze(rx, config); });
    // The joint/whitened forms get the interference-aware noise state; the
    // per-band form is the no-suppression baseline, so its state knows the
    // channel and the thermal noise floor but not the interference profile.
    auto state = rx_stage.run([&] {
        return oracle_channel_state(channel, proto, config, noise_var, truth,
                                    symbol_variance(map));
    });
    auto state_blind = rx_stage.run([&] {
        return oracle_channel_state(channel, proto, config, noise_var, {},
                                    symbol_variance(map));
    });

    const int guard = demod_guard_slots(proto, config, static_cast<int>(channel.taps.size()));
    const int lo = guard;
    const int hi = nslots - guard;
    if (hi <= lo) throw ConfigError("experiment: payload too short for the demod guard");

    TrialResult res;
    res.bits.assign(spec.forms.size(), 0);
    res.errors.assign(spec.forms.size(), 0);
    for (std::size_t fi = 0; fi < spec.forms.size(); ++fi) {
        const auto& form_state = spec.forms[fi] == TapForm::PerBand ? state_blind : state;
        auto taps = rx_stage.run([&] {
            return compute_taps(form_state, proto, config, map, spec.forms[fi]);
        });
        auto symbols = rx_stage.run([&] { return demod_streams(sub, taps, map, config); });
        auto det = detect(symbols, map);
        for (int m = 0; m < map.num_streams(); ++m) {
            for (int s = lo; s < hi; ++s) {
                for (int b = 0; b < bph; ++b) {
                    std::size_t idx = static_cast<std::size_t>(s) * bph + b;
                    res.bits[fi]++;
                    if (det.bits[m][idx] != tx_bits[m][idx]) res.errors[fi]++;
                }
            }
        }
    }
    return res;
}

const BerPoint& BerTable::at(double snr_db, TapForm form) const {
    for (const auto& pt : points)
        if (pt.snr_db == snr_db && pt.form == form) return pt;
    throw DomainError("BerTable: point not found");
}

BerTable run_ber_sweep(const ExperimentSpec& spec) {
    spec.validate();
    const auto t_start = std::chrono::steady_clock::now();
    BerTable table;
    table.seed = spec.seed;
    table.target_errors = spec.target_errors;

    const int workers = std::max(1, spec.workers);
    for (std::size_t pi = 0; pi < spec.snr_db.size(); ++pi) {
        std::vector<BerPoint> pts(spec.forms.size());
        for (std::size_t fi = 0; fi < spec.forms.size(); ++fi) {
            pts[fi].snr_db = spec.snr_db[pi];
            pts[fi].form = spec.forms[fi];
        }

        int done = 0;
        while (done < spec.max_trials_per_point) {
            const int batch =
                std::min(spec.trial_batch, spec.max_trials_per_point - done);
            std::vector<TrialResult> results(batch);
            std::atomic<int> next{0};
            auto worker = [&] {
                for (;;) {
                    int j = next.fetch_add(1);
                    if (j >= batch) return;
                    results[j] = run_trial(spec, spec.snr_db[pi], static_cast<int>(pi), done + j);
                }
            };
            if (workers == 1 || batch == 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                for (int w = 0; w < std::min(workers, batch); ++w) pool.emplace_back(worker);
                for (auto& th : pool) th.join();
            }
            for (const auto& r : results) {
                for (std::size_t fi = 0; fi < spec.forms.size(); ++fi) {
                    pts[fi].bits += r.bits[fi];
                    pts[fi].errors += r.errors[fi];
                    pts[fi].trials += 1;
                }
            }
            done += batch;
            bool enough = true;
            for (const auto& pt : pts) enough = enough && pt.errors >= spec.target_errors;
            if (enough) break;
        }
        for (auto& pt : pts) table.points.push_back(pt);
    }
    table.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return table;
}

BinomialCi wilson_ci(long long errors, long long bits) {
    BinomialCi ci;
    if (bits <= 0) return ci;
    const double z = 1.959963984540054; // 95%
    double n = static_cast<double>(bits);
    double p = static_cast<double>(errors) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ci.lo = std::max(0.0, center - half);
    ci.hi = std::min(1.0, center + half);
    return ci;
}

std::string emit_outputs(const BerTable& table, const ExperimentSpec& spec,
                         const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    const std::string csv_path = (fs::path(out_dir) / "ber.csv").string();
    {
        std::ofstream out(csv_path);
        if (!out) throw IoError("cannot write " + csv_path);
        out << "snr_db,form,ber,bits,errors,seed,censored\n";
        for (const auto& pt : table.points) {
            out << format_double(pt.snr_db) << "," << tap_form_name(pt.form) << ","
                << format_double(pt.ber()) << "," << pt.bits << "," << pt.errors << ","
                << table.seed << "," << (pt.censored(table.target_errors) ? 1 : 0) << "\n";
        }
        if (!out) throw IoError("write failed: " + csv_path);
    }

    nlohmann::json manifest;
    manifest["tool"] = "fbmcss";
    manifest["version"] = "0.1.0";
    manifest["seed"] = table.seed;
    manifest["target_errors"] = table.target_errors;
    manifest["wall_time_s"] = table.wall_time_s;
    manifest["spec"] = {
        {"system", format_system_spec(spec.system)},
        {"channel", spec.identity_channel
                        ? "identity"
                        : (spec.channel_taps_file
                               ? *spec.channel_taps_file
                               : (spec.channel_kind == ChannelProfileKind::Los ? "los" : "nlos"))},
        {"interferer_count", spec.interferers.count},
        {"interferer_bandwidth_hz", spec.interferers.bandwidth_hz},
        {"interferer_db_low", spec.interferers.psd_above_noise_db_low},
        {"interferer_db_high", spec.interferers.psd_above_noise_db_high},
        {"snr_db", spec.snr_db},
        {"payload_slots_per_trial", spec.payload_slots_per_trial},
        {"max_trials_per_point", spec.max_trials_per_point},
        {"trial_batch", spec.trial_batch},
        {"workers", spec.workers},
    };
    std::vector<std::string> form_names;
    for (auto f : spec.forms) form_names.emplace_back(tap_form_name(f));
    manifest["spec"]["forms"] = form_names;

    const std::string man_path = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream man(man_path);
    if (!man) throw IoError("cannot write " + man_path);
    man << manifest.dump(2) << "\n";
    return csv_path;
}

BerTable parse_ber_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    BerTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty ber csv: " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[7];
        for (int i = 0; i < 7; ++i)
            if (!std::getline(ss, f[i], ',')) throw IoError("bad ber row: " + line);
        BerPoint pt;
        pt.snr_db = std::stod(f[0]);
        if (f[1] == "joint") pt.form = TapForm::Raw;
        else if (f[1] == "perband") pt.form = TapForm::PerBand;
        else if (f[1] == "whitened") pt.form = TapForm::Whitened;
        else throw IoError("unknown form in ber csv: " + f[1]);
        pt.bits = std::stoll(f[3]);
        pt.errors = std::stoll(f[4]);
        table.seed = std::stoull(f[5]);
        table.points.push_back(pt);
    }
    return table;
}

PsdReport run_psd_report(const PsdReportSpec& spec) {
    PsdReport rep;
    SpectralMask mask = spec.mask_file ? load_mask_csv(*spec.mask_file) : builtin_mask(spec.region);

    StageGuard cfg_stage{"core-model"};
    auto base_config = cfg_stage.run([&] { return spec.system.make_config(); });

    StageGuard plan_stage{"mask-plan"};
    if (spec.plan_first) {
        rep.plan = plan_stage.run([&] {
            return plan_active_set(mask, base_config, spec.carrier_hz, spec.margin_db);
        });
    } else {
        rep.plan.active_subcarriers = base_config.active_subcarriers;
        double lim = 1e300;
        for (int k : rep.plan.active_subcarriers) {
            double fc = subcarrier_center_hz(base_config, k, spec.carrier_hz);
            lim = std::min(lim, mask_limit(mask, fc));
        }
        rep.plan.tx_psd_dbm_per_mhz = lim - spec.margin_db;
    }

    auto config = cfg_stage.run([&] {
        return SmtConfig::create(base_config.total_bandwidth_hz, base_config.num_subcarriers,
                                 base_config.fc_block_len, base_config.fc_overlap_len,
                                 rep.plan.active_subcarriers);
    });
    // independent QPSK per subcarrier: spreading would correlate the lattice
    // and turn the waveform into an impulse comb, hiding the true shape
    auto map = partition_streams(config, config.num_active(), SpreadMode::RepetitionQpsk);

    StageGuard tx_stage{"smt-tx"};
    auto proto = tx_stage.run([&] {
        return design_prototype(config, spec.system.prototype_overlap, spec.system.roll_off);
    });

    if (spec.payload_slots <= 0) {
        rep.degenerate = true;
        rep.summary = "degenerate input: empty payload, nothing to measure";
        return rep;
    }

    RngStream rng(spec.seed);
    std::vector<std::vector<std::uint8_t>> bits(map.num_streams());
    for (auto& v : bits) {
        v.resize(static_cast<std::size_t>(spec.payload_slots));
        for (auto& b : v) b = rng.next_u64() & 1;
    }
    auto frame = tx_stage.run([&] { return modulate_bits(bits, map, config); });
    auto samples = tx_stage.run([&] { return synthesize(frame, proto, config); });
    if (mean_power(samples) <= 0.0) {
        rep.degenerate = true;
        rep.summary = "degenerate input: silent payload, nothing to measure";
        return rep;
    }

    rep.baseband_psd = tx_stage.run([&] {
        return measure_psd(samples, config.total_bandwidth_hz, spec.resolution_bw_hz);
    });

    double cal = calibration_for_level(rep.baseband_psd, rep.plan.tx_psd_dbm_per_mhz);
    rep.calibrated = calibrate_psd(rep.baseband_psd, spec.carrier_hz, cal);
    rep.compliance = plan_stage.run([&] {
        return check_compliance(rep.calibrated, mask, spec.margin_db);
    });

    // ripple over the active in-band region, 2B guard from any band edge
    const double B = config.subcarrier_spacing_hz;
    std::vector<double> centers;
    for (int k : config.active_subcarriers)
        centers.push_back(subcarrier_center_hz(config, k, 0.0));
    std::sort(centers.begin(), centers.end());
    double pmax = -1e300, pmin = 1e300;
    for (std::size_t i = 0; i < rep.baseband_psd.freq_hz.size(); ++i) {
        double f = rep.baseband_psd.freq_hz[i];
        bool interior = false;
        for (double c : centers) {
            if (std::abs(f - c) > 0.5 * B) continue;
            // require the +-2B neighborhood to stay inside the active run
            bool left = std::binary_search(centers.begin(), centers.end(), c - B) &&
                        std::binary_search(centers.begin(), centers.end(), c - 2 * B);
            bool right = std::binary_search(centers.begin(), centers.end(), c + B) &&
                         std::binary_search(centers.begin(), centers.end(), c + 2 * B);
            interior = left && right;
            break;
        }
        if (!interior) continue;
        double db = 10.0 * std::log10(rep.baseband_psd.density[i] + 1e-300);
        pmax = std::max(pmax, db);
        pmin = std::min(pmin, db);
    }
    rep.in_band_ripple_db = pmax > pmin ? pmax - pmin : 0.0;

    std::ostringstream os;
    os << rep.compliance.summary(mask, spec.margin_db) << "\n";
    os << "active subcarriers: " << config.num_active() << "/" << config.num_subcarriers
       << ", tx level " << rep.plan.tx_psd_dbm_per_mhz << " dBm/MHz, in-band ripple "
       << rep.in_band_ripple_db << " dB\n";
    rep.summary = os.str();
    return rep;
}

std::string emit_psd_outputs(const PsdReport& rep, const PsdReportSpec& spec,
                             const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    const std::string sum_path = (fs::path(out_dir) / "psd_report.txt").string();
    std::ofstream sum(sum_path);
    if (!sum) throw IoError("cannot write " + sum_path);
    sum << (rep.degenerate ? "DEGENERATE\n" : "") << rep.summary;

    if (!rep.degenerate) {
        write_psd_csv((fs::path(out_dir) / "psd.csv").string(), rep.calibrated);
        std::ofstream cc((fs::path(out_dir) / "compliance.csv").string());
        cc << "region,pass,worst_freq_hz,worst_excess_db,min_margin_db,bins\n";
        cc << region_name(spec.region) << "," << (rep.compliance.pass ? 1 : 0) << ","
           << format_double(rep.compliance.worst_freq_hz) << ","
           << format_double(rep.compliance.worst_excess_db) << ","
           << format_double(rep.compliance.min_margin_db) << "," << rep.compliance.bins_checked
           << "\n";
        std::ofstream plan((fs::path(out_dir) / "plan.csv").string());
        plan << "subcarrier,center_hz\n";
        SmtConfig cfg = spec.system.make_config();
        for (int k : rep.plan.active_subcarriers)
            plan << k << "," << format_double(subcarrier_center_hz(cfg, k, spec.carrier_hz))
                 << "\n";
    }
    return sum_path;
}

} // namespace fbmcss
