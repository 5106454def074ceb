// fbmcss command-line runner: Monte-Carlo BER sweeps, PSD/compliance
// reports, and spectral-mask activation planning.

#include "fbmcss/errors.hpp"
#include "fbmcss/harness.hpp"
#include "fbmcss/io.hpp"
#include "fbmcss/prototype.hpp"
#include "fbmcss/rng.hpp"
#include "fbmcss/transmit.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

fbmcss::SystemSpec resolve_system(const std::string& preset, const std::string& config_path) {
    if (!config_path.empty()) return fbmcss::load_system_spec(config_path);
    return fbmcss::preset_system_spec(preset);
}

std::vector<fbmcss::TapForm> parse_forms(const std::string& forms) {
    std::vector<fbmcss::TapForm> out;
    std::stringstream ss(forms);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "joint" || item == "raw") out.push_back(fbmcss::TapForm::Raw);
        else if (item == "perband") out.push_back(fbmcss::TapForm::PerBand);
        else if (item == "whitened") out.push_back(fbmcss::TapForm::Whitened);
        else throw fbmcss::ConfigError("unknown equalizer form: " + item);
    }
    if (out.empty()) throw fbmcss::ConfigError("no equalizer forms given");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FBMC-SS ultra-wideband physical-layer simulator"};
    app.require_subcommand(1);

    // ---- ber ----
    auto* ber = app.add_subcommand("ber", "Monte-Carlo BER sweep (joint vs per-band equalizer)");
    std::string preset = "desk-nlos", config_path, out_dir = "out", forms = "joint,perband";
    std::string channel = "nlos", channel_file, snr_list = "-16,-14,-12,-10";
    std::uint64_t seed = 1;
    int trials = 256, workers = 1, payload_slots = 512, interferer_count = 0;
    long long target_errors = 100;
    double int_power_lo = 30.0, int_power_hi = 30.0, int_bw_hz = 20e6;
    std::string dump_taps, dump_bits;

    ber->add_option("--preset", preset, "system preset name")->capture_default_str();
    ber->add_option("--config", config_path, "system config file (overrides preset)");
    ber->add_option("--snr", snr_list, "comma-separated SNR points in dB")->capture_default_str();
    ber->add_option("--seed", seed, "master seed")->capture_default_str();
    ber->add_option("--trials", trials, "trial cap per point")->capture_default_str();
    ber->add_option("--target-errors", target_errors, "stop after this many bit errors")
        ->capture_default_str();
    ber->add_option("--payload-slots", payload_slots, "half-symbol slots per trial")
        ->capture_default_str();
    ber->add_option("--workers", workers, "worker threads")->capture_default_str();
    ber->add_option("--channel", channel, "los | nlos | identity")->capture_default_str();
    ber->add_option("--channel-file", channel_file, "CSV tap file replacing the drawn channel");
    ber->add_option("--interferers", interferer_count, "number of narrowband interferers")
        ->capture_default_str();
    ber->add_option("--int-power-lo", int_power_lo, "interferer PSD above noise, low (dB)")
        ->capture_default_str();
    ber->add_option("--int-power-hi", int_power_hi, "interferer PSD above noise, high (dB)")
        ->capture_default_str();
    ber->add_option("--int-bw-hz", int_bw_hz, "interferer bandwidth (Hz)")->capture_default_str();
    ber->add_option("--forms", forms, "equalizers to compare: joint,perband,whitened")
        ->capture_default_str();
    ber->add_option("--out", out_dir, "output directory")->capture_default_str();
    ber->add_option("--dump-taps", dump_taps, "write first trial's joint taps to this CSV");
    ber->add_option("--dump-bits", dump_bits, "write first trial's detected bits (bin+csv stem)");

    // ---- psd ----
    auto* psd = app.add_subcommand("psd", "transmit PSD measurement + mask compliance report");
    std::string psd_preset = "desk-los", psd_config, psd_region = "fcc_usa", psd_mask_file;
    std::string psd_out = "out", dump_samples;
    double carrier_hz = 6.85e9, margin_db = 1.0, rbw_hz = 1e6;
    int psd_slots = 8192;
    std::uint64_t psd_seed = 1;
    bool no_plan = false;
    psd->add_option("--preset", psd_preset, "system preset name")->capture_default_str();
    psd->add_option("--config", psd_config, "system config file (overrides preset)");
    psd->add_option("--region", psd_region, "fcc_usa | ecc_europe | japan")->capture_default_str();
    psd->add_option("--mask-file", psd_mask_file, "mask CSV replacing the built-in table");
    psd->add_option("--carrier-hz", carrier_hz, "RF carrier frequency")->capture_default_str();
    psd->add_option("--margin-db", margin_db, "compliance margin")->capture_default_str();
    psd->add_option("--rbw-hz", rbw_hz, "PSD resolution bandwidth")->capture_default_str();
    psd->add_option("--slots", psd_slots, "payload half-symbol slots")->capture_default_str();
    psd->add_option("--seed", psd_seed, "payload seed")->capture_default_str();
    psd->add_flag("--no-plan", no_plan, "skip the activation planner (use configured active set)");
    psd->add_option("--out", psd_out, "output directory")->capture_default_str();
    psd->add_option("--dump-samples", dump_samples, "write baseband samples as cf32");

    // ---- plan ----
    auto* plan = app.add_subcommand("plan", "subcarrier activation plan for a spectral mask");
    std::string plan_preset = "desk-los", plan_config, plan_region = "fcc_usa", plan_mask_file;
    std::string plan_out;
    double plan_carrier_hz = 6.85e9, plan_margin_db = 1.0;
    plan->add_option("--preset", plan_preset, "system preset name")->capture_default_str();
    plan->add_option("--config", plan_config, "system config file (overrides preset)");
    plan->add_option("--region", plan_region, "fcc_usa | ecc_europe | japan")
        ->capture_default_str();
    plan->add_option("--mask-file", plan_mask_file, "mask CSV replacing the built-in table");
    plan->add_option("--carrier-hz", plan_carrier_hz, "RF carrier frequency")
        ->capture_default_str();
    plan->add_option("--margin-db", plan_margin_db, "planning margin")->capture_default_str();
    plan->add_option("--out", plan_out, "optional CSV path for the active set");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ber) {
            fbmcss::ExperimentSpec spec;
            spec.system = resolve_system(preset, config_path);
            spec.seed = seed;
            spec.workers = workers;
            spec.max_trials_per_point = trials;
            spec.target_errors = target_errors;
            spec.payload_slots_per_trial = payload_slots;
            spec.forms = parse_forms(forms);
            if (channel == "identity") spec.identity_channel = true;
            else if (channel == "los") spec.channel_kind = fbmcss::ChannelProfileKind::Los;
            else if (channel == "nlos") spec.channel_kind = fbmcss::ChannelProfileKind::Nlos;
            else throw fbmcss::ConfigError("unknown channel: " + channel);
            if (!channel_file.empty()) spec.channel_taps_file = channel_file;
            spec.interferers.count = interferer_count;
            spec.interferers.bandwidth_hz = int_bw_hz;
            spec.interferers.psd_above_noise_db_low = int_power_lo;
            spec.interferers.psd_above_noise_db_high = int_power_hi;
            std::stringstream ss(snr_list);
            std::string item;
            while (std::getline(ss, item, ',')) spec.snr_db.push_back(std::stod(item));

            auto table = fbmcss::run_ber_sweep(spec);
            auto csv = fbmcss::emit_outputs(table, spec, out_dir);
            for (const auto& pt : table.points) {
                std::printf("snr %+7.2f dB  %-8s ber %.3e  (%lld/%lld bits%s)\n", pt.snr_db,
                            fbmcss::tap_form_name(pt.form), pt.ber(), pt.errors, pt.bits,
                            pt.censored(table.target_errors) ? ", censored" : "");
            }
            std::printf("wrote %s\n", csv.c_str());

            if (!dump_taps.empty() || !dump_bits.empty()) {
                // reproduce the first trial of the first point for inspection
                auto config = spec.system.make_config();
                auto map = spec.system.make_stream_map(config);
                auto proto = fbmcss::design_prototype(config, spec.system.prototype_overlap,
                                                      spec.system.roll_off);
                fbmcss::RngStream rng(spec.seed);
                auto payload = rng.derive({1, 0, 0});
                std::vector<std::vector<std::uint8_t>> bits(map.num_streams());
                for (auto& v : bits) {
                    v.resize(static_cast<std::size_t>(payload_slots) * map.bits_per_half_symbol());
                    for (auto& b : v) b = payload.next_u64() & 1;
                }
                auto frame = fbmcss::modulate_bits(bits, map, config);
                auto tx = fbmcss::synthesize(frame, proto, config);
                fbmcss::ChannelRealization ident;
                ident.taps = {fbmcss::cplx{1.0, 0.0}};
                auto sub = fbmcss::overlap_save_analyze(tx, config);
                auto state = fbmcss::oracle_channel_state(ident, proto, config, 0.0, {},
                                                          fbmcss::symbol_variance(map));
                auto taps = fbmcss::compute_taps(state, proto, config, map,
                                                 fbmcss::TapForm::Raw);
                if (!dump_taps.empty()) fbmcss::write_taps_csv(dump_taps, taps);
                if (!dump_bits.empty()) {
                    auto symbols = fbmcss::demod_streams(sub, taps, map, config);
                    auto det = fbmcss::detect(symbols, map);
                    fbmcss::write_bits_bin(dump_bits + ".bin", det.bits[0]);
                    fbmcss::write_bits_csv(dump_bits + ".csv", det.bits[0]);
                    fbmcss::write_soft_csv(dump_bits + ".soft.csv", det.soft[0]);
                }
            }
        } else if (*psd) {
            fbmcss::PsdReportSpec spec;
            spec.system = resolve_system(psd_preset, psd_config);
            spec.region = fbmcss::parse_region(psd_region);
            if (!psd_mask_file.empty()) spec.mask_file = psd_mask_file;
            spec.carrier_hz = carrier_hz;
            spec.margin_db = margin_db;
            spec.resolution_bw_hz = rbw_hz;
            spec.payload_slots = psd_slots;
            spec.seed = psd_seed;
            spec.plan_first = !no_plan;
            auto rep = fbmcss::run_psd_report(spec);
            auto path = fbmcss::emit_psd_outputs(rep, spec, psd_out);
            std::printf("%s", rep.summary.c_str());
            std::printf("wrote %s\n", path.c_str());
            if (!dump_samples.empty() && !rep.degenerate) {
                auto config = spec.system.make_config();
                auto cfg = fbmcss::SmtConfig::create(
                    config.total_bandwidth_hz, config.num_subcarriers, config.fc_block_len,
                    config.fc_overlap_len, rep.plan.active_subcarriers);
                auto map = fbmcss::partition_streams(cfg, cfg.num_active(),
                                                     fbmcss::SpreadMode::RepetitionQpsk);
                auto proto = fbmcss::design_prototype(cfg, spec.system.prototype_overlap,
                                                      spec.system.roll_off);
                fbmcss::RngStream rng(spec.seed);
                std::vector<std::vector<std::uint8_t>> bits(map.num_streams());
                for (auto& v : bits) {
                    v.resize(static_cast<std::size_t>(psd_slots));
                    for (auto& b : v) b = rng.next_u64() & 1;
                }
                auto frame = fbmcss::modulate_bits(bits, map, cfg);
                auto tx = fbmcss::synthesize(frame, proto, cfg);
                fbmcss::write_cf32(dump_samples, tx);
            }
            if (!rep.degenerate && !rep.compliance.pass) return 2;
        } else if (*plan) {
            auto system = resolve_system(plan_preset, plan_config);
            auto config = system.make_config();
            auto mask = plan_mask_file.empty() ? fbmcss::builtin_mask(fbmcss::parse_region(plan_region))
                                               : fbmcss::load_mask_csv(plan_mask_file);
            auto result = fbmcss::plan_active_set(mask, config, plan_carrier_hz, plan_margin_db);
            std::printf("region %s, carrier %.4f GHz: %zu/%d subcarriers active, tx level %.2f "
                        "dBm/MHz\n",
                        fbmcss::region_name(mask.region), plan_carrier_hz / 1e9,
                        result.active_subcarriers.size(), config.num_subcarriers,
                        result.tx_psd_dbm_per_mhz);
            if (!plan_out.empty()) {
                std::ofstream out(plan_out);
                out << "subcarrier,center_hz\n";
                for (int k : result.active_subcarriers)
                    out << k << ","
                        << fbmcss::format_double(
                               fbmcss::subcarrier_center_hz(config, k, plan_carrier_hz))
                        << "\n";
                std::printf("wrote %s\n", plan_out.c_str());
            }
        }
    } catch (const fbmcss::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
