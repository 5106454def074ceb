#ifndef FBMCSS_HARNESS_HPP
#define FBMCSS_HARNESS_HPP

#include "fbmcss/channel.hpp"
#include "fbmcss/core.hpp"
#include "fbmcss/mask.hpp"
#include "fbmcss/receiver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fbmcss {

// Full description of one Monte-Carlo BER experiment. Deterministic given
// `seed`: trials draw all randomness from per-(point, trial, stage) derived
// streams and are aggregated in fixed-size batches, so results do not depend
// on the worker count.
//
// Impairment order is fixed: multipath channel, then interferers, then
// AWGN. The SNR is referenced to the post-channel signal power, and the
// interferer dB levels to the AWGN floor, so interference is not counted
// as noise in the reported SNR. Every form demodulates the identical
// received stream (paired comparison).
struct ExperimentSpec {
    SystemSpec system;
    ChannelProfileKind channel_kind = ChannelProfileKind::Nlos;
    bool identity_channel = false;
    std::optional<std::string> channel_taps_file;
    InterfererSpec interferers;     // count = 0 disables
    std::vector<double> snr_db;     // sweep points (+inf allowed)
    std::vector<TapForm> forms = {TapForm::Raw, TapForm::PerBand};
    int payload_slots_per_trial = 512; // half-symbol slots per trial
    long long target_errors = 100;     // per point per form
    int max_trials_per_point = 256;
    int trial_batch = 16;              // aggregation granularity (fixed)
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const;
};

struct BerPoint {
    double snr_db = 0.0;
    TapForm form = TapForm::Raw;
    long long bits = 0;
    long long errors = 0;
    int trials = 0;
    double ber() const { return bits ? static_cast<double>(errors) / bits : 0.0; }
    bool censored(long long target) const { return errors < target; }
};

struct BerTable {
    std::vector<BerPoint> points; // ordered by (snr index, form index)
    std::uint64_t seed = 0;
    long long target_errors = 100;
    double wall_time_s = 0.0;

    const BerPoint& at(double snr_db, TapForm form) const;
};

BerTable run_ber_sweep(const ExperimentSpec& spec);

// Demodulate one trial's worth of impaired samples with every requested
// form on the identical received stream; returns per-form (bits, errors).
// Exposed for tests of the paired-trial contract.
struct TrialResult {
    std::vector<long long> bits;
    std::vector<long long> errors;
};
TrialResult run_trial(const ExperimentSpec& spec, double snr_db, int point_idx, int trial_idx);

// ber.csv (snr_db,form,ber,bits,errors,seed,censored) + manifest.json
// (spec echo, version, seed, wall time). Returns the CSV path.
std::string emit_outputs(const BerTable& table, const ExperimentSpec& spec,
                         const std::string& out_dir);

BerTable parse_ber_csv(const std::string& path);

// Wilson 95% score interval for an error count
struct BinomialCi {
    double lo = 0.0, hi = 0.0;
};
BinomialCi wilson_ci(long long errors, long long bits);

// ---- PSD / compliance reporting ---------------------------------------------

struct PsdReportSpec {
    SystemSpec system;
    Region region = Region::FccUsa;
    std::optional<std::string> mask_file;
    double carrier_hz = 6.85e9;
    double margin_db = 1.0;
    double resolution_bw_hz = 1e6;
    int payload_slots = 8192;
    std::uint64_t seed = 1;
    bool plan_first = true; // run the activation planner before synthesis
};

struct PsdReport {
    bool degenerate = false; // empty/silent payload
    ActivePlan plan;
    PsdEstimate baseband_psd;
    CalibratedPsd calibrated;
    ComplianceReport compliance;
    double in_band_ripple_db = 0.0;
    std::string summary;
};

PsdReport run_psd_report(const PsdReportSpec& spec);

// psd.csv + compliance.csv + human-readable summary; returns summary path
std::string emit_psd_outputs(const PsdReport& report, const PsdReportSpec& spec,
                             const std::string& out_dir);

} // namespace fbmcss

#endif
