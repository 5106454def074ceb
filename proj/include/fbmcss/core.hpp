#ifndef FBMCSS_CORE_HPP
#define FBMCSS_CORE_HPP

#include <string>
#include <vector>

namespace fbmcss {

// Global SMT numerology. B is always constructed as W/M; T as 1/B.
// The fast-convolution grid requires N a power of two, M | N, and both the
// block overlap and the block hop to be multiples of M so that subband
// streams from consecutive blocks tile the half-symbol lattice exactly.
struct SmtConfig {
    double total_bandwidth_hz = 0.0;  // W
    int num_subcarriers = 0;          // M
    double subcarrier_spacing_hz = 0.0; // B = W/M
    double qam_symbol_period_s = 0.0;   // T = 1/B
    int samples_per_symbol = 0;         // complex samples per T (= M, critical rate)
    int fc_block_len = 0;               // N
    int fc_overlap_len = 0;             // N_o
    std::vector<int> active_subcarriers; // sorted, unique, subset of [0, M)

    // N = 0 / overlap = 0 select the defaults 16*M and N/2.
    // Empty active set means all M subcarriers.
    static SmtConfig create(double total_bandwidth_hz, int num_subcarriers,
                            int fc_block_len = 0, int fc_overlap_len = 0,
                            std::vector<int> active = {});

    int half_symbol_hop() const { return num_subcarriers / 2; }      // D = M/2 samples
    int subband_size() const { return 2 * fc_block_len / num_subcarriers; } // L_sub
    int block_hop() const { return fc_block_len - fc_overlap_len; }  // R
    int num_active() const { return static_cast<int>(active_subcarriers.size()); }
    bool is_active(int k) const;
};

enum class SpreadMode {
    RepetitionQpsk,    // one QPSK symbol replicated across S_m
    HadamardMulticode, // log2(L) bits select a Walsh row across S_m
};

// Partition of the active subcarriers into data streams. All streams carry
// the same spread factor L = |S_m|.
struct StreamMap {
    std::vector<std::vector<int>> streams; // S_m, each sorted
    int spread_factor = 0;                 // L
    SpreadMode mode = SpreadMode::RepetitionQpsk;

    int num_streams() const { return static_cast<int>(streams.size()); }
    // real-valued bits carried per half-symbol slot per stream
    int bits_per_half_symbol() const;
    // validates disjointness, coverage, uniform L, Hadamard power-of-two
    static StreamMap create(std::vector<std::vector<int>> streams, SpreadMode mode,
                            const SmtConfig& config);
};

// G = 10 log10 L
double processing_gain_db(int spread_factor);

// uncoded information rate in bits/s
double raw_bit_rate_bps(const SmtConfig& config, const StreamMap& map);

// Frequency-interleaved partition: stream m owns active subcarriers at
// positions congruent to m modulo num_streams, so every stream spans the
// whole band. contiguous=true slices the active set into runs instead
// (ablation option).
StreamMap partition_streams(const SmtConfig& config, int num_streams, SpreadMode mode,
                            bool interleaved = true);

// ---- config files & presets ------------------------------------------------

// Complete system description as written in .cfg files.
struct SystemSpec {
    std::string name;
    double total_bandwidth_hz = 0.0;
    int num_subcarriers = 0;
    int fc_block_len = 0;    // 0 = default
    int fc_overlap_len = 0;  // 0 = default
    std::string active = "all"; // "all" or ranges like "0-127,256-383"
    int num_streams = 1;
    SpreadMode mode = SpreadMode::RepetitionQpsk;
    bool interleaved = true;
    int prototype_overlap = 4;
    double roll_off = 1.0;

    SmtConfig make_config() const;
    StreamMap make_stream_map(const SmtConfig& config) const;
};

// key = value format, '#' comments
SystemSpec parse_system_spec(const std::string& text, const std::string& name = "");
SystemSpec load_system_spec(const std::string& path);
std::string format_system_spec(const SystemSpec& spec);

// Shipped presets: "desk-los", "desk-nlos", "table1-los", "table1-nlos".
SystemSpec preset_system_spec(const std::string& name);
std::vector<std::string> preset_names();

std::vector<int> parse_subcarrier_set(const std::string& text, int num_subcarriers);

} // namespace fbmcss

#endif
