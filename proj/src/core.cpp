#include "fbmcss/core.hpp"

#include "fbmcss/errors.hpp"
#include "fbmcss/fft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fbmcss {

bool SmtConfig::is_active(int k) const {
    return std::binary_search(active_subcarriers.begin(), active_subcarriers.end(), k);
}

SmtConfig SmtConfig::create(double W, int M, int N, int No, std::vector<int> active) {
    if (W <= 0.0) throw ConfigError("total bandwidth must be positive");
    if (M < 2 || !is_pow2(static_cast<std::size_t>(M)))
        throw ConfigError("num_subcarriers must be a power of two >= 2");
    if (N == 0) N = 16 * M;
    if (No == 0) No = N / 2;
    if (!is_pow2(static_cast<std::size_t>(N))) throw ConfigError("fc_block_len must be a power of two");
    if (N % M != 0) throw ConfigError("fc_block_len must be a multiple of num_subcarriers");
    if (No <= 0 || No >= N) throw ConfigError("fc_overlap_len must satisfy 0 < N_o < N");
    if (No % M != 0 || (N - No) % M != 0)
        throw ConfigError("block overlap and hop must be multiples of num_subcarriers "
                          "(subband framing requirement)");

    if (active.empty()) {
        active.resize(M);
        for (int k = 0; k < M; ++k) active[k] = k;
    } else {
        std::sort(active.begin(), active.end());
        active.erase(std::unique(active.begin(), active.end()), active.end());
        if (active.front() < 0 || active.back() >= M)
            throw ConfigError("active subcarrier index outside [0, M)");
    }

    SmtConfig c;
    c.total_bandwidth_hz = W;
    c.num_subcarriers = M;
    c.subcarrier_spacing_hz = W / M;
    c.qam_symbol_period_s = 1.0 / c.subcarrier_spacing_hz;
    c.samples_per_symbol = M;
    c.fc_block_len = N;
    c.fc_overlap_len = No;
    c.active_subcarriers = std::move(active);
    return c;
}

int StreamMap::bits_per_half_symbol() const {
    if (mode == SpreadMode::RepetitionQpsk) return 1;
    int bits = 0;
    while ((1 << bits) < spread_factor) ++bits;
    return bits;
}

StreamMap StreamMap::create(std::vector<std::vector<int>> streams, SpreadMode mode,
                            const SmtConfig& config) {
    if (streams.empty()) throw ConfigError("stream map must contain at least one stream");
    std::vector<int> all;
    int L = static_cast<int>(streams.front().size());
    for (auto& s : streams) {
        if (static_cast<int>(s.size()) != L)
            throw ConfigError("all streams must have the same spread factor");
        std::sort(s.begin(), s.end());
        all.insert(all.end(), s.begin(), s.end());
    }
    if (L < 1) throw ConfigError("empty stream");
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw ConfigError("streams must be pairwise disjoint");
    if (all != config.active_subcarriers)
        throw ConfigError("union of streams must equal the active subcarrier set");
    if (mode == SpreadMode::HadamardMulticode && !is_pow2(static_cast<std::size_t>(L)))
        throw ConfigError("Hadamard multicoding requires a power-of-two spread factor");

    StreamMap m;
    m.streams = std::move(streams);
    m.spread_factor = L;
    m.mode = mode;
    return m;
}

double processing_gain_db(int spread_factor) {
    if (spread_factor < 1) throw DomainError("spread factor must be >= 1");
    return 10.0 * std::log10(static_cast<double>(spread_factor));
}

double raw_bit_rate_bps(const SmtConfig& config, const StreamMap& map) {
    int covered = 0;
    for (const auto& s : map.streams) covered += static_cast<int>(s.size());
    if (covered != config.num_active())
        throw ConfigError("stream map does not cover the active subcarrier set");
    double bits_per_T = 2.0 * map.bits_per_half_symbol() * map.num_streams();
    return bits_per_T / config.qam_symbol_period_s;
}

StreamMap partition_streams(const SmtConfig& config, int num_streams, SpreadMode mode,
                            bool interleaved) {
    int na = config.num_active();
    if (num_streams < 1 || na % num_streams != 0)
        throw ConfigError("stream count must divide the number of active subcarriers");
    int L = na / num_streams;
    std::vector<std::vector<int>> streams(num_streams);
    for (int i = 0; i < na; ++i) {
        int m = interleaved ? (i % num_streams) : (i / L);
        streams[m].push_back(config.active_subcarriers[i]);
    }
    return StreamMap::create(std::move(streams), mode, config);
}

// ---- config files -----------------------------------------------------------

std::vector<int> parse_subcarrier_set(const std::string& text, int M) {
    std::vector<int> out;
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t == "all" || t.empty()) {
        out.resize(M);
        for (int k = 0; k < M; ++k) out[k] = k;
        return out;
    }
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto dash = item.find('-', 1); // allow leading digit only; indices are non-negative
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoi(item));
            } else {
                int lo = std::stoi(item.substr(0, dash));
                int hi = std::stoi(item.substr(dash + 1));
                if (hi < lo) throw ConfigError("descending subcarrier range: " + item);
                for (int k = lo; k <= hi; ++k) out.push_back(k);
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad subcarrier set element: " + item);
        }
    }
    return out;
}

SmtConfig SystemSpec::make_config() const {
    return SmtConfig::create(total_bandwidth_hz, num_subcarriers, fc_block_len, fc_overlap_len,
                             parse_subcarrier_set(active, num_subcarriers));
}

StreamMap SystemSpec::make_stream_map(const SmtConfig& config) const {
    return partition_streams(config, num_streams, mode, interleaved);
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

SpreadMode parse_mode(const std::string& v) {
    if (v == "repetition-qpsk" || v == "repetition" || v == "qpsk")
        return SpreadMode::RepetitionQpsk;
    if (v == "hadamard" || v == "hadamard-multicode" || v == "multicode")
        return SpreadMode::HadamardMulticode;
    throw ConfigError("unknown mode: " + v);
}

const char* mode_name(SpreadMode m) {
    return m == SpreadMode::RepetitionQpsk ? "repetition-qpsk" : "hadamard";
}

} // namespace

SystemSpec parse_system_spec(const std::string& text, const std::string& name) {
    SystemSpec spec;
    spec.name = name;
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto take = [&kv](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    std::string v;
    if (!(v = take("name")).empty()) spec.name = v;
    if (!(v = take("total_bandwidth_hz")).empty()) spec.total_bandwidth_hz = std::stod(v);
    if (!(v = take("num_subcarriers")).empty()) spec.num_subcarriers = std::stoi(v);
    if (!(v = take("fc_block_len")).empty()) spec.fc_block_len = std::stoi(v);
    if (!(v = take("fc_overlap_len")).empty()) spec.fc_overlap_len = std::stoi(v);
    if (!(v = take("active_subcarriers")).empty()) spec.active = v;
    if (!(v = take("num_streams")).empty()) spec.num_streams = std::stoi(v);
    if (!(v = take("mode")).empty()) spec.mode = parse_mode(v);
    if (!(v = take("partition")).empty()) {
        if (v == "interleaved") spec.interleaved = true;
        else if (v == "contiguous") spec.interleaved = false;
        else throw ConfigError("partition must be interleaved or contiguous");
    }
    if (!(v = take("prototype_overlap")).empty()) spec.prototype_overlap = std::stoi(v);
    if (!(v = take("roll_off")).empty()) spec.roll_off = std::stod(v);
    if (!kv.empty()) throw ConfigError("unknown config key: " + kv.begin()->first);
    if (spec.total_bandwidth_hz <= 0 || spec.num_subcarriers <= 0)
        throw ConfigError("config must set total_bandwidth_hz and num_subcarriers");
    return spec;
}

SystemSpec load_system_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    return parse_system_spec(ss.str(), base);
}

std::string format_system_spec(const SystemSpec& spec) {
    std::ostringstream out;
    out << "name               = " << spec.name << "\n";
    out << "total_bandwidth_hz = " << spec.total_bandwidth_hz << "\n";
    out << "num_subcarriers    = " << spec.num_subcarriers << "\n";
    if (spec.fc_block_len) out << "fc_block_len       = " << spec.fc_block_len << "\n";
    if (spec.fc_overlap_len) out << "fc_overlap_len     = " << spec.fc_overlap_len << "\n";
    out << "active_subcarriers = " << spec.active << "\n";
    out << "num_streams        = " << spec.num_streams << "\n";
    out << "mode               = " << mode_name(spec.mode) << "\n";
    out << "partition          = " << (spec.interleaved ? "interleaved" : "contiguous") << "\n";
    out << "prototype_overlap  = " << spec.prototype_overlap << "\n";
    out << "roll_off           = " << spec.roll_off << "\n";
    return out.str();
}

SystemSpec preset_system_spec(const std::string& name) {
    SystemSpec s;
    s.name = name;
    if (name == "desk-los") {
        // desk-scale LOS analog: 160 MHz, 4 QPSK streams spread 128x
        s.total_bandwidth_hz = 160e6;
        s.num_subcarriers = 512;
        s.num_streams = 4;
        s.mode = SpreadMode::RepetitionQpsk;
    } else if (name == "desk-nlos") {
        // desk-scale NLOS analog: one multicoded stream spread 512x
        s.total_bandwidth_hz = 160e6;
        s.num_subcarriers = 512;
        s.num_streams = 1;
        s.mode = SpreadMode::HadamardMulticode;
    } else if (name == "table1-los") {
        // 5120 MHz / 311.9 kHz rounds to M = 2^14 (B = 312.5 kHz)
        s.total_bandwidth_hz = 5120e6;
        s.num_subcarriers = 16384;
        s.num_streams = 128;
        s.mode = SpreadMode::HadamardMulticode;
    } else if (name == "table1-nlos") {
        // 500 MHz / 243.6 kHz rounds to M = 2048 (B = 244.1 kHz)
        s.total_bandwidth_hz = 500e6;
        s.num_subcarriers = 2048;
        s.num_streams = 1;
        s.mode = SpreadMode::RepetitionQpsk;
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return s;
}

std::vector<std::string> preset_names() {
    return {"desk-los", "desk-nlos", "table1-los", "table1-nlos"};
}

} // namespace fbmcss
