#include "fbmcss/io.hpp"

#include "fbmcss/errors.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace fbmcss {

namespace {

void put_f32_le(std::ofstream& out, float v) {
    static_assert(sizeof(float) == 4);
    unsigned char b[4];
    std::memcpy(b, &v, 4);
    if constexpr (std::endian::native == std::endian::big) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
    out.write(reinterpret_cast<const char*>(b), 4);
}

float get_f32_le(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if constexpr (std::endian::native == std::endian::big) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
    float v;
    std::memcpy(&v, b, 4);
    return v;
}

} // namespace

void write_cf32(const std::string& path, std::span<const cplx> samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& s : samples) {
        put_f32_le(out, static_cast<float>(s.real()));
        put_f32_le(out, static_cast<float>(s.imag()));
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<cplx> read_cf32(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot read " + path);
    auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % 8 != 0) throw IoError("cf32 file has partial sample: " + path);
    in.seekg(0);
    std::vector<cplx> out(bytes / 8);
    for (auto& s : out) {
        float re = get_f32_le(in);
        float im = get_f32_le(in);
        s = {re, im};
    }
    if (!in) throw IoError("read failed: " + path);
    return out;
}

void write_bits_bin(const std::string& path, std::span<const std::uint8_t> bits) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bits.data()),
              static_cast<std::streamsize>(bits.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::uint8_t> read_bits_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot read " + path);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
    if (!in) throw IoError("read failed: " + path);
    return bits;
}

void write_bits_csv(const std::string& path, std::span<const std::uint8_t> bits) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "bit\n";
    for (auto b : bits) out << static_cast<int>(b) << "\n";
}

void write_soft_csv(const std::string& path, std::span<const double> soft) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "soft\n";
    for (double v : soft) out << format_double(v) << "\n";
}

void write_psd_csv(const std::string& path, const CalibratedPsd& psd) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "frequency_hz,dbm_per_mhz\n";
    for (std::size_t i = 0; i < psd.freq_hz.size(); ++i)
        out << format_double(psd.freq_hz[i]) << "," << format_double(psd.dbm_per_mhz[i]) << "\n";
}

void write_taps_csv(const std::string& path, const EqualizerTapSet& taps) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "band,tone,real,imag,form\n";
    for (std::size_t bi = 0; bi < taps.bands.size(); ++bi)
        for (int n = 0; n < taps.subband_size; ++n) {
            cplx w = taps.w(static_cast<int>(bi), n);
            out << taps.bands[bi] << "," << n << "," << format_double(w.real()) << ","
                << format_double(w.imag()) << "," << tap_form_name(taps.form) << "\n";
        }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace fbmcss
