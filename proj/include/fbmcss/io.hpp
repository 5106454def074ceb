#ifndef FBMCSS_IO_HPP
#define FBMCSS_IO_HPP

#include "fbmcss/fft.hpp"
#include "fbmcss/mask.hpp"
#include "fbmcss/psd.hpp"
#include "fbmcss/receiver.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fbmcss {

// interleaved real/imag 32-bit little-endian floats
void write_cf32(const std::string& path, std::span<const cplx> samples);
std::vector<cplx> read_cf32(const std::string& path);

// packed bits, one per byte's LSB in .bin form; one 0/1 per line in .csv
void write_bits_bin(const std::string& path, std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> read_bits_bin(const std::string& path);
void write_bits_csv(const std::string& path, std::span<const std::uint8_t> bits);

// soft decision metrics, one value per line
void write_soft_csv(const std::string& path, std::span<const double> soft);

// psd: frequency_hz,dbm_per_mhz
void write_psd_csv(const std::string& path, const CalibratedPsd& psd);

// equalizer taps: band,tone,real,imag,form
void write_taps_csv(const std::string& path, const EqualizerTapSet& taps);

// deterministic shortest round-trip double formatting
std::string format_double(double v);

} // namespace fbmcss

#endif
