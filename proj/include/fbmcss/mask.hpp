#ifndef FBMCSS_MASK_HPP
#define FBMCSS_MASK_HPP

#include "fbmcss/core.hpp"
#include "fbmcss/psd.hpp"

#include <string>
#include <vector>

namespace fbmcss {

enum class Region { FccUsa, EccEurope, Japan };

const char* region_name(Region r);
Region parse_region(const std::string& name);

struct MaskSegment {
    double f_low_hz = 0.0;
    double f_high_hz = 0.0; // half-open [low, high)
    double limit_dbm_per_mhz = 0.0;
};

// Regulatory transmit-PSD ceiling vs frequency. Segments are sorted,
// non-overlapping, and contiguous over the coverage range.
struct SpectralMask {
    Region region = Region::FccUsa;
    std::string annotation;
    std::vector<MaskSegment> segments;

    void validate() const;
    double coverage_low_hz() const { return segments.front().f_low_hz; }
    double coverage_high_hz() const { return segments.back().f_high_hz; }
};

// Transcribed region tables (UWB masks for USA/FCC, Europe/ECC, Japan).
// Breakpoints carry a +-0.1 GHz, levels a +-1 dB transcription tolerance;
// the FCC in-band level is -41.3 dBm/MHz.
SpectralMask builtin_mask(Region region);

// CSV rows: f_low_mhz,f_high_mhz,limit_dbm_per_mhz,region
SpectralMask load_mask_csv(const std::string& path);
void save_mask_csv(const std::string& path, const SpectralMask& mask);

// piecewise-constant lookup; boundary frequencies belong to the
// higher-frequency segment; CoverageError outside the table
double mask_limit(const SpectralMask& mask, double freq_hz);

// Baseband PSD estimate translated to absolute dBm/MHz at an RF carrier.
// calibration_db maps digital power/Hz to dBm/MHz:
// value = 10 log10(density * 1e6) + calibration_db.
struct CalibratedPsd {
    std::vector<double> freq_hz; // RF
    std::vector<double> dbm_per_mhz;
    double resolution_bw_hz = 0.0;
};

CalibratedPsd calibrate_psd(const PsdEstimate& psd, double carrier_hz, double calibration_db);

// calibration that places the largest in-band density at level_dbm_per_mhz
double calibration_for_level(const PsdEstimate& psd, double level_dbm_per_mhz);

struct ComplianceReport {
    bool pass = false;
    double worst_excess_db = 0.0; // PSD - (limit - margin), worst bin
    double worst_freq_hz = 0.0;
    double min_margin_db = 0.0; // limit - PSD, worst bin
    int bins_checked = 0;

    std::string summary(const SpectralMask& mask, double margin_db) const;
};

// pass iff PSD <= limit - margin at every measured bin. Requires
// resolution <= 1 MHz (MeasurementError otherwise); bins outside mask
// coverage raise CoverageError.
ComplianceReport check_compliance(const CalibratedPsd& psd, const SpectralMask& mask,
                                  double margin_db);

struct ActivePlan {
    std::vector<int> active_subcarriers;
    double tx_psd_dbm_per_mhz = 0.0;
};

// Deactivates every subcarrier whose +-B footprint overlaps a segment with a
// limit below the chosen level; the level is the highest candidate keeping
// at least min_active_fraction of the subcarriers. Transmit level is the
// minimum limit over the surviving active region minus margin.
ActivePlan plan_active_set(const SpectralMask& mask, const SmtConfig& config, double carrier_hz,
                           double margin_db, double min_active_fraction = 0.05);

// RF center of subcarrier k (FFT index order folded to [-W/2, W/2))
double subcarrier_center_hz(const SmtConfig& config, int k, double carrier_hz);

} // namespace fbmcss

#endif
