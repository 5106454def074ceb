#include "fbmcss/mask.hpp"

#include "fbmcss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fbmcss {

const char* region_name(Region r) {
    switch (r) {
        case Region::FccUsa: return "fcc_usa";
        case Region::EccEurope: return "ecc_europe";
        case Region::Japan: return "japan";
    }
    return "?";
}

Region parse_region(const std::string& name) {
    if (name == "fcc_usa" || name == "fcc" || name == "usa") return Region::FccUsa;
    if (name == "ecc_europe" || name == "ecc" || name == "europe") return Region::EccEurope;
    if (name == "japan" || name == "jp") return Region::Japan;
    throw ConfigError("unknown region: " + name);
}

void SpectralMask::validate() const {
    if (segments.empty()) throw ConfigError("mask has no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.f_low_hz < s.f_high_hz)) throw ConfigError("mask segment with non-positive width");
        if (!std::isfinite(s.limit_dbm_per_mhz)) throw ConfigError("mask limit must be finite");
        if (i > 0 && segments[i - 1].f_high_hz != s.f_low_hz)
            throw ConfigError("mask segments must be sorted and contiguous");
    }
}

SpectralMask builtin_mask(Region region) {
    SpectralMask m;
    m.region = region;
    auto GHz = [](double g) { return g * 1e9; };
    switch (region) {
        case Region::FccUsa:
            m.annotation = "FCC indoor UWB mask; in-band 3.1-10.6 GHz at -41.3 dBm/MHz";
            m.segments = {
                {GHz(0.0), GHz(0.96), -41.3},
                {GHz(0.96), GHz(1.61), -75.3},
                {GHz(1.61), GHz(1.99), -53.3},
                {GHz(1.99), GHz(3.1), -51.3},
                {GHz(3.1), GHz(10.6), -41.3},
                {GHz(10.6), GHz(20.0), -51.3},
            };
            break;
        case Region::EccEurope:
            m.annotation =
                "ECC UWB mask; generic in-band 6.0-8.5 GHz at -41.3 dBm/MHz; breakpoints +-0.1 GHz";
            m.segments = {
                {GHz(0.0), GHz(1.6), -90.0},
                {GHz(1.6), GHz(2.7), -85.0},
                {GHz(2.7), GHz(3.4), -70.0},
                {GHz(3.4), GHz(3.8), -80.0},
                {GHz(3.8), GHz(4.2), -70.0},
                {GHz(4.2), GHz(4.8), -70.0},
                {GHz(4.8), GHz(6.0), -70.0},
                {GHz(6.0), GHz(8.5), -41.3},
                {GHz(8.5), GHz(10.6), -65.0},
                {GHz(10.6), GHz(20.0), -85.0},
            };
            break;
        case Region::Japan:
            m.annotation =
                "Japan (MIC) UWB mask; in-band 7.25-10.25 GHz at -41.3 dBm/MHz; breakpoints +-0.1 GHz";
            m.segments = {
                {GHz(0.0), GHz(1.6), -90.0},
                {GHz(1.6), GHz(2.7), -85.0},
                {GHz(2.7), GHz(3.4), -70.0},
                {GHz(3.4), GHz(4.8), -41.3},
                {GHz(4.8), GHz(7.25), -70.0},
                {GHz(7.25), GHz(10.25), -41.3},
                {GHz(10.25), GHz(10.6), -70.0},
                {GHz(10.6), GHz(20.0), -85.0},
            };
            break;
    }
    m.validate();
    return m;
}

SpectralMask load_mask_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mask file: " + path);
    SpectralMask m;
    bool have_region = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!m.annotation.empty()) m.annotation += " ";
            m.annotation += line.substr(line.find_first_not_of("# "));
            continue;
        }
        std::stringstream ss(line);
        std::string a, b, c, d;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
            !std::getline(ss, d))
            throw IoError("bad mask row: " + line);
        MaskSegment seg;
        seg.f_low_hz = std::stod(a) * 1e6;
        seg.f_high_hz = std::stod(b) * 1e6;
        seg.limit_dbm_per_mhz = std::stod(c);
        // trim region token
        d.erase(0, d.find_first_not_of(" \t"));
        d.erase(d.find_last_not_of(" \t\r") + 1);
        Region r = parse_region(d);
        if (have_region && r != m.region) throw IoError("mask file mixes regions: " + path);
        m.region = r;
        have_region = true;
        m.segments.push_back(seg);
    }
    std::sort(m.segments.begin(), m.segments.end(),
              [](const MaskSegment& x, const MaskSegment& y) { return x.f_low_hz < y.f_low_hz; });
    m.validate();
    return m;
}

void save_mask_csv(const std::string& path, const SpectralMask& mask) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mask file: " + path);
    out << "# " << mask.annotation << "\n";
    out << "# f_low_mhz,f_high_mhz,limit_dbm_per_mhz,region\n";
    out.precision(10);
    for (const auto& s : mask.segments)
        out << s.f_low_hz / 1e6 << "," << s.f_high_hz / 1e6 << "," << s.limit_dbm_per_mhz << ","
            << region_name(mask.region) << "\n";
}

double mask_limit(const SpectralMask& mask, double freq_hz) {
    if (freq_hz < mask.coverage_low_hz() || freq_hz >= mask.coverage_high_hz())
        throw CoverageError("frequency " + std::to_string(freq_hz / 1e9) +
                            " GHz outside mask coverage");
    // boundary belongs to the higher segment: find last segment with low <= f
    auto it = std::upper_bound(
        mask.segments.begin(), mask.segments.end(), freq_hz,
        [](double f, const MaskSegment& s) { return f < s.f_low_hz; });
    return std::prev(it)->limit_dbm_per_mhz;
}

CalibratedPsd calibrate_psd(const PsdEstimate& psd, double carrier_hz, double calibration_db) {
    CalibratedPsd out;
    out.resolution_bw_hz = psd.resolution_bw_hz;
    out.freq_hz.resize(psd.freq_hz.size());
    out.dbm_per_mhz.resize(psd.freq_hz.size());
    for (std::size_t i = 0; i < psd.freq_hz.size(); ++i) {
        out.freq_hz[i] = carrier_hz + psd.freq_hz[i];
        out.dbm_per_mhz[i] = 10.0 * std::log10(psd.density[i] * 1e6 + 1e-300) + calibration_db;
    }
    return out;
}

double calibration_for_level(const PsdEstimate& psd, double level_dbm_per_mhz) {
    double peak = 0.0;
    for (double d : psd.density) peak = std::max(peak, d);
    if (peak <= 0.0) throw EstimationError("calibration_for_level: silent signal");
    return level_dbm_per_mhz - 10.0 * std::log10(peak * 1e6);
}

std::string ComplianceReport::summary(const SpectralMask& mask, double margin_db) const {
    std::ostringstream os;
    os.precision(4);
    os << (pass ? "PASS" : "FAIL") << ": " << region_name(mask.region) << " mask, margin "
       << margin_db << " dB, " << bins_checked << " bins; worst bin at "
       << worst_freq_hz / 1e9 << " GHz with " << (pass ? "headroom " : "excess ")
       << std::abs(worst_excess_db) << " dB (min margin " << min_margin_db << " dB)";
    return os.str();
}

ComplianceReport check_compliance(const CalibratedPsd& psd, const SpectralMask& mask,
                                  double margin_db) {
    if (psd.resolution_bw_hz > 1e6 + 1e-9)
        throw MeasurementError("check_compliance: PSD resolution must be <= 1 MHz");
    if (psd.freq_hz.empty()) throw MeasurementError("check_compliance: empty PSD");

    ComplianceReport rep;
    rep.pass = true;
    rep.worst_excess_db = -1e300;
    rep.min_margin_db = 1e300;
    for (std::size_t i = 0; i < psd.freq_hz.size(); ++i) {
        double limit = mask_limit(mask, psd.freq_hz[i]);
        double excess = psd.dbm_per_mhz[i] - (limit - margin_db);
        double margin = limit - psd.dbm_per_mhz[i];
        ++rep.bins_checked;
        if (excess > rep.worst_excess_db) {
            rep.worst_excess_db = excess;
            rep.worst_freq_hz = psd.freq_hz[i];
        }
        rep.min_margin_db = std::min(rep.min_margin_db, margin);
        if (excess > 0.0) rep.pass = false;
    }
    return rep;
}

double subcarrier_center_hz(const SmtConfig& config, int k, double carrier_hz) {
    const int M = config.num_subcarriers;
    int folded = (k + M / 2) % M - M / 2;
    return carrier_hz + folded * config.subcarrier_spacing_hz;
}

ActivePlan plan_active_set(const SpectralMask& mask, const SmtConfig& config, double carrier_hz,
                           double margin_db, double min_active_fraction) {
    const int M = config.num_subcarriers;
    const double B = config.subcarrier_spacing_hz;
    const double W = config.total_bandwidth_hz;
    if (carrier_hz + W / 2 <= mask.coverage_low_hz() || carrier_hz - W / 2 >= mask.coverage_high_hz())
        throw PlanningError("signal band does not intersect mask coverage");

    // Worst (minimum) mask limit over each subcarrier's +-B footprint.
    // The critically sampled baseband is circular: a footprint crossing
    // +-W/2 wraps to the opposite edge of the RF band, so it is split into
    // its RF images. Footprints outside coverage disqualify the subcarrier.
    std::vector<double> worst(M);
    std::vector<bool> eligible(M, true);
    for (int k = 0; k < M; ++k) {
        double base = subcarrier_center_hz(config, k, 0.0);
        std::vector<std::pair<double, double>> pieces;
        double lo = base - B, hi = base + B;
        if (lo < -W / 2) {
            pieces.emplace_back(-W / 2, hi);
            pieces.emplace_back(lo + W, W / 2);
        } else if (hi > W / 2) {
            pieces.emplace_back(lo, W / 2);
            pieces.emplace_back(-W / 2, hi - W);
        } else {
            pieces.emplace_back(lo, hi);
        }
        double w = 1e300;
        for (auto [p_lo, p_hi] : pieces) {
            if (p_hi <= p_lo) continue;
            double f_lo = carrier_hz + p_lo, f_hi = carrier_hz + p_hi;
            if (f_lo < mask.coverage_low_hz() || f_hi >= mask.coverage_high_hz()) {
                eligible[k] = false;
                break;
            }
            for (const auto& s : mask.segments) {
                if (s.f_high_hz <= f_lo || s.f_low_hz > f_hi) continue;
                w = std::min(w, s.limit_dbm_per_mhz);
            }
        }
        worst[k] = w;
    }

    // candidate levels: distinct footprint-worst limits, descending
    std::vector<double> levels;
    for (int k = 0; k < M; ++k)
        if (eligible[k]) levels.push_back(worst[k]);
    if (levels.empty()) throw PlanningError("no subcarrier fits inside mask coverage");
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    const int need = std::max(1, static_cast<int>(std::ceil(min_active_fraction * M)));
    for (double level : levels) {
        std::vector<int> active;
        double region_min = 1e300;
        for (int k = 0; k < M; ++k) {
            if (!eligible[k] || worst[k] < level) continue;
            active.push_back(k);
            region_min = std::min(region_min, worst[k]);
        }
        if (static_cast<int>(active.size()) >= need) {
            ActivePlan plan;
            plan.active_subcarriers = std::move(active);
            plan.tx_psd_dbm_per_mhz = region_min - margin_db;
            return plan;
        }
    }
    throw PlanningError("no activation level keeps the required fraction of subcarriers");
}

} // namespace fbmcss
