#include "fbmcss/errors.hpp"
#include "fbmcss/harness.hpp"
#include "fbmcss/mask.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace fbmcss;
using namespace fbmcss::test;

TEST_CASE("fcc in-band limit") {
    auto mask = builtin_mask(Region::FccUsa);
    CHECK(mask_limit(mask, 6.0e9) == doctest::Approx(-41.3));
    CHECK(mask_limit(mask, 3.5e9) == doctest::Approx(-41.3));
    CHECK(mask_limit(mask, 1.0e9) == doctest::Approx(-75.3));
}

TEST_CASE("boundary frequencies belong to the higher segment") {
    auto mask = builtin_mask(Region::FccUsa);
    CHECK(mask_limit(mask, 10.6e9) == doctest::Approx(-51.3));
    CHECK(mask_limit(mask, 3.1e9) == doctest::Approx(-41.3));
    CHECK(mask_limit(mask, std::nextafter(10.6e9, 0.0)) == doctest::Approx(-41.3));
}

TEST_CASE("out-of-coverage frequencies raise a coverage error") {
    auto mask = builtin_mask(Region::Japan);
    CHECK_THROWS_AS(mask_limit(mask, -1.0), CoverageError);
    CHECK_THROWS_AS(mask_limit(mask, 25e9), CoverageError);
}

TEST_CASE("lookup equals a direct table scan") {
    RngStream rng(1);
    for (Region r : {Region::FccUsa, Region::EccEurope, Region::Japan}) {
        auto mask = builtin_mask(r);
        for (int i = 0; i < 2000; ++i) {
            double f = rng.uniform(0.0, 20e9 - 1.0);
            double want = 0.0;
            bool found = false;
            for (const auto& s : mask.segments)
                if (f >= s.f_low_hz && f < s.f_high_hz) {
                    want = s.limit_dbm_per_mhz;
                    found = true;
                    break;
                }
            REQUIRE(found);
            CHECK(mask_limit(mask, f) == want);
        }
    }
}

TEST_CASE("segment refinement does not change lookups") {
    auto mask = builtin_mask(Region::FccUsa);
    SpectralMask refined = mask;
    refined.segments.clear();
    for (const auto& s : mask.segments) {
        double mid = 0.5 * (s.f_low_hz + s.f_high_hz);
        refined.segments.push_back({s.f_low_hz, mid, s.limit_dbm_per_mhz});
        refined.segments.push_back({mid, s.f_high_hz, s.limit_dbm_per_mhz});
    }
    refined.validate();
    RngStream rng(2);
    for (int i = 0; i < 2000; ++i) {
        double f = rng.uniform(0.0, 20e9 - 1.0);
        CHECK(mask_limit(mask, f) == mask_limit(refined, f));
    }
}

TEST_CASE("mask files round trip and match the builtins") {
    for (Region r : {Region::FccUsa, Region::EccEurope, Region::Japan}) {
        auto builtin = builtin_mask(r);
        auto tmp = (std::filesystem::temp_directory_path() / "fbmcss_mask_test.csv").string();
        save_mask_csv(tmp, builtin);
        auto loaded = load_mask_csv(tmp);
        REQUIRE(loaded.segments.size() == builtin.segments.size());
        for (std::size_t i = 0; i < loaded.segments.size(); ++i) {
            CHECK(loaded.segments[i].f_low_hz ==
                  doctest::Approx(builtin.segments[i].f_low_hz).epsilon(1e-12));
            CHECK(loaded.segments[i].limit_dbm_per_mhz == builtin.segments[i].limit_dbm_per_mhz);
        }
        std::filesystem::remove(tmp);

        // shipped data file agrees with the builtin table
        std::string shipped = std::string(FBMCSS_SOURCE_DIR) + "/data/masks/" +
                              region_name(r) + ".csv";
        auto file_mask = load_mask_csv(shipped);
        REQUIRE(file_mask.segments.size() == builtin.segments.size());
        for (std::size_t i = 0; i < file_mask.segments.size(); ++i) {
            CHECK(file_mask.segments[i].f_low_hz ==
                  doctest::Approx(builtin.segments[i].f_low_hz).epsilon(1e-12));
            CHECK(file_mask.segments[i].f_high_hz ==
                  doctest::Approx(builtin.segments[i].f_high_hz).epsilon(1e-12));
            CHECK(file_mask.segments[i].limit_dbm_per_mhz ==
                  builtin.segments[i].limit_dbm_per_mhz);
        }
    }
}

namespace {

CalibratedPsd flat_psd(double level_dbm_per_mhz, double f_lo, double f_hi, int bins) {
    CalibratedPsd psd;
    psd.resolution_bw_hz = 1e6;
    for (int i = 0; i < bins; ++i) {
        psd.freq_hz.push_back(f_lo + (f_hi - f_lo) * i / (bins - 1));
        psd.dbm_per_mhz.push_back(level_dbm_per_mhz);
    }
    return psd;
}

} // namespace

TEST_CASE("compliance checking") {
    auto mask = builtin_mask(Region::FccUsa);

    auto good = flat_psd(-51.3, 4e9, 9e9, 200);
    auto rep = check_compliance(good, mask, 1.0);
    CHECK(rep.pass);
    CHECK(rep.min_margin_db >= 10.0 - 1e-9);

    auto bad = good;
    bad.dbm_per_mhz[77] = -41.3 + 1.0; // one bin 1 dB over the in-band limit
    auto rep2 = check_compliance(bad, mask, 0.0);
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.worst_freq_hz == doctest::Approx(bad.freq_hz[77]));
    CHECK(rep2.worst_excess_db == doctest::Approx(1.0));

    auto coarse = good;
    coarse.resolution_bw_hz = 2e6;
    CHECK_THROWS_AS(check_compliance(coarse, mask, 1.0), MeasurementError);

    auto outside = flat_psd(-60.0, 19.5e9, 21e9, 50);
    CHECK_THROWS_AS(check_compliance(outside, mask, 1.0), CoverageError);
}

TEST_CASE("planner: uniform mask keeps everything active") {
    SpectralMask uniform;
    uniform.region = Region::FccUsa;
    uniform.segments = {{0.0, 20e9, -41.3}};
    auto cfg = SmtConfig::create(160e6, 64);
    auto plan = plan_active_set(uniform, cfg, 6.85e9, 1.0);
    CHECK(plan.active_subcarriers.size() == 64);
    CHECK(plan.tx_psd_dbm_per_mhz == doctest::Approx(-42.3));
}

TEST_CASE("planner deactivates subcarriers straddling the band edge") {
    auto mask = builtin_mask(Region::FccUsa);
    auto cfg = SmtConfig::create(160e6, 64);
    // carrier near the 10.6 GHz FCC edge: upper part of the band must go dark
    auto plan = plan_active_set(mask, cfg, 10.58e9, 1.0);
    CHECK(plan.active_subcarriers.size() < 64);
    CHECK(!plan.active_subcarriers.empty());
    for (int k : plan.active_subcarriers) {
        double fc = subcarrier_center_hz(cfg, k, 10.58e9);
        CHECK(fc + cfg.subcarrier_spacing_hz <= 10.6e9);
    }
    CHECK(plan.tx_psd_dbm_per_mhz == doctest::Approx(-42.3));
}

TEST_CASE("planner failure when nothing fits") {
    SpectralMask m;
    m.region = Region::Japan;
    m.segments = {{0.0, 20e9, -80.0}};
    auto cfg = SmtConfig::create(160e6, 64);
    // requesting nearly all subcarriers at a level that exists is fine
    CHECK_NOTHROW(plan_active_set(m, cfg, 5e9, 1.0, 0.99));
    // no coverage at all
    SpectralMask low;
    low.region = Region::Japan;
    low.segments = {{0.0, 1e9, -80.0}};
    CHECK_THROWS_AS(plan_active_set(low, cfg, 5e9, 1.0), PlanningError);
}

TEST_CASE("planner output passes compliance with the same margin (closed loop)") {
    PsdReportSpec spec;
    spec.system = SystemSpec{};
    spec.system.total_bandwidth_hz = 160e6;
    spec.system.num_subcarriers = 128;
    spec.system.num_streams = 1;
    spec.region = Region::FccUsa;
    spec.carrier_hz = 10.58e9; // straddles the 10.6 GHz edge
    spec.margin_db = 1.0;
    spec.payload_slots = 2048;
    auto rep = run_psd_report(spec);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.compliance.pass);
    CHECK(static_cast<int>(rep.plan.active_subcarriers.size()) < 128);
}
