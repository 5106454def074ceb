#include "fbmcss/errors.hpp"
#include "fbmcss/prototype.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fbmcss;
using namespace fbmcss::test;

TEST_CASE("prototype basics: energy, symmetry, length") {
    auto cfg = SmtConfig::create(64e6, 64);
    auto p = design_prototype(cfg, 4, 1.0);
    CHECK(p.length() == 4 * 64 + 1);

    double e = 0.0;
    for (double v : p.taps) e += v * v;
    CHECK(std::abs(e - 1.0) < 1e-12);

    for (int i = 0; i < p.length() / 2; ++i) CHECK(p.taps[i] == p.taps[p.length() - 1 - i]);
}

TEST_CASE("square-root Nyquist floor at the default design") {
    auto cfg = SmtConfig::create(64e6, 64);
    auto p = design_prototype(cfg, 4, 1.0);
    CHECK(prototype_isi_floor_db(p, 64) < -50.0);
    // type invariant: off-peak power ratio below 1e-4
    CHECK(prototype_max_offpeak_db(p, 64) < -40.0);

    auto p3 = design_prototype(cfg, 3, 1.0);
    CHECK(prototype_max_offpeak_db(p3, 64) < -40.0);
}

TEST_CASE("unachievable invariants raise a design error with the measured level") {
    auto cfg = SmtConfig::create(64e6, 64);
    bool threw = false;
    try {
        design_prototype(cfg, 3, 0.1);
    } catch (const DesignError& e) {
        threw = true;
        CHECK(std::isfinite(e.measured_isi_db));
    }
    CHECK(threw);
    CHECK_THROWS_AS(design_prototype(cfg, 2, 1.0), ConfigError);
    CHECK_THROWS_AS(design_prototype(cfg, 4, 0.0), ConfigError);
    CHECK_THROWS_AS(design_prototype(cfg, 4, 1.5), ConfigError);
}

TEST_CASE("stopband: response beyond 2B is 40 dB down") {
    auto cfg = SmtConfig::create(64e6, 64);
    auto p = design_prototype(cfg, 4, 1.0);
    const int NF = 1 << 16;
    auto spec = prototype_spectrum(p, NF);
    double peak = 0.0;
    for (const auto& v : spec) peak = std::max(peak, std::abs(v));
    // offsets >= 2B from center: |f| >= 2/M in cycles/sample
    double worst = 0.0;
    for (int f = 0; f < NF; ++f) {
        double fc = f <= NF / 2 ? static_cast<double>(f) / NF : static_cast<double>(f - NF) / NF;
        if (std::abs(fc) >= 2.0 / 64) worst = std::max(worst, std::abs(spec[f]));
    }
    CHECK(20.0 * std::log10(worst / peak) < -40.0);
}

TEST_CASE("freq_response matches a direct DTFT evaluation") {
    auto cfg = SmtConfig::create(32e6, 32, 256, 128);
    auto p = design_prototype(cfg, 4, 1.0);
    const int N = cfg.fc_block_len;
    const int Lsub = cfg.subband_size();
    for (int band : {0, 1, 7, 31}) {
        auto h = freq_response(p, cfg, band);
        REQUIRE(static_cast<int>(h.size()) == Lsub);
        for (int n = 0; n < Lsub; ++n) {
            // h_{k,n} = j^{-k} conj( sum_t p[t] e^{-j2pi off t / N} ),
            // off = n - Lsub/2 relative to the band center
            int off = n - Lsub / 2;
            cplx acc{0.0, 0.0};
            for (int t = 0; t < p.length(); ++t) {
                double ang = -2.0 * std::numbers::pi * off * static_cast<double>(t) / N;
                acc += p.taps[t] * cplx{std::cos(ang), std::sin(ang)};
            }
            cplx want = jpow(-band) * std::conj(acc);
            CHECK(std::abs(h[n] - want) < 1e-10);
        }
    }
    CHECK_THROWS_AS(freq_response(p, SmtConfig::create(32e6, 32, 256, 128, {0, 1}), 5),
                    DomainError);
}

TEST_CASE("band responses are modulated copies of band zero") {
    auto cfg = SmtConfig::create(32e6, 32);
    auto p = design_prototype(cfg, 4, 1.0);
    auto h0 = freq_response(p, cfg, 0);
    for (int band : {1, 5, 16}) {
        auto hk = freq_response(p, cfg, band);
        for (std::size_t n = 0; n < h0.size(); ++n)
            CHECK(std::abs(hk[n] * jpow(band) - h0[n]) < 1e-12);
    }
}

TEST_CASE("band center tone has maximal gain") {
    auto cfg = SmtConfig::create(32e6, 32);
    auto p = design_prototype(cfg, 4, 1.0);
    auto h = freq_response(p, cfg, 0);
    int Lsub = cfg.subband_size();
    double center = std::abs(h[Lsub / 2]);
    for (int n = 0; n < Lsub; ++n) CHECK(std::abs(h[n]) <= center + 1e-12);
}
