#include "fbmcss/transmit.hpp"

#include "fbmcss/errors.hpp"
#include "fbmcss/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace fbmcss {

OqamFrame OqamFrame::zeros(const SmtConfig& config, int num_slots) {
    OqamFrame f;
    f.num_subcarriers = config.num_subcarriers;
    f.num_slots = num_slots;
    f.lattice.assign(static_cast<std::size_t>(num_slots) * config.num_subcarriers, 0.0);
    return f;
}

OqamFrame oqam_stagger(const std::vector<std::vector<cplx>>& qam, const StreamMap& map,
                       const SmtConfig& config) {
    if (static_cast<int>(qam.size()) != map.num_streams())
        throw FramingError("oqam_stagger: one QAM sequence per stream required");
    std::size_t nsym = qam.empty() ? 0 : qam.front().size();
    for (const auto& q : qam)
        if (q.size() != nsym) throw FramingError("oqam_stagger: unequal stream lengths");

    OqamFrame f = OqamFrame::zeros(config, static_cast<int>(2 * nsym));
    for (int m = 0; m < map.num_streams(); ++m) {
        for (std::size_t j = 0; j < nsym; ++j) {
            double re = qam[m][j].real();
            double im = qam[m][j].imag();
            for (int k : map.streams[m]) {
                f.at(k, static_cast<int>(2 * j)) = re;
                f.at(k, static_cast<int>(2 * j + 1)) = im;
            }
        }
    }
    return f;
}

std::vector<std::vector<cplx>> oqam_destagger(const OqamFrame& frame, const StreamMap& map) {
    if (frame.num_slots % 2 != 0)
        throw FramingError("oqam_destagger: frame must hold whole QAM symbols");
    std::vector<std::vector<cplx>> qam(map.num_streams());
    for (int m = 0; m < map.num_streams(); ++m) {
        int k = map.streams[m].front();
        qam[m].resize(frame.num_slots / 2);
        for (int j = 0; j < frame.num_slots / 2; ++j)
            qam[m][j] = {frame.at(k, 2 * j), frame.at(k, 2 * j + 1)};
    }
    return qam;
}

int hadamard_entry(int row, int col) {
    return (std::popcount(static_cast<unsigned>(row & col)) & 1) ? -1 : 1;
}

OqamFrame stagger_multicode(const std::vector<std::vector<int>>& rows, const StreamMap& map,
                            const SmtConfig& config) {
    if (map.mode != SpreadMode::HadamardMulticode)
        throw ConfigError("stagger_multicode requires a Hadamard stream map");
    if (static_cast<int>(rows.size()) != map.num_streams())
        throw FramingError("stagger_multicode: one row sequence per stream required");
    std::size_t nslots = rows.empty() ? 0 : rows.front().size();
    for (const auto& r : rows)
        if (r.size() != nslots) throw FramingError("stagger_multicode: unequal stream lengths");

    const int L = map.spread_factor;
    const double scale = 1.0 / std::sqrt(static_cast<double>(L));
    OqamFrame f = OqamFrame::zeros(config, static_cast<int>(nslots));
    for (int m = 0; m < map.num_streams(); ++m) {
        const auto& sm = map.streams[m];
        for (std::size_t n = 0; n < nslots; ++n) {
            int row = rows[m][n];
            if (row < 0 || row >= L) throw FramingError("stagger_multicode: row index out of range");
            for (int c = 0; c < L; ++c)
                f.at(sm[c], static_cast<int>(n)) = scale * hadamard_entry(row, c);
        }
    }
    return f;
}

OqamFrame modulate_bits(const std::vector<std::vector<std::uint8_t>>& bits, const StreamMap& map,
                        const SmtConfig& config) {
    if (static_cast<int>(bits.size()) != map.num_streams())
        throw FramingError("modulate_bits: one payload per stream required");
    const int bph = map.bits_per_half_symbol();
    std::size_t nbits = bits.empty() ? 0 : bits.front().size();
    for (const auto& b : bits)
        if (b.size() != nbits) throw FramingError("modulate_bits: unequal payload lengths");
    if (nbits % (2 * static_cast<std::size_t>(bph)) != 0)
        throw FramingError("modulate_bits: payload must fill whole QAM symbol slots");

    if (map.mode == SpreadMode::RepetitionQpsk) {
        std::vector<std::vector<cplx>> qam(bits.size());
        const double a = 1.0 / std::numbers::sqrt2;
        for (std::size_t m = 0; m < bits.size(); ++m) {
            qam[m].resize(nbits / 2);
            for (std::size_t j = 0; j < nbits / 2; ++j) {
                double re = bits[m][2 * j] ? -a : a;
                double im = bits[m][2 * j + 1] ? -a : a;
                qam[m][j] = {re, im};
            }
        }
        return oqam_stagger(qam, map, config);
    }

    std::vector<std::vector<int>> rows(bits.size());
    for (std::size_t m = 0; m < bits.size(); ++m) {
        rows[m].resize(nbits / bph);
        for (std::size_t n = 0; n < rows[m].size(); ++n) {
            int row = 0;
            for (int b = 0; b < bph; ++b) row = (row << 1) | bits[m][n * bph + b];
            rows[m][n] = row;
        }
    }
    return stagger_multicode(rows, map, config);
}

double symbol_variance(const StreamMap& map) {
    if (map.mode == SpreadMode::RepetitionQpsk) return 0.5;
    return 1.0 / static_cast<double>(map.spread_factor);
}

int synthesis_length(const OqamFrame& frame, const PrototypeFilter& filter,
                     const SmtConfig& config) {
    if (frame.num_slots == 0) return 0;
    return (frame.num_slots - 1) * config.half_symbol_hop() + filter.length();
}

std::vector<cplx> synthesize_reference(const OqamFrame& frame, const PrototypeFilter& filter,
                                       const SmtConfig& config) {
    const int M = config.num_subcarriers;
    const int D = config.half_symbol_hop();
    const int P = filter.length();
    if (frame.num_subcarriers != M) throw ConfigError("frame/config subcarrier mismatch");

    std::vector<cplx> s(synthesis_length(frame, filter, config), cplx{0.0, 0.0});
    for (int k = 0; k < M; ++k) {
        bool active = config.is_active(k);
        for (int n = 0; n < frame.num_slots; ++n) {
            double d = frame.at(k, n);
            if (d == 0.0) continue;
            if (!active)
                throw ConfigError("synthesize: nonzero symbol on inactive subcarrier " +
                                  std::to_string(k));
            cplx ph = jpow(k + n) * d;
            for (int t = 0; t < P; ++t) {
                int abs_t = n * D + t;
                double ang = 2.0 * std::numbers::pi * k * abs_t / M;
                s[abs_t] += ph * filter.taps[t] * cplx{std::cos(ang), std::sin(ang)};
            }
        }
    }
    return s;
}

std::vector<cplx> synthesize(const OqamFrame& frame, const PrototypeFilter& filter,
                             const SmtConfig& config) {
    const int M = config.num_subcarriers;
    const int D = config.half_symbol_hop();
    const int P = filter.length();
    if (frame.num_subcarriers != M) throw ConfigError("frame/config subcarrier mismatch");
    for (int k = 0; k < M; ++k) {
        if (config.is_active(k)) continue;
        for (int n = 0; n < frame.num_slots; ++n)
            if (frame.at(k, n) != 0.0)
                throw ConfigError("synthesize: nonzero symbol on inactive subcarrier " +
                                  std::to_string(k));
    }

    std::vector<cplx> s(synthesis_length(frame, filter, config), cplx{0.0, 0.0});
    Fft plan(static_cast<std::size_t>(M));
    std::vector<cplx> v(M);

    // s[t] = sum_n p[t - nD] * A_n[t mod M],  A_n = M-point inverse DFT of
    // d_{k,n} j^(k+n); the exponential is M-periodic in t
    for (int n = 0; n < frame.num_slots; ++n) {
        bool any = false;
        for (int k = 0; k < M; ++k) {
            double d = frame.at(k, n);
            v[k] = d * jpow(k + n);
            any = any || d != 0.0;
        }
        if (!any) continue;
        plan.inverse(v);
        int t0 = n * D;
        for (int t = 0; t < P; ++t)
            s[t0 + t] += filter.taps[t] * static_cast<double>(M) * v[(t0 + t) % M];
    }
    return s;
}

} // namespace fbmcss
