#ifndef FBMCSS_TRANSMIT_HPP
#define FBMCSS_TRANSMIT_HPP

#include "fbmcss/core.hpp"
#include "fbmcss/prototype.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fbmcss {

// Real-valued OQAM lattice d_{k,n}: subcarrier k, half-symbol slot n at
// spacing T/2. The j^(k+n) phase lattice is applied during synthesis.
struct OqamFrame {
    int num_subcarriers = 0;
    int num_slots = 0;
    std::vector<double> lattice; // [slot * M + k]

    double& at(int k, int n) { return lattice[static_cast<std::size_t>(n) * num_subcarriers + k]; }
    double at(int k, int n) const {
        return lattice[static_cast<std::size_t>(n) * num_subcarriers + k];
    }
    static OqamFrame zeros(const SmtConfig& config, int num_slots);
};

// QPSK -> OQAM staggering with spreading. qam[m][j] is stream m's j-th
// unit-power QPSK symbol; real parts land on even slots, imaginary parts on
// odd slots, replicated across S_m. Frame length is 2 * symbols.
OqamFrame oqam_stagger(const std::vector<std::vector<cplx>>& qam_per_stream,
                       const StreamMap& map, const SmtConfig& config);

// exact inverse of oqam_stagger (reads one representative subcarrier per stream)
std::vector<std::vector<cplx>> oqam_destagger(const OqamFrame& frame, const StreamMap& map);

// Hadamard multicoding: rows[m][n] selects the Walsh row for stream m in
// half-symbol slot n; the signed row is placed across S_m scaled 1/sqrt(L).
OqamFrame stagger_multicode(const std::vector<std::vector<int>>& rows_per_stream,
                            const StreamMap& map, const SmtConfig& config);

// Walsh row entry H[row][col] in +-1, natural (Hadamard) order
int hadamard_entry(int row, int col);

// Bits -> frame for either mode. bits[m] holds stream m's payload;
// repetition consumes 1 bit per half-symbol slot, multicode log2(L).
// The bit count must be a multiple of bits_per_half_symbol().
OqamFrame modulate_bits(const std::vector<std::vector<std::uint8_t>>& bits_per_stream,
                        const StreamMap& map, const SmtConfig& config);

// per-slot variance of the lattice values a mode produces (1/2 for QPSK
// halves, 1/L for scaled Walsh rows)
double symbol_variance(const StreamMap& map);

// Reference synthesis: the normative direct sum
//   s[t] = sum_k sum_n d_{k,n} j^(k+n) p[t - n M/2] exp(j 2 pi k t / M).
std::vector<cplx> synthesize_reference(const OqamFrame& frame, const PrototypeFilter& filter,
                                       const SmtConfig& config);

// Fast synthesis (per-slot IFFT + pulse overlap-add); matches the reference
// sum within 1e-9 RMS.
std::vector<cplx> synthesize(const OqamFrame& frame, const PrototypeFilter& filter,
                             const SmtConfig& config);

int synthesis_length(const OqamFrame& frame, const PrototypeFilter& filter,
                     const SmtConfig& config);

} // namespace fbmcss

#endif
