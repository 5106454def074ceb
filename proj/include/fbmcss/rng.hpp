#ifndef FBMCSS_RNG_HPP
#define FBMCSS_RNG_HPP

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fbmcss {

// Deterministic random stream with cheap substream derivation.
//
// Trials, stages within a trial, and Monte-Carlo workers each get their own
// stream derived from (root seed, path...) so results do not depend on
// scheduling order or worker count. Gaussian variates use an explicit
// Box-Muller so the byte stream is identical across standard libraries.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    // new independent stream keyed by (root seed, path...)
    RngStream derive(std::initializer_list<std::uint64_t> path) const;

    std::uint64_t root_seed() const { return root_; }

    std::uint64_t next_u64();
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double normal();                       // N(0, 1)
    // circularly symmetric complex Gaussian, E|z|^2 = 1
    std::complex<double> cnormal();

  private:
    std::uint64_t root_;
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fbmcss

#endif
