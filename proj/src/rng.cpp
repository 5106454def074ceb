#include "fbmcss/rng.hpp"

#include <cmath>
#include <numbers>

namespace fbmcss {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t seed) : root_(seed), eng_(splitmix64(seed)) {}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> path) const {
    std::uint64_t s = root_;
    for (std::uint64_t p : path) s = splitmix64(s ^ (p + 0x632be59bd9b4e019ull));
    return RngStream(s);
}

std::uint64_t RngStream::next_u64() { return eng_(); }

double RngStream::uniform() {
    // 53-bit mantissa from the top bits
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::complex<double> RngStream::cnormal() {
    constexpr double half = 0.5;
    return {normal() * std::sqrt(half), normal() * std::sqrt(half)};
}

} // namespace fbmcss
