#pragma once

#include <array>
#include <cstdint>

namespace pathcalc::rng {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11), the same
/// algorithm and round constants used by NumPy's Philox bit generator.
/// Pure function of (counter, key); streams are split by key, positions by
/// counter, so any variate is addressable without sequencing.
struct Philox4x64 {
    std::array<std::uint64_t, 2> key{0, 0};
    std::array<std::uint64_t, 4> operator()(std::array<std::uint64_t, 4> counter) const;
};

/// SplitMix64 finalizer (Steele-Lea-Vigna); used to derive per-path seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for ensemble member j: the SplitMix64 finalizer applied to `seed`
/// advanced j steps along the golden-ratio Weyl sequence. Distinct j give
/// distinct seeds for any fixed master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::int64_t j);

/// Maps a 64-bit word to (0,1): top 53 bits as a dyadic rational, centered
/// in its cell so 0 and 1 are never produced.
double to_unit_open(std::uint64_t word);

/// Inverse standard normal CDF. Acklam's rational approximation polished by
/// two Halley steps through std::erfc; absolute error near machine epsilon
/// over (1e-280, 1 - 1e-16). Throws std::invalid_argument outside (0,1).
double inverse_normal_cdf(double p);

/// Addressable stream of standard normals: variate i comes from lane i%4 of
/// the Philox block i/4 under key {seed, stream}.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed, std::uint64_t stream = 0);
    double operator()(std::int64_t i) const;

private:
    Philox4x64 gen_;
    mutable std::int64_t cached_block_ = -1;
    mutable std::array<std::uint64_t, 4> block_{};
};

}  // namespace pathcalc::rng
