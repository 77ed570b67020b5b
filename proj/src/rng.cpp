#include "pathcalc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pathcalc::rng {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    return static_cast<std::uint64_t>(p);
}

inline void philox_round(std::array<std::uint64_t, 4>& ctr, const std::array<std::uint64_t, 2>& key) {
    std::uint64_t hi0, hi1;
    std::uint64_t lo0 = mulhilo(kPhiloxM0, ctr[0], hi0);
    std::uint64_t lo1 = mulhilo(kPhiloxM1, ctr[2], hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint64_t, 4> Philox4x64::operator()(std::array<std::uint64_t, 4> counter) const {
    std::array<std::uint64_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        philox_round(counter, k);
    }
    return counter;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::int64_t j) {
    return splitmix64(seed + static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL);
}

double to_unit_open(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    if (p > 0.5) return -inverse_normal_cdf(1.0 - p);

    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    // Halley refinement; x <= 0 here so erfc sees a nonnegative argument and
    // Phi(x) = erfc(-x/sqrt(2))/2 evaluates without cancellation. Skipped in
    // the far tail where exp(x^2/2) would overflow before Phi underflows.
    if (p >= 1e-280) {
        constexpr double sqrt2 = 1.4142135623730951;
        constexpr double sqrt_2pi = 2.5066282746310002;
        for (int it = 0; it < 2; ++it) {
            double e = 0.5 * std::erfc(-x / sqrt2) - p;
            double u = e * sqrt_2pi * std::exp(0.5 * x * x);
            x -= u / (1.0 + 0.5 * x * u);
        }
    }
    return x;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream) {
    gen_.key = {seed, stream};
}

double NormalStream::operator()(std::int64_t i) const {
    std::int64_t blk = i >> 2;
    if (blk != cached_block_) {
        block_ = gen_({static_cast<std::uint64_t>(blk), 0, 0, 0});
        cached_block_ = blk;
    }
    return inverse_normal_cdf(to_unit_open(block_[i & 3]));
}

}  // namespace pathcalc::rng
