#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "pathcalc/rng.hpp"

using namespace pathcalc::rng;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
using Block = std::array<std::uint64_t, 4>;
}

// Reference blocks generated with NumPy's Philox bit generator
// (np.random.Philox(key=..., counter=...).random_raw(...)); NumPy advances
// the counter before each block, so its first outputs sit at counter+1.
TEST_CASE("philox matches the reference implementation") {
    Philox4x64 zero_key{{0, 0}};
    REQUIRE(zero_key({1, 0, 0, 0}) ==
            Block{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL,
                  0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});
    REQUIRE(zero_key({2, 0, 0, 0}) ==
            Block{0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
                  0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL});

    Philox4x64 small_key{{42, 0}};
    REQUIRE(small_key({1, 0, 0, 0}) ==
            Block{0xd1f8817d4d62880eULL, 0x307266b65cc8797eULL,
                  0xde1f04e7f084ed03ULL, 0x65034a8e78cd1e59ULL});

    Philox4x64 wide_key{{0xdeadbeefcafebabeULL, 0x0123456789abcdefULL}};
    REQUIRE(wide_key({6, 6, 7, 8}) ==
            Block{0xc5e7c10b32057ae8ULL, 0x304aacd3d1a36b66ULL,
                  0x92ff5fad82425b4dULL, 0xfc84da3b60a38851ULL});

    // counter words past the first (numpy wraps 2^64-1 + 1 into the carry)
    Philox4x64 carry_key{{1, 2}};
    REQUIRE(carry_key({0, 1, 0, 0}) ==
            Block{0x93baf02a9b6e1e64ULL, 0xc291f37088c2bdefULL,
                  0xb1363d2ce37f4eaeULL, 0xf20b54a1cecf0a14ULL});
    REQUIRE(carry_key({1, 1, 0, 0}) ==
            Block{0x57bf6a7a1189e4daULL, 0xe8a3ffc1f36ae07eULL,
                  0xd0a3cbc2a98ae4cbULL, 0x28d6c889bddcf2b8ULL});
}

TEST_CASE("philox is a pure function of counter and key") {
    Philox4x64 g{{123, 456}};
    Block a = g({7, 8, 9, 10});
    Block b = g({11, 0, 0, 0});
    Block c = g({7, 8, 9, 10});
    REQUIRE(a == c);
    REQUIRE(a != b);

    Philox4x64 other{{123, 457}};
    REQUIRE(other({7, 8, 9, 10}) != a);
}

// First value of the reference SplitMix64 sequence from seed 0, plus points
// along the same published sequence.
TEST_CASE("splitmix64 reference values") {
    REQUIRE(splitmix64(0) == 0xe220a8397b1dcdafULL);
    REQUIRE(splitmix64(0x9E3779B97F4A7C15ULL) == 0x6e789e6aa1b965f4ULL);
    REQUIRE(splitmix64(1234567) == 0x599ed017fb08fc85ULL);
}

TEST_CASE("derive_seed separates ensemble members") {
    REQUIRE(derive_seed(42, 0) == splitmix64(42));
    REQUIRE(derive_seed(42, 3) == 0x581ce1ff0e4ae394ULL);

    std::set<std::uint64_t> seen;
    for (std::int64_t j = 0; j < 10000; ++j) seen.insert(derive_seed(0, j));
    REQUIRE(seen.size() == 10000);

    // members of different masters do not collide on the probed window
    std::set<std::uint64_t> other;
    for (std::int64_t j = 0; j < 10000; ++j) other.insert(derive_seed(1, j));
    for (std::uint64_t v : other) REQUIRE(seen.count(v) == 0);
}

TEST_CASE("to_unit_open stays inside the open interval") {
    const double lowest = std::ldexp(1.0, -54);
    REQUIRE(to_unit_open(0) == lowest);
    REQUIRE(to_unit_open(~0ULL) == 1.0 - lowest);
    REQUIRE(to_unit_open(1ULL << 11) == 3.0 * lowest);

    // monotone in the top 53 bits, insensitive to the dropped low bits
    REQUIRE(to_unit_open(0x7ff) == to_unit_open(0));
    std::uint64_t prev_word = 0;
    for (int k = 12; k < 64; ++k) {
        std::uint64_t word = 1ULL << k;
        REQUIRE(to_unit_open(word) > to_unit_open(prev_word));
        prev_word = word;
    }
}

// Quantiles frozen from scipy.stats.norm.ppf.
TEST_CASE("inverse normal cdf matches reference quantiles") {
    struct Case {
        double p, x;
    };
    const Case cases[] = {
        {1e-16, -8.222082216130435},
        {1e-10, -6.361340902404056},
        {0.00042, -3.339266288950924},
        {0.0013, -3.0114537584997843},
        {0.02425, -1.972961051311885},
        {0.2, -0.8416212335729142},
        {0.7, 0.5244005127080407},
        {0.97575, 1.972961051311885},
        {0.9999, 3.719016485455709},
        {1.0 - 1e-10, 6.361340889697422},
        {1.0 - 1e-16, 8.209536151601387},
    };
    for (const Case& c : cases) {
        INFO("p = " << c.p);
        REQUIRE_THAT(inverse_normal_cdf(c.p), WithinRel(c.x, 1e-13) || WithinAbs(c.x, 1e-13));
    }
    REQUIRE(inverse_normal_cdf(0.5) == 0.0);
    REQUIRE_THAT(inverse_normal_cdf(1e-280), WithinRel(-35.78342139466302, 1e-12));
    // past the documented accuracy window the value stays sane
    REQUIRE_THAT(inverse_normal_cdf(1e-300), WithinRel(-37.0470962993612, 1e-9));
}

TEST_CASE("inverse normal cdf symmetry and domain") {
    for (double p : {0.001, 0.02425, 0.1, 0.25, 0.4}) {
        double lo = inverse_normal_cdf(p);
        double hi = inverse_normal_cdf(1.0 - p);
        REQUIRE_THAT(lo + hi, WithinAbs(0.0, 1e-12));
    }
    REQUIRE_THROWS_AS(inverse_normal_cdf(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(inverse_normal_cdf(1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(inverse_normal_cdf(-0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(inverse_normal_cdf(1.5), std::invalid_argument);
}

TEST_CASE("normal stream is addressable and deterministic") {
    NormalStream a(2024, 5);
    NormalStream b(2024, 5);

    // order of access cannot matter
    double late = a(1000);
    double early = a(3);
    REQUIRE(b(3) == early);
    REQUIRE(b(1000) == late);
    REQUIRE(a(3) == early);

    NormalStream other_seed(2025, 5);
    NormalStream other_stream(2024, 6);
    REQUIRE(other_seed(3) != early);
    REQUIRE(other_stream(3) != early);
}

TEST_CASE("normal stream moments") {
    NormalStream z(7);
    const std::int64_t n = 200000;
    double sum = 0.0, sumsq = 0.0, sumcube = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double v = z(i);
        sum += v;
        sumsq += v * v;
        sumcube += v * v * v;
    }
    double mean = sum / static_cast<double>(n);
    double var = sumsq / static_cast<double>(n) - mean * mean;
    double skew = sumcube / static_cast<double>(n);
    REQUIRE_THAT(mean, WithinAbs(0.0, 4.0 / std::sqrt(static_cast<double>(n))));
    REQUIRE_THAT(var, WithinAbs(1.0, 6.0 * std::sqrt(2.0 / static_cast<double>(n))));
    REQUIRE_THAT(skew, WithinAbs(0.0, 12.0 / std::sqrt(static_cast<double>(n))));
}
