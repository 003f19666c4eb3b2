#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracle.hpp"

#include "dyadic/series.hpp"
#include "dyadic/walsh.hpp"

#include <random>

using namespace dyadic;

namespace {

DyadicElement E(const char* s) { return DyadicElement::parse(s); }
const DyadicElement e0 = DyadicElement::unit(0);

}  // namespace

TEST_CASE("walsh examples") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) CHECK(walsh_eval(0, oracle::random_element(rng, 10)).value() == 1);
    CHECK(walsh_eval(1, e0).value() == -1);
    CHECK(walsh_eval(5, e0 ^ DyadicElement::unit(2)).value() == 1);
    CHECK(walsh_eval(5, E("101|0")).value() == 1);
    // Tail digits count for large n.
    CHECK(walsh_eval(uint64_t{1} << 40, E("0|1")).value() == -1);
    CHECK(walsh_eval(WalshIndex(pow2(100)), E("0|1")).value() == -1);
    CHECK(walsh_eval(WalshIndex(pow2(100) + 1), E("0|1")).value() == -1);
    CHECK(walsh_eval(WalshIndex(pow2(100)), E("1|0")).value() == 1);
}

TEST_CASE("walsh index accessors") {
    const WalshIndex n(13);
    CHECK(n.coefficient(0));
    CHECK_FALSE(n.coefficient(1));
    CHECK(n.popcount() == 3);
    CHECK(n.bit_length() == 4);
    CHECK(n.lowest_bit() == 0);
    CHECK(WalshIndex(12).lowest_bit() == 2);
    CHECK(WalshIndex(pow2(80)).popcount() == 1);
    CHECK_FALSE(WalshIndex(pow2(80)).fits_u64());
}

TEST_CASE("multi walsh and translation") {
    CHECK(walsh_eval_multi({0, 0}, DyadicPoint({e0, e0})).value() == 1);
    CHECK(walsh_eval_multi({1, 2}, DyadicPoint({e0, DyadicElement::unit(1)})).value() == 1);
    CHECK_THROWS(walsh_eval_multi({1}, DyadicPoint({e0, e0})));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10000; ++i) {
        const DyadicPoint g = oracle::random_point(rng, 2, 12), h = oracle::random_point(rng, 2, 12);
        const MultiIndex n{rng() % 4096, rng() % 4096};
        CHECK(walsh_eval_multi(n, g) * walsh_eval_multi(n, h) == walsh_eval_multi(n, add(g, h)));
        CHECK(walsh_eval_multi(n, g).value() == oracle::walsh({n[0].to_u64(), n[1].to_u64()}, g));
    }
}

TEST_CASE("rademacher") {
    CHECK(rademacher(0, DyadicElement::zero()).value() == 1);
    CHECK(rademacher(2, DyadicElement::unit(2)).value() == -1);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto g = oracle::random_element(rng, 12);
        for (unsigned k = 0; k <= 10; ++k) CHECK(rademacher(k, g) == walsh_eval(uint64_t{1} << k, g));
    }
}

TEST_CASE("orthonormality on rank-k intervals") {
    for (unsigned k = 0; k <= 8; ++k) {
        const uint64_t side = uint64_t{1} << k;
        std::vector<std::vector<int>> W(side, std::vector<int>(side));
        for (uint64_t a = 0; a < side; ++a)
            for (uint64_t m = 0; m < side; ++m) W[a][m] = walsh_eval(a, oracle::interval_corner(k, m)).value();
        bool ok = true;
        for (uint64_t a = 0; a < side; ++a)
            for (uint64_t b = 0; b < side; ++b) {
                long s = 0;
                for (uint64_t m = 0; m < side; ++m) s += W[a][m] * W[b][m];
                ok = ok && s == (a == b ? static_cast<long>(side) : 0);
            }
        CHECK(ok);
    }
}

TEST_CASE("dirichlet examples") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) CHECK(dirichlet_naive(1, oracle::random_element(rng, 8)) == 1);
    CHECK(dirichlet_naive(5, DyadicElement::zero()) == 5);
    CHECK(dirichlet_naive(5, e0) == 1);
    CHECK(dirichlet_closed(6, e0) == 0);
    CHECK_THROWS(dirichlet_naive(0, e0));
    CHECK_THROWS(dirichlet_closed(0, e0));
    for (unsigned k = 0; k <= 6; ++k) {
        for (uint64_t b = 0; b < 256; ++b) {
            const auto g = DyadicElement::from_bits(b, 8);
            CHECK(dirichlet_closed(uint64_t{1} << k, g) == (in_zero_cube(g, k) ? (long)(1L << k) : 0L));
            if (in_zero_cube(g, k + 1))
                for (uint64_t n = 1; n <= (uint64_t{1} << (k + 1)); ++n) CHECK(dirichlet_closed(n, g) == (long)n);
        }
    }
    // Closed form against the definitional oracle, both tails, rank 8.
    bool ok = true;
    for (uint64_t b = 0; b < 256; ++b)
        for (Tail t : {Tail::AllZeros, Tail::AllOnes}) {
            const auto g = DyadicElement::from_bits(b, 8, t);
            for (uint64_t N = 1; N <= 300; ++N) ok = ok && dirichlet_closed(N, g) == oracle::dirichlet(N, g);
        }
    CHECK(ok);
    // Large N uses tail digits.
    CHECK(dirichlet_closed(WalshIndex(pow2(70)), DyadicElement::zero()) == pow2(70));
    CHECK(dirichlet_closed(WalshIndex(pow2(70)), E("0|1")) == 0);
}

TEST_CASE("dirichlet multi") {
    const DyadicPoint z = DyadicPoint::zero(2);
    CHECK(dirichlet_multi({1, 1}, DyadicPoint({e0, e0})) == 1);
    CHECK(dirichlet_multi({2, 2}, z) == 4);
    CHECK(dirichlet_multi({5, 6}, DyadicPoint({DyadicElement::zero(), e0})) == 0);
    CHECK_THROWS(dirichlet_multi({0, 2}, z));
}

TEST_CASE("vanishing rank") {
    CHECK(vanishing_rank(6) == 1);
    CHECK(vanishing_rank(5) == 0);
    for (unsigned k = 0; k < 20; ++k) CHECK(vanishing_rank(uint64_t{1} << k) == k);
    CHECK_THROWS(vanishing_rank(0));
    for (uint64_t b = 0; b < 256; ++b) {
        const auto g = DyadicElement::from_bits(b, 8);
        if (g.digit(0)) CHECK(oracle::dirichlet(6, g) == 0);
    }
    // The one-larger cube reading fails already at N = 5.
    CHECK(oracle::dirichlet(5, e0) == 1);
    for (uint64_t N = 1; N <= 128; ++N)
        for (uint64_t b = 0; b < 256; ++b) {
            const auto g = DyadicElement::from_bits(b, 8);
            if (!in_zero_cube(g, vanishing_rank(N))) CHECK(dirichlet_naive(N, g) == 0);
        }
}

TEST_CASE("fwht table") {
    const SeriesSpec one = SeriesSpec::constant(2);
    for (const Rational& v : fwht_table(one, 3)) CHECK(v == 1);
    const Rational a(2, 3), b(-5, 7);
    const SeriesSpec s(1, 1, {{{0}, a}, {{1}, b}});
    const auto t = fwht_table(s, 1);
    REQUIRE(t.size() == 2);
    CHECK(t[0] == a + b);
    CHECK(t[1] == a - b);
    std::mt19937_64 rng(6);
    for (unsigned k = 0; k <= 4; ++k) {
        const auto c = oracle::random_coeffs(rng, 2, k, 0.7);
        const SeriesSpec series(2, k, c);
        const auto table = fwht_table(series, k);
        const auto lvl = oracle::quasimeasure_level(c, 2, k);
        REQUIRE(table.size() == lvl.size());
        for (std::size_t f = 0; f < table.size(); ++f) CHECK(table[f] == lvl[f] * Rational(pow2(2 * k)));
    }
    const SeriesSpec big(2, 5, oracle::random_coeffs(rng, 2, 5, 0.3));
    const auto t5 = fwht_table(big, 5);
    for (uint64_t f = 0; f < t5.size(); f += 37) {
        const DyadicCube cube = DyadicCube::from_flat(5, 2, f);
        CHECK(t5[f] == oracle::partial_sum(big.coefficients(), {32, 32}, cube.corner()));
    }
    const SeriesSpec trunc(1, 2, {{{1}, Rational(1)}}, true);
    CHECK_THROWS_WITH(fwht_table(trunc, 3), doctest::Contains("missing coefficients"));
}

TEST_CASE("hadamard transform matches definition") {
    std::vector<long> a{1, 2, 3, 4, 5, 6, 7, 8};
    const auto orig = a;
    hadamard_transform(a, 1, 3);
    for (uint64_t u = 0; u < 8; ++u) {
        long s = 0;
        for (uint64_t n = 0; n < 8; ++n) s += orig[n] * (parity(u & n) ? -1 : 1);
        CHECK(a[u] == s);
    }
}
