#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracle.hpp"

#include "dyadic/series.hpp"

#include <cstdio>
#include <filesystem>
#include <random>

using namespace dyadic;

namespace {

Rational ratio(const BigInt& a, const BigInt& b) {
    Rational r(a, b);
    r.canonicalize();
    return r;
}

}  // namespace

TEST_CASE("partial sum examples") {
    std::mt19937_64 rng(1);
    const SeriesSpec s(2, 2, {{{0, 0}, Rational(3, 4)}, {{1, 0}, Rational(1)}, {{2, 3}, Rational(-2)}});
    const DyadicPoint g = oracle::random_point(rng, 2, 6);
    CHECK(s.partial_sum_rect({1, 1}, g) == Rational(3, 4));
    CHECK(s.partial_sum_cube(1, g) == Rational(3, 4));
    const SeriesSpec one = SeriesSpec::constant(2);
    CHECK(one.partial_sum_rect({7, 3}, g) == 1);
    const SeriesSpec single(2, 1, {{{1, 0}, Rational(1)}});
    CHECK(single.partial_sum_rect({2, 1}, DyadicPoint({DyadicElement::unit(0), DyadicElement::zero()})) == -1);
    CHECK_THROWS(s.partial_sum_rect({0, 1}, g));
    CHECK_THROWS(s.partial_sum_rect({1}, g));
}

TEST_CASE("fast partial sums against the oracle") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 1 + t % 3;
        const auto c = oracle::random_coeffs(rng, d, 3, 0.5);
        const SeriesSpec s(d, 3, c);
        for (int i = 0; i < 20; ++i) {
            const DyadicPoint g = oracle::random_point(rng, d, 5);
            Index N(d);
            for (auto& v : N) v = 1 + rng() % 10;
            const Rational want = oracle::partial_sum(c, N, g);
            CHECK(s.partial_sum_rect(N, g) == want);
            CHECK(partial_sum_rect_naive(s, MultiIndex(N.begin(), N.end()), g) == want);
            CHECK(ratio(s.scaled_partial_sum(N, g), s.denominator()) == want);
            CHECK(s.partial_sum_rect_approx(N, g) == doctest::Approx(want.get_d()));
            CHECK(s.partial_sum_cube(3, g) == s.partial_sum_rect(Index(d, 3), g));
        }
    }
}

TEST_CASE("coefficient access and truncation") {
    const SeriesSpec finite(1, 2, {{{3}, Rational(5)}});
    CHECK(finite.coefficient({3}) == 5);
    CHECK(finite.coefficient({2}) == 0);
    CHECK(finite.coefficient({100}) == 0);
    const SeriesSpec trunc(1, 2, {{{3}, Rational(5)}}, true);
    CHECK(trunc.coefficient({2}) == 0);
    CHECK_THROWS_WITH(trunc.coefficient({4}), doctest::Contains("missing coefficients"));
    CHECK_THROWS_WITH(trunc.partial_sum_rect({5}, DyadicPoint::zero(1)), doctest::Contains("missing coefficients"));
    CHECK_NOTHROW(trunc.partial_sum_rect({4}, DyadicPoint::zero(1)));
    CHECK_THROWS(SeriesSpec(1, 2, {{{4}, Rational(1)}}));
    CHECK_THROWS(SeriesSpec(2, 2, {{{1}, Rational(1)}}));
}

TEST_CASE("scaled blocks") {
    std::mt19937_64 rng(3);
    const auto c = oracle::random_coeffs(rng, 2, 2, 0.8);
    const SeriesSpec s(2, 2, c);
    const auto big = s.scaled_block(2);
    REQUIRE(big.size() == 16);
    for (uint64_t a = 0; a < 4; ++a)
        for (uint64_t b = 0; b < 4; ++b) CHECK(ratio(big[a * 4 + b], s.denominator()) == s.coefficient({a, b}));
    if (s.small_numerators()) {
        const auto small = s.scaled_block_i64(2);
        for (std::size_t i = 0; i < 16; ++i) CHECK(BigInt(static_cast<long>(small[i])) == big[i]);
    }
}

TEST_CASE("json round trip") {
    std::mt19937_64 rng(4);
    RandomSeriesOptions opt;
    opt.d = 2;
    opt.bound_rank = 3;
    opt.density = 0.5;
    const SeriesSpec s = random_series(opt, rng);
    const auto j = series_to_json(s);
    const SeriesSpec back = series_from_json(j);
    CHECK(back.coefficients() == s.coefficients());
    CHECK(back.bound_rank() == 3);
    const auto path = (std::filesystem::temp_directory_path() / "dyadic_series_test.json").string();
    save_series(s, path);
    CHECK(load_series(path).coefficients() == s.coefficients());
    std::remove(path.c_str());
    const auto parsed = series_from_json(nlohmann::json::parse(R"({"d":1,"coeffs":[{"n":[1],"c":"-3/6"}],"bound_rank":1})"));
    CHECK(parsed.coefficient({1}) == Rational(-1, 2));
    CHECK_THROWS(series_from_json(nlohmann::json::parse(R"({"d":1,"coeffs":[{"n":[1],"c":"x"}],"bound_rank":1})")));
    CHECK_THROWS(series_from_json(nlohmann::json::parse(R"({"d":1})")));
}

TEST_CASE("random series determinism") {
    RandomSeriesOptions opt;
    opt.d = 3;
    opt.bound_rank = 2;
    opt.density = 0.4;
    std::mt19937_64 a(9), b(9);
    CHECK(random_series(opt, a).coefficients() == random_series(opt, b).coefficients());
    std::mt19937_64 r(10);
    const SeriesSpec on = random_series_on(2, 3, {{1, 2}, {1, 2}, {7, 0}}, r);
    CHECK(on.coefficients().size() <= 2);
    for (const auto& [n, c] : on.coefficients()) CHECK(c != 0);
}
