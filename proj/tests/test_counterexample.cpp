#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracle.hpp"

#include "dyadic/counterexample.hpp"

#include <random>

using namespace dyadic;

namespace {

// Coefficient table written out from the case formula.
Rational table_coefficient(const IndexSequence& idx, const GrowthSchedule& sched, uint64_t a, uint64_t b) {
    for (std::size_t s = 0; s < idx.n.size(); ++s) {
        if (b != idx.n[s]) continue;
        uint64_t L = 1;
        while (2 * L <= b) L *= 2;
        if (a >= L && 2 * a <= L + b - 1) return sched.d[s];
        if (2 * a >= L + b + 1 && a <= b) return -sched.d[s];
        return 0;
    }
    return 0;
}

}  // namespace

TEST_CASE("first column") {
    const IndexSequence idx = default_index_sequence(1);
    const GrowthSchedule sched = default_schedule(1);
    REQUIRE(idx.n == std::vector<uint64_t>{3});
    CHECK(idx.next == 15);
    const SeriesSpec s = build_theorem8_series(idx, sched);
    CHECK(s.bound_rank() == 3);
    CHECK(s.coefficient({2, 3}) == 1);
    CHECK(s.coefficient({3, 3}) == -1);
    for (uint64_t a = 0; a < 8; ++a)
        if (a != 2 && a != 3) CHECK(s.coefficient({a, 3}) == 0);
    const ColumnHalves h = column_halves(3);
    CHECK(h.L == 2);
    CHECK(h.mid == 3);
    CHECK(h.n == 3);
}

TEST_CASE("default instance coefficient table") {
    const IndexSequence idx = default_index_sequence(4);
    const GrowthSchedule sched = default_schedule(4);
    CHECK(idx.n == std::vector<uint64_t>{3, 15, 63, 255});
    CHECK(idx.m == std::vector<unsigned>{2, 4, 6, 8});
    CHECK(idx.next == 1023);
    const SeriesSpec s = build_theorem8_series(idx, sched);
    CHECK(s.bound_rank() == 9);
    bool ok = true;
    for (uint64_t a = 0; a < 512; ++a)
        for (uint64_t b = 0; b < 512; ++b) ok = ok && s.coefficient({a, b}) == table_coefficient(idx, sched, a, b);
    CHECK(ok);
    for (std::size_t j = 0; j < 4; ++j) {
        Rational col = 0;
        int nonzero = 0;
        for (uint64_t a = 0; a < 512; ++a) {
            col += s.coefficient({a, idx.n[j]});
            nonzero += s.coefficient({a, idx.n[j]}) != 0;
        }
        CHECK(col == 0);
        CHECK(nonzero == static_cast<int>(idx.n[j] + 1) / 2);
        CHECK(s.coefficient({idx.n[j], idx.n[j]}) == -sched.d[j]);
    }
    CHECK_THROWS_WITH(s.coefficient({0, 512}), doctest::Contains("missing coefficients"));
}

TEST_CASE("validation") {
    IndexSequence idx{{5}, {2}, 15};
    CHECK_THROWS_AS(validate(idx, default_schedule(1)), std::invalid_argument);
    idx = {{3, 15}, {2, 4}, 63};
    GrowthSchedule sched = default_schedule(2);
    CHECK_NOTHROW(validate(idx, sched));
    sched.d[1] = 0;
    CHECK_THROWS(validate(idx, sched));
    CHECK_THROWS(validate({{15, 3}, {4, 2}, 63}, default_schedule(2)));
    CHECK_THROWS(column_halves(4));
    // Other admissible sequences.
    CHECK_THROWS(column_halves(1));
    const IndexSequence alt{{3, 7, 31}, {2, 3, 5}, 127};
    GrowthSchedule gs{{Rational(1), Rational(2), Rational(1, 2)}, {Rational(3), Rational(-1), Rational(5)}};
    const SeriesSpec s = build_theorem8_series(alt, gs);
    for (uint64_t a = 0; a < 64; ++a)
        for (uint64_t b = 0; b < 64; ++b) CHECK(s.coefficient({a, b}) == table_coefficient(alt, gs, a, b));
}

TEST_CASE("closed form against direct summation") {
    const IndexSequence idx = default_index_sequence(4);
    const GrowthSchedule sched = default_schedule(4);
    const SeriesSpec s = build_theorem8_series(idx, sched);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 60; ++i) {
        const DyadicPoint g = oracle::random_point(rng, 2, 10);
        for (uint64_t N : {1u, 3u, 4u, 5u, 16u, 40u, 64u, 100u, 200u, 256u, 300u, 512u}) {
            const Rational direct = oracle::partial_sum(s.coefficients(), {N, N}, g);
            CHECK(theorem8_closed_form(idx, sched, N, g) == direct);
            if (N <= 256) CHECK(s.partial_sum_cube(N, g) == direct);
        }
    }
}

TEST_CASE("origin vanishing and stabilization") {
    const IndexSequence idx = default_index_sequence(4);
    const GrowthSchedule sched = default_schedule(4);
    const SeriesSpec s = build_theorem8_series(idx, sched);
    // S_4(0, g2) = 0 at every rank-8 g2.
    for (uint64_t b = 0; b < 256; ++b) {
        const DyadicPoint g({DyadicElement::zero(), DyadicElement::from_bits(b, 8)});
        CHECK(s.partial_sum_rect({4, 4}, g) == 0);
        for (uint64_t N = 16; N <= 63; N += 7) CHECK(theorem8_closed_form(idx, sched, N, g) == 0);
    }
    // g1 = e_0: constant once N > 3.
    std::mt19937_64 rng(2);
    for (int i = 0; i < 30; ++i) {
        const DyadicPoint g({DyadicElement::unit(0), oracle::random_element(rng, 9)});
        const Rational v = theorem8_closed_form(idx, sched, 4, g);
        for (uint64_t N = 4; N <= 512; ++N) CHECK(theorem8_closed_form(idx, sched, N, g) == v);
    }
}

TEST_CASE("verification report") {
    const IndexSequence idx = default_index_sequence(4);
    const GrowthSchedule sched = default_schedule(4);
    const SeriesSpec s = build_theorem8_series(idx, sched);
    CounterexampleOptions opt;
    opt.samples = 200;
    const CounterexampleReport r = verify_counterexample(s, idx, sched, opt);
    CHECK(r.ok());
    CHECK(r.origin_points == 512);
    REQUIRE(r.growth.size() == 4);
    for (unsigned j = 0; j < 4; ++j) {
        CHECK(r.growth[j].s == j + 1);
        CHECK(r.growth[j].ratio == j + 1);
    }
    REQUIRE(r.stabilization.size() == 4);
    CHECK(r.stabilization[0].q == 1);
    CHECK(r.stabilization[0].J == 1);
    for (const auto& row : r.stabilization) CHECK(row.onset <= row.bound);
    const auto j = to_json(r);
    CHECK(j.at("ok").get<bool>());
    const std::string csv = growth_csv(r);
    CHECK(csv.rfind("s,n_s,d_s,ratio\n", 0) == 0);
    CHECK(csv.find("4,255,4,4") != std::string::npos);
    opt.N_max = 2000;
    CHECK_THROWS(verify_counterexample(s, idx, sched, opt));
}

TEST_CASE("cantor lebesgue probes") {
    const IndexSequence idx = default_index_sequence(4);
    const GrowthSchedule sched = default_schedule(4);
    const SeriesSpec s = build_theorem8_series(idx, sched);
    std::vector<uint64_t> powers;
    for (unsigned j = 0; j <= 8; ++j) powers.push_back(uint64_t{1} << j);
    const ProbeReport p = cantor_lebesgue_probe(s, powers, 1);
    CHECK(p.all_zero);
    for (const auto& row : p.rows) {
        CHECK(row.popcount == 1);
        CHECK(row.coefficient == 0);
    }
    CHECK_THROWS(cantor_lebesgue_probe(s, idx.n, 1));
    const ProbeReport contrast = cantor_lebesgue_probe(s, idx.n, std::nullopt);
    CHECK_FALSE(contrast.all_zero);
    CHECK(contrast.max_abs == 4);
    for (std::size_t j = 0; j < 4; ++j) CHECK(abs(contrast.rows[j].coefficient) == sched.d[j]);
    CHECK_FALSE(contrast.assumption.empty());
    // A finite series has a zero tail past its support.
    const SeriesSpec finite(2, 2, {{{1, 1}, Rational(2)}, {{2, 2}, Rational(-1, 3)}});
    const ProbeReport f = cantor_lebesgue_probe(finite, {1, 2, 3}, 2);
    CHECK(f.rows[0].coefficient == 2);
    CHECK(f.tail_below(Rational(1, 3), 1));
    CHECK_FALSE(f.tail_below(Rational(1, 4), 1));
    CHECK(f.tail_below(0, 2));
    CHECK(to_json(f).at("rows").size() == 3);
}
