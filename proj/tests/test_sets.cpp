#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracle.hpp"

#include "dyadic/sets.hpp"

#include <random>

using namespace dyadic;

namespace {

DyadicElement E(const char* s) { return DyadicElement::parse(s); }
DyadicPoint P(const char* s) { return DyadicPoint::parse(s); }
const DyadicElement e0 = DyadicElement::unit(0);

SetPtr d0() { return make_diagonal(Partition::with_lower(2, {})); }
SetPtr anti() { return make_coset(d0(), P("0|0,1|1")); }

std::vector<SetPtr> families() {
    return {
        make_whole(2),
        make_empty(2),
        d0(),
        anti(),
        make_shifted_diagonal(Partition::with_lower(2, {}), {0, 1}),
        make_coordinate_plane(Partition::with_lower(2, {1})),
        make_coset(make_coordinate_plane(Partition::with_lower(2, {0})), P("0|0,01|0")),
        make_dirichlet(2, {{1, 2}, {3, 0}, {5, 6}}),
        make_power_dirichlet({0, 2}),
        make_power_product(2, 1),
        make_union({d0(), anti()}, 6),
        make_lukomskii(2, 3),
    };
}

int pixel(const Bitmap& b, std::size_t col, std::size_t row) { return b.pixels[row * b.width + col]; }

}  // namespace

TEST_CASE("membership examples") {
    CHECK(contains(*d0(), DyadicPoint({e0, e0})));
    CHECK_FALSE(contains(*d0(), DyadicPoint({e0, DyadicElement::unit(1)})));
    const SetPtr p1 = make_coordinate_plane(Partition::with_lower(2, {1}));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        CHECK(contains(*p1, DyadicPoint({DyadicElement::zero(), oracle::random_element(rng, 12)})));
        CHECK(contains(*make_whole(2), oracle::random_point(rng, 2, 6)));
        CHECK_FALSE(contains(*make_empty(2), oracle::random_point(rng, 2, 6)));
    }
    CHECK_FALSE(contains(*p1, DyadicPoint({DyadicElement::unit(5), DyadicElement::zero()})));
    // Q_{0,(0,1)}: g2_k = g1_{k+1}, digits enumerated at rank 8.
    const SetPtr q = make_shifted_diagonal(Partition::with_lower(2, {}), {0, 1});
    for (uint64_t b = 0; b < 512; ++b) {
        std::vector<int> g1(9), g2(8);
        for (unsigned t = 0; t < 9; ++t) g1[t] = (b >> t) & 1u;
        for (unsigned t = 0; t < 8; ++t) g2[t] = g1[t + 1];
        const DyadicPoint g({oracle::element(g1, false), oracle::element(g2, false)});
        CHECK(contains(*q, g));
        CHECK(contract_eq(g[1], 0, g[0], 1));
        g2[b % 8] ^= 1;
        CHECK_FALSE(contains(*q, DyadicPoint({oracle::element(g1, false), oracle::element(g2, false)})));
    }
    CHECK_THROWS(contains(*d0(), DyadicPoint::zero(3)));
    CHECK_THROWS(contains(*make_external(2), DyadicPoint::zero(2)));
}

TEST_CASE("undetermined resolves at full rank") {
    const DyadicPoint g({e0, E("1001|0")});
    CHECK(membership(*d0(), g, 1) == Membership::Undetermined);
    CHECK(membership(*d0(), g, 4) == Membership::Out);
    CHECK(membership(*d0(), DyadicPoint({e0, E("1|0")}), 0) == Membership::Undetermined);
    CHECK(membership(*d0(), DyadicPoint({e0, E("0|0")}), 0) == Membership::Undetermined);
    CHECK(membership(*d0(), DyadicPoint({e0, E("0|0")}), 1) == Membership::Out);
    CHECK(membership(*make_whole(2), g, 0) == Membership::In);
    CHECK(to_string(Membership::Undetermined) != to_string(Membership::In));
    // An incomplete Dirichlet list cannot certify membership.
    const SetPtr part = make_dirichlet(1, {{1}}, false);
    CHECK(membership(*part, DyadicPoint({E("0|0")}), 4) == Membership::Undetermined);
    CHECK(membership(*part, DyadicPoint({E("1|0")}), 4) == Membership::Out);
}

TEST_CASE("membership monotone in rank") {
    std::mt19937_64 rng(2);
    for (const auto& s : families()) {
        for (int i = 0; i < 60; ++i) {
            const DyadicPoint g = (i % 2 && s->d == 2 && !std::holds_alternative<EmptySet>(s->body))
                                      ? sample_point(*s, 8, rng)
                                      : oracle::random_point(rng, 2, 8);
            std::optional<Membership> decided;
            for (unsigned r = 0; r <= g.rank(); ++r) {
                const Membership m = membership(*s, g, r);
                if (decided) CHECK(m == *decided);
                else if (m != Membership::Undetermined) decided = m;
            }
        }
    }
}

TEST_CASE("sampled points belong to the set") {
    std::mt19937_64 rng(3);
    for (const auto& s : families()) {
        if (std::holds_alternative<EmptySet>(s->body)) {
            CHECK_THROWS(sample_point(*s, 4, rng));
            continue;
        }
        for (int i = 0; i < 30; ++i) CHECK(contains(*s, sample_point(*s, 6, rng)));
    }
}

TEST_CASE("coset law") {
    std::mt19937_64 rng(4);
    for (const auto& s : families()) {
        for (int i = 0; i < 40; ++i) {
            const DyadicPoint x = oracle::random_point(rng, 2, 7);
            const SetPtr c = make_coset(s, x);
            const DyadicPoint g = i % 2 && !std::holds_alternative<EmptySet>(s->body)
                                      ? add(sample_point(*s, 7, rng), x)
                                      : oracle::random_point(rng, 2, 7);
            CHECK(contains(*c, g) == contains(*s, add(g, x)));
            CHECK(contains(*make_coset(c, x), g) == contains(*s, g));
            CHECK(contains(*make_coset(s, DyadicPoint::zero(2)), g) == contains(*s, g));
        }
    }
    CHECK_THROWS(make_coset(d0(), DyadicPoint::zero(3)));
    // The anti-diagonal: g2 = g1 + all ones.
    CHECK(contains(*anti(), DyadicPoint({E("0|0"), E("1|1")})));
    CHECK_FALSE(contains(*anti(), DyadicPoint({E("0|0"), E("0|1")})));
    CHECK(contains(*anti(), DyadicPoint({E("011|0"), E("100|1")})));
    CHECK_FALSE(contains(*anti(), DyadicPoint({E("0|0"), E("0|0")})));
}

TEST_CASE("subset examples") {
    SearchOptions opt;
    // D_0 inside D_1 and D_1 inside WD^2(2^N 1) x G in G^3.
    const SetPtr D0 = make_diagonal(Partition::with_lower(3, {}));
    const SetPtr D1 = make_diagonal(Partition::with_lower(3, {2}));
    const SetCheck a = subset_check(*D0, *D1, 4, opt);
    CHECK(a.holds);
    CHECK(a.exhaustive);
    const SetCheck b = subset_check(*D1, *make_power_product(3, 1), 4, opt);
    CHECK(b.holds);
    CHECK(b.exhaustive);
    CHECK(b.points > 0);
    const SetCheck c = subset_check(*D1, *D0, 4, opt);
    CHECK_FALSE(c.holds);
    REQUIRE(c.witness);
    CHECK(contains(*D1, *c.witness));
    CHECK_FALSE(contains(*D0, *c.witness));
    // Large rank falls back to sampling.
    const SetCheck s = subset_check(*D0, *D1, 12, opt);
    CHECK(s.holds);
    CHECK_FALSE(s.exhaustive);
}

TEST_CASE("power Dirichlet set equals a shifted diagonal") {
    const Partition none = Partition::with_lower(2, {});
    for (unsigned q = 0; q <= 3; ++q) {
        const SetPtr cor = make_power_dirichlet({0, static_cast<int>(q)});
        const SetPtr shifted = make_shifted_diagonal(none, {q, 0});
        CHECK(subset_check(*cor, *shifted, 8).holds);
        CHECK(subset_check(*shifted, *cor, 8).holds);
        // The condition R_{i}(g1) R_{i+q}(g2) = 1 digit by digit.
        std::mt19937_64 rng(5 + q);
        for (int i = 0; i < 200; ++i) {
            const DyadicPoint g = oracle::random_point(rng, 2, 8);
            bool all = true;
            for (unsigned t = 0; t + q < 40; ++t) all = all && g[0].digit(t) == g[1].digit(t + q);
            CHECK(contains(*cor, g) == all);
        }
        if (q > 0) {
            const SetCheck other = subset_check(*cor, *make_shifted_diagonal(none, {0, q}), 8);
            CHECK_FALSE(other.holds);
            REQUIRE(other.witness);
            CHECK(contains(*cor, *other.witness));
        }
    }
}

TEST_CASE("Dirichlet sets are subgroups") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 5; ++t) {
        std::vector<Index> N;
        for (int i = 0; i < 3; ++i) N.push_back({rng() % 16, rng() % 16});
        const SetPtr s = make_dirichlet(2, N);
        std::vector<DyadicPoint> in;
        for (uint64_t b = 0; b < 256; ++b) {
            const DyadicPoint g({DyadicElement::from_bits(b >> 4, 4), DyadicElement::from_bits(b & 15, 4)});
            bool expect = true;
            for (const auto& n : N) expect = expect && oracle::walsh(n, g) == 1;
            CHECK(contains(*s, g) == expect);
            if (expect) in.push_back(g);
        }
        CHECK(contains(*s, DyadicPoint::zero(2, 4)));
        for (const auto& g : in)
            for (const auto& h : in) CHECK(contains(*s, add(g, h)));
    }
}

TEST_CASE("pairwise disjoint") {
    const SetCheck da = pairwise_disjoint({d0(), anti()}, 6);
    CHECK(da.holds);
    CHECK(pairwise_disjoint({d0(), anti()}, 3).holds);
    const SetCheck self = pairwise_disjoint({d0(), d0()}, 4);
    CHECK_FALSE(self.holds);
    REQUIRE(self.witness);
    CHECK(contains(*d0(), *self.witness));
    // The two lines of a cross share (eta, xi).
    const DyadicElement eta = E("101|0"), xi = E("011|0");
    const SetPtr l1 = make_coset(make_coordinate_plane(Partition::with_lower(2, {1})), DyadicPoint({eta, E("0|0")}));
    const SetPtr l2 = make_coset(make_coordinate_plane(Partition::with_lower(2, {0})), DyadicPoint({E("0|0"), xi}));
    const SetCheck cross = pairwise_disjoint({l1, l2}, 4);
    CHECK_FALSE(cross.holds);
    REQUIRE(cross.witness);
    CHECK(*cross.witness == DyadicPoint({eta, xi}));
    CHECK_NOTHROW(make_union({d0(), anti()}, 5));
    CHECK_THROWS(make_union({d0(), d0()}, 4));
}

TEST_CASE("rasterize examples") {
    const Bitmap diag = rasterize(*d0(), 3);
    CHECK(diag.width == 8);
    CHECK(diag.height == 8);
    int set = 0;
    for (std::size_t col = 0; col < 8; ++col)
        for (std::size_t row = 0; row < 8; ++row) {
            const bool want = row == 7 - col;
            CHECK(pixel(diag, col, row) == (want ? 255 : 0));
            set += pixel(diag, col, row) == 255;
        }
    CHECK(set == 8);
    const Bitmap a = rasterize(*anti(), 3);
    for (std::size_t col = 0; col < 8; ++col)
        for (std::size_t row = 0; row < 8; ++row) CHECK(pixel(a, col, row) == (row == col ? 255 : 0));
    // P_1 coset with x^1 = t_+ of 1/2.
    const SetPtr p = make_coset(make_coordinate_plane(Partition::with_lower(2, {1})), P("1|0,0|0"));
    const Bitmap column = rasterize(*p, 3);
    for (std::size_t col = 0; col < 8; ++col)
        for (std::size_t row = 0; row < 8; ++row) CHECK(pixel(column, col, row) == (col == 4 ? 255 : 0));
    const Bitmap whole = rasterize(*make_whole(2), 4);
    for (auto v : whole.pixels) CHECK(v == 255);
    for (auto v : rasterize(*make_empty(2), 4).pixels) CHECK(v == 0);
    // Incomplete Dirichlet lists leave cells undetermined.
    const Bitmap und = rasterize(*make_dirichlet(2, {{1, 1}}, false), 2);
    CHECK(pixel(und, 0, 3) == 128);
    CHECK(pixel(und, 3, 3) == 0);
    CHECK_THROWS(rasterize(*make_diagonal(Partition::with_lower(3, {})), 3, P("0|0,0|0")));
    // Slices through G^3 default to zero trailing coordinates.
    const SetPtr D3 = make_diagonal(Partition::with_lower(3, {}));
    CHECK(rasterize(*D3, 3).pixels == rasterize(*D3, 3, P("0|0")).pixels);
    int d3 = 0;
    for (auto v : rasterize(*D3, 3).pixels) d3 += v == 255;
    CHECK(d3 == 1);
}

TEST_CASE("rasterizer determinism and PGM") {
    const SetPtr s = make_lukomskii(2, 3);
    const Bitmap one = rasterize(*s, 5, {}, 1), four = rasterize(*s, 5, {}, 4);
    CHECK(one.pixels == four.pixels);
    CHECK(to_pgm(one) == to_pgm(rasterize(*s, 5)));
    const std::string pgm = to_pgm(rasterize(*d0(), 2));
    CHECK(pgm.rfind("P5\n4 4\n255\n", 0) == 0);
    CHECK(pgm.size() == 11 + 16);
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("set masks") {
    const SupportMask m = set_mask(*d0(), 3);
    CHECK(m.count() == 8);
    for (const auto& c : m.list()) CHECK(c.m[0] == c.m[1]);
    CHECK(set_mask(*make_whole(2), 2).count() == 16);
    CHECK(set_mask(*make_empty(2), 2).count() == 0);
}

TEST_CASE("lukomskii layer") {
    const SetPtr s = make_lukomskii(2, 3);
    const auto& layer = std::get<LukomskiiLayer>(s->body);
    CHECK(layer.default_pairing);
    // 2 x 4 rectangles paired with N = 2, 3, ..., 9.
    REQUIRE(layer.pieces.size() == 8);
    CHECK(layer.pieces.front().N == 2);
    CHECK(layer.pieces.back().N == 9);
    CHECK_THROWS(make_lukomskii(0, 3));
    CHECK_THROWS(make_lukomskii(2, 3, {{5, 0, 2}}));
}

TEST_CASE("set json round trip") {
    std::mt19937_64 rng(7);
    for (const auto& s : families()) {
        const SetPtr back = set_from_json(set_to_json(*s));
        CHECK(describe(*back) == describe(*s));
        CHECK(set_to_json(*back) == set_to_json(*s));
        for (int i = 0; i < 20; ++i) {
            const DyadicPoint g = oracle::random_point(rng, 2, 6);
            CHECK(contains(*back, g) == contains(*s, g));
        }
    }
    CHECK_THROWS(set_from_json(nlohmann::json::parse(R"({"kind":"blob"})")));
    CHECK_THROWS(set_from_json(nlohmann::json::parse(R"({"d":2})")));
    CHECK_THROWS(make_diagonal(Partition::with_lower(2, {1})));
}
