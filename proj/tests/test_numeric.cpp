#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dyadic/numeric.hpp"

using namespace dyadic;

TEST_CASE("rational literals") {
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("-3/6") == Rational(-1, 2));
    CHECK(parse_rational("+4/2") == Rational(2));
    CHECK(to_string(parse_rational("6/4")) == "3/2");
    CHECK(to_string(parse_rational("-0/5")) == "0");
    CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/-2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("/3"), std::invalid_argument);
}

TEST_CASE("powers and bits") {
    CHECK(pow2(0) == 1);
    CHECK(pow2(70) == BigInt("1180591620717411303424"));
    CHECK(pow2_rational(-3) == Rational(1, 8));
    CHECK(pow2_rational(2) == Rational(4));
    CHECK(bit_length(0) == 0);
    CHECK(bit_length(1) == 1);
    CHECK(bit_length(255) == 8);
    CHECK(bit_length(256) == 9);
    CHECK(parity(7));
    CHECK_FALSE(parity(5));
    CHECK(reverse_bits(0b011, 3) == 0b110);
    CHECK(reverse_bits(1, 8) == 128);
    for (uint64_t v = 0; v < 64; ++v) CHECK(reverse_bits(reverse_bits(v, 6), 6) == v);
    CHECK(fits_int64(BigInt("9223372036854775807")));
    CHECK_FALSE(fits_int64(BigInt("9223372036854775808")));
}
