#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace dyadic {

using BigInt = mpz_class;
using Rational = mpq_class;

// Parses "p", "-p" or "p/q" into a canonical rational. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// Canonical text: "p" when the denominator is 1, "p/q" otherwise.
std::string to_string(const Rational& r);
std::string to_string(const BigInt& n);

BigInt pow2(unsigned k);
Rational pow2_rational(int k);

// Number of bits needed to represent v (0 for v == 0).
inline unsigned bit_length(uint64_t v) {
    return v == 0 ? 0u : 64u - static_cast<unsigned>(__builtin_clzll(v));
}

inline bool parity(uint64_t v) { return (__builtin_popcountll(v) & 1) != 0; }

inline uint64_t reverse_bits(uint64_t v, unsigned k) {
    uint64_t r = 0;
    for (unsigned t = 0; t < k; ++t) {
        r = (r << 1) | ((v >> t) & 1u);
    }
    return r;
}

bool fits_int64(const BigInt& n);

}  // namespace dyadic
