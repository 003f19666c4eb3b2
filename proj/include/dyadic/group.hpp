#pragma once

// Dyadic group G = product of Z/2 and its powers G^d.
//
// Digit index 0 is the coarsest digit. A rank-k interval with index m contains
// exactly the elements whose first k digits satisfy g_t = m_{k-1-t}, so the
// cube index is the bit reversal of the digit prefix.

#include "dyadic/numeric.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dyadic {

enum class Tail : uint8_t { AllZeros, AllOnes };

class DyadicElement {
public:
    DyadicElement();  // zero element of rank 1
    DyadicElement(const std::vector<uint8_t>& digits, Tail tail = Tail::AllZeros);

    static DyadicElement zero(std::size_t rank = 1);
    static DyadicElement all_ones(std::size_t rank = 1);
    // e_k: digit k is one, all others zero.
    static DyadicElement unit(std::size_t k);
    // Low `rank` bits of `bits` give digits 0..rank-1.
    static DyadicElement from_bits(uint64_t bits, std::size_t rank, Tail tail = Tail::AllZeros);
    // Text form "0110|0": digits then tail bit.
    static DyadicElement parse(std::string_view text);

    std::size_t rank() const { return rank_; }
    Tail tail() const { return tail_; }
    bool tail_bit() const { return tail_ == Tail::AllOnes; }
    bool digit(std::size_t t) const;
    // Digits 64w .. 64w+63 with the tail materialized.
    uint64_t word(std::size_t w) const;
    // Digits 0..min(rank,64)-1 as bits, tail digits included up to bit 63.
    uint64_t low_word() const { return word(0); }

    // Same stream at a larger rank (tail digits written out).
    DyadicElement extended(std::size_t rank) const;
    // Digits below k kept, digits >= k replaced by the given tail.
    DyadicElement truncated(std::size_t k, Tail tail = Tail::AllZeros) const;

    bool is_zero() const;
    std::string str() const;

    friend bool operator==(const DyadicElement& a, const DyadicElement& b);
    friend bool operator!=(const DyadicElement& a, const DyadicElement& b) { return !(a == b); }
    friend DyadicElement operator^(const DyadicElement& a, const DyadicElement& b);

private:
    std::vector<uint64_t> words_;
    std::size_t rank_ = 1;
    Tail tail_ = Tail::AllZeros;
};

class DyadicPoint {
public:
    DyadicPoint() = default;
    explicit DyadicPoint(std::vector<DyadicElement> components);

    static DyadicPoint zero(std::size_t d, std::size_t rank = 1);
    // Comma-separated element literals, e.g. "01|0,1|1".
    static DyadicPoint parse(std::string_view text);

    std::size_t dim() const { return comps_.size(); }
    std::size_t rank() const { return comps_.empty() ? 0 : comps_.front().rank(); }
    const DyadicElement& operator[](std::size_t l) const { return comps_[l]; }
    const std::vector<DyadicElement>& components() const { return comps_; }
    DyadicPoint extended(std::size_t rank) const;
    std::string str() const;

    friend bool operator==(const DyadicPoint& a, const DyadicPoint& b);
    friend bool operator!=(const DyadicPoint& a, const DyadicPoint& b) { return !(a == b); }

private:
    std::vector<DyadicElement> comps_;
};

// Componentwise XOR; ranks reconciled to the maximum. Throws on dimension mismatch.
DyadicPoint add(const DyadicPoint& g, const DyadicPoint& h);
inline DyadicElement add(const DyadicElement& g, const DyadicElement& h) { return g ^ h; }

struct DyadicCube {
    unsigned k = 0;
    std::vector<uint64_t> m;

    std::size_t dim() const { return m.size(); }
    // Row-major flat index, coordinate 0 most significant.
    uint64_t flat() const;
    static DyadicCube from_flat(unsigned k, std::size_t d, uint64_t flat);
    // Text form "k:m1,m2".
    static DyadicCube parse(std::string_view text);
    std::string str() const;
    // Representative element of coordinate l: the prefix digits with zero tail.
    DyadicElement corner(std::size_t l) const;
    DyadicPoint corner() const;
    bool contains(const DyadicPoint& g) const;
    bool contains(const DyadicCube& other) const;

    friend bool operator==(const DyadicCube& a, const DyadicCube& b) { return a.k == b.k && a.m == b.m; }
    friend bool operator<(const DyadicCube& a, const DyadicCube& b) {
        return a.k != b.k ? a.k < b.k : a.m < b.m;
    }
};

// Index of the rank-k interval containing g: sum_t g_t 2^{k-1-t}.
uint64_t interval_index(const DyadicElement& g, unsigned k);
DyadicCube cube_of(const DyadicPoint& g, unsigned k);

// F(g) = sum g_t / 2^{t+1}, exact.
Rational to_unit_interval(const DyadicElement& g);

// Haar measure 2^{-kd}.
Rational measure(const DyadicCube& cube, std::size_t d);
Rational measure(unsigned k, std::size_t d);

// The 2^d children 2m + sigma, sigma enumerated with coordinate 0 as the high bit.
std::vector<DyadicCube> subdivide(const DyadicCube& cube);

// C_q(g) = C_p(h). With q <= p: g_k == h_{k+p-q} for every k, tails included.
// Arguments are swapped when q > p.
bool contract_eq(const DyadicElement& g, unsigned q, const DyadicElement& h, unsigned p);

class SignVector {
public:
    explicit SignVector(std::vector<uint8_t> entries);
    static SignVector from_mask(uint64_t mask, std::size_t d);

    std::size_t dim() const { return entries_.size(); }
    uint8_t operator[](std::size_t l) const { return entries_[l]; }
    bool even() const { return even_; }
    // e_k^sigma = (sigma_1 e_k, ..., sigma_d e_k).
    DyadicPoint shift(std::size_t k) const;

private:
    std::vector<uint8_t> entries_;
    bool even_ = true;
};

// Sigma^d in mask order; Sigma^d_2 keeps even |sigma| only.
std::vector<SignVector> all_sign_vectors(std::size_t d);
std::vector<SignVector> even_sign_vectors(std::size_t d);

}  // namespace dyadic
