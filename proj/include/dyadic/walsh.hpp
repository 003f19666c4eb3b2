#pragma once

// Walsh functions in Paley order, Rademacher functions and Dirichlet kernels.

#include "dyadic/group.hpp"
#include "dyadic/numeric.hpp"

#include <cstdint>
#include <vector>

namespace dyadic {

class SeriesSpec;

class Sign {
public:
    constexpr Sign() = default;
    static constexpr Sign from_parity(bool odd) { return Sign(odd); }
    constexpr int value() const { return negative_ ? -1 : 1; }
    constexpr bool negative() const { return negative_; }
    friend constexpr Sign operator*(Sign a, Sign b) { return Sign(a.negative_ != b.negative_); }
    friend constexpr bool operator==(Sign a, Sign b) { return a.negative_ == b.negative_; }
    friend constexpr bool operator!=(Sign a, Sign b) { return a.negative_ != b.negative_; }

private:
    constexpr explicit Sign(bool negative) : negative_(negative) {}
    bool negative_ = false;
};

class WalshIndex {
public:
    WalshIndex() = default;
    WalshIndex(uint64_t n) : n_(static_cast<unsigned long>(n)) {}  // NOLINT implicit on purpose
    explicit WalshIndex(BigInt n);

    const BigInt& value() const { return n_; }
    // Dyadic coefficient n_k.
    bool coefficient(unsigned k) const { return mpz_tstbit(n_.get_mpz_t(), k) != 0; }
    // #n, the number of nonzero dyadic coefficients.
    unsigned popcount() const { return static_cast<unsigned>(mpz_popcount(n_.get_mpz_t())); }
    unsigned bit_length() const;
    // Index of the lowest nonzero coefficient; requires n > 0.
    unsigned lowest_bit() const;
    bool is_zero() const { return n_ == 0; }
    bool fits_u64() const { return mpz_sizeinbase(n_.get_mpz_t(), 2) <= 64; }
    uint64_t to_u64() const;

    friend bool operator==(const WalshIndex& a, const WalshIndex& b) { return a.n_ == b.n_; }
    friend bool operator<(const WalshIndex& a, const WalshIndex& b) { return a.n_ < b.n_; }

private:
    BigInt n_ = 0;
};

using MultiIndex = std::vector<WalshIndex>;

Sign walsh_eval(const WalshIndex& n, const DyadicElement& g);
Sign walsh_eval(uint64_t n, const DyadicElement& g);
Sign walsh_eval_multi(const MultiIndex& n, const DyadicPoint& g);
Sign rademacher(unsigned k, const DyadicElement& g);

// Direct summation of W_0..W_{N-1}. Throws for N = 0.
BigInt dirichlet_naive(const WalshIndex& N, const DyadicElement& g);
// Binary-expansion closed form. Throws for N = 0.
BigInt dirichlet_closed(const WalshIndex& N, const DyadicElement& g);
BigInt dirichlet_multi(const MultiIndex& N, const DyadicPoint& g);
// Lowest set bit k_s of N; D_N vanishes off Delta_0^{(k_s)}. Throws for N = 0.
unsigned vanishing_rank(const WalshIndex& N);

// True iff digits 0..k-1 of g are zero, i.e. g lies in Delta_0^{(k)}.
bool in_zero_cube(const DyadicElement& g, unsigned k);

// S_{2^k}(Delta) for every rank-k cube, indexed by DyadicCube::flat().
// Requires the coefficients below 2^k 1 to be known.
std::vector<Rational> fwht_table(const SeriesSpec& series, unsigned k);

// In-place Walsh-Hadamard transform along every coordinate of a d-dimensional
// table with 2^k entries per side (row-major, coordinate 0 slowest). On return
// entry u holds sum_n a_n (-1)^{<u,n>} coordinatewise.
template <typename T>
void hadamard_transform(std::vector<T>& a, std::size_t d, unsigned k) {
    const std::size_t side = std::size_t{1} << k;
    std::size_t stride = 1;
    for (std::size_t axis = 0; axis < d; ++axis) {
        for (std::size_t h = 1; h < side; h <<= 1) {
            const std::size_t block = h * stride;
            for (std::size_t base = 0; base < a.size(); base += 2 * block) {
                for (std::size_t off = 0; off < block; ++off) {
                    T& x = a[base + off];
                    T& y = a[base + off + block];
                    T s = x + y;
                    y = x - y;
                    x = s;
                }
            }
        }
        stride *= side;
    }
}

}  // namespace dyadic
