#pragma once

// Quasimeasures on the dyadic cubes of G^d, the series <-> quasimeasure
// correspondence tau(Delta^(k)) = 2^{-kd} S_{2^k}(Delta^(k)), and the
// integrals and functionals evaluated against tau.

#include "dyadic/group.hpp"
#include "dyadic/numeric.hpp"
#include "dyadic/series.hpp"
#include "dyadic/walsh.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dyadic {

// Values sharing one denominator; numerators kept in 64 bits when they fit.
class RationalTable {
public:
    RationalTable() = default;
    RationalTable(std::vector<int64_t> nums, BigInt den);
    RationalTable(std::vector<BigInt> nums, BigInt den);
    static RationalTable from_values(const std::vector<Rational>& values);

    std::size_t size() const { return small_ ? small_nums_.size() : big_nums_.size(); }
    Rational get(std::size_t i) const;
    BigInt numerator(std::size_t i) const;
    bool small() const { return small_; }
    int64_t small_numerator(std::size_t i) const { return small_nums_[i]; }
    const BigInt& denominator() const { return den_; }
    bool is_zero(std::size_t i) const;

private:
    bool small_ = true;
    std::vector<int64_t> small_nums_;
    std::vector<BigInt> big_nums_;
    BigInt den_ = 1;
};

class Quasimeasure {
public:
    Quasimeasure() = default;
    // levels[k] holds the 2^{kd} values of rank k, indexed by DyadicCube::flat().
    Quasimeasure(std::size_t d, unsigned K, std::vector<RationalTable> levels);

    static Quasimeasure zero(std::size_t d, unsigned K);
    // Leaf values at rank K; coarser ranks are filled by summing children.
    static Quasimeasure from_leaves(std::size_t d, unsigned K, const std::vector<Rational>& leaves);
    // Arbitrary table, additivity not enforced.
    static Quasimeasure from_table(std::size_t d, unsigned K, const std::vector<std::vector<Rational>>& values);

    std::size_t dim() const { return d_; }
    unsigned max_rank() const { return K_; }
    Rational value(const DyadicCube& cube) const;
    Rational value(unsigned k, uint64_t flat) const { return levels_.at(k).get(flat); }
    const RationalTable& level(unsigned k) const { return levels_.at(k); }

private:
    std::size_t d_ = 1;
    unsigned K_ = 0;
    std::vector<RationalTable> levels_;
};

// Fast construction through the Walsh-Hadamard transform. Throws when the
// series does not determine the coefficients below 2^K 1.
Quasimeasure quasimeasure_from_series(const SeriesSpec& series, unsigned K);
// Direct construction from cubic partial sums at one point per cube.
Quasimeasure quasimeasure_from_series_naive(const SeriesSpec& series, unsigned K);

// Coefficient c_n recovered as sum over rank-K cubes of W_n(Delta) tau(Delta); n < 2^K 1.
Rational recover_coefficient(const Quasimeasure& tau, const Index& n);

struct AdditivityReport {
    bool ok = true;
    std::optional<DyadicCube> parent;
    Rational parent_value;
    Rational children_sum;
};
AdditivityReport check_additivity(const Quasimeasure& tau);

struct SupportMask {
    std::size_t d = 1;
    unsigned K = 0;
    std::vector<uint8_t> cells;  // indexed by flat rank-K cube index

    bool contains(const DyadicCube& cube) const;
    std::size_t count() const;
    std::vector<DyadicCube> list() const;
};
SupportMask support_mask(const Quasimeasure& tau);

// Product of dyadic intervals, one (rank, index) per coordinate.
struct Parallelepiped {
    std::vector<std::pair<unsigned, uint64_t>> sides;

    static Parallelepiped from_cube(const DyadicCube& cube);
    static Parallelepiped whole(std::size_t d);
    std::size_t dim() const { return sides.size(); }
    unsigned max_rank() const;
    std::string str() const;
};

// tau(P) as the sum over rank-r cubes inside P, r = max rank of P.
Rational tau_of(const Quasimeasure& tau, const Parallelepiped& P);

// Split {0..d-1} into lower coordinates (the m free ones, g_*) and upper ones (g^*).
struct Partition {
    std::size_t d = 2;
    std::vector<std::size_t> lower;
    std::vector<std::size_t> upper;

    static Partition with_lower(std::size_t d, std::vector<std::size_t> lower);
    std::size_t m() const { return lower.size(); }
};

Rational integrate_walsh(const Quasimeasure& tau, const Index& N, const Parallelepiped& P);

struct LocalizeResult {
    DyadicPoint xi;  // rank-k prefix on the lower coordinates
    Rational slab_value;
    Rational bound;  // |C| / 2^{m(k - k0)}
    std::vector<Rational> chain;  // slab values at ranks k0..k
};
// Greedy descent over the lower coordinates of cube delta. Throws when tau(delta) = 0
// or k is outside [rank(delta), K].
LocalizeResult localize_mass(const Quasimeasure& tau, const DyadicCube& delta, const Partition& part, unsigned k);

// 2^{mk} times the integral of R_{k1}(g^*) over (upper cube) x Delta^(k)(xi).
// upper_cube has one index per upper coordinate, xi one component per lower coordinate.
Rational rademacher_functional(const Quasimeasure& tau, unsigned k, const DyadicCube& upper_cube,
                               const DyadicPoint& xi, const Partition& part);

// Integral of W_{N 1} over delta.
Rational walsh_functional(const Quasimeasure& tau, uint64_t N, const DyadicCube& delta);

void write_quasimeasure_csv(const Quasimeasure& tau, std::ostream& out);
Quasimeasure read_quasimeasure_csv(std::istream& in);

}  // namespace dyadic
