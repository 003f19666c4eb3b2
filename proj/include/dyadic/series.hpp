#pragma once

// Multiple Walsh series with exact rational coefficients and their partial sums.

#include "dyadic/group.hpp"
#include "dyadic/numeric.hpp"
#include "dyadic/walsh.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace dyadic {

using Index = std::vector<uint64_t>;

class SeriesSpec {
public:
    // All listed indices must lie below 2^bound_rank in every coordinate.
    // A truncated series has unknown coefficients at or beyond 2^bound_rank;
    // a finite one is zero there.
    SeriesSpec(std::size_t d, unsigned bound_rank, std::map<Index, Rational> coeffs, bool truncated = false);

    static SeriesSpec constant(std::size_t d, const Rational& c0 = Rational(1));

    std::size_t dim() const { return d_; }
    unsigned bound_rank() const { return bound_rank_; }
    bool truncated() const { return truncated_; }
    const std::map<Index, Rational>& coefficients() const { return coeffs_; }
    Rational coefficient(const Index& n) const;

    // Throws "missing coefficients" when indices below 2^k 1 are not all known.
    void require_known_below(unsigned k) const;
    void require_known_below(const Index& N) const;

    // Common denominator of all coefficients and the scaled numerators.
    const BigInt& denominator() const { return den_; }

    Rational partial_sum_rect(const Index& N, const DyadicPoint& g) const;
    Rational partial_sum_cube(uint64_t N, const DyadicPoint& g) const;
    // Numerator of the partial sum over denominator().
    BigInt scaled_partial_sum(const Index& N, const DyadicPoint& g) const;
    double partial_sum_rect_approx(const Index& N, const DyadicPoint& g) const;

    // Dense block of scaled numerators for n < 2^k 1, row-major.
    std::vector<BigInt> scaled_block(unsigned k) const;
    bool small_numerators() const { return small_; }
    // Scaled block in 64-bit arithmetic; valid only when small_numerators().
    std::vector<int64_t> scaled_block_i64(unsigned k) const;
    // Upper bound on the sum of |scaled numerators|.
    const BigInt& scaled_l1() const { return l1_; }

private:
    struct Term {
        std::size_t offset;  // into idx_
        int64_t small;
        BigInt big;
    };
    std::size_t d_;
    unsigned bound_rank_;
    bool truncated_;
    std::map<Index, Rational> coeffs_;
    BigInt den_ = 1;
    BigInt l1_ = 0;
    bool small_ = true;
    std::vector<uint64_t> idx_;
    std::vector<Term> terms_;
};

// Naive partial sum straight from the definition, used to cross-check the fast path.
Rational partial_sum_rect_naive(const SeriesSpec& series, const MultiIndex& N, const DyadicPoint& g);

nlohmann::json series_to_json(const SeriesSpec& s);
SeriesSpec series_from_json(const nlohmann::json& j);
SeriesSpec load_series(const std::string& path);
void save_series(const SeriesSpec& s, const std::string& path);

struct RandomSeriesOptions {
    std::size_t d = 2;
    unsigned bound_rank = 3;
    // Probability that an index in the dense block gets a nonzero coefficient.
    double density = 1.0;
    int max_numerator = 9;
    int max_denominator = 9;
};

Rational random_rational(std::mt19937_64& rng, int max_numerator, int max_denominator);
SeriesSpec random_series(const RandomSeriesOptions& opt, std::mt19937_64& rng);
// Random coefficients on an explicit list of indices (duplicates ignored).
SeriesSpec random_series_on(std::size_t d, unsigned bound_rank, const std::vector<Index>& support,
                            std::mt19937_64& rng, int max_numerator = 9, int max_denominator = 9);

}  // namespace dyadic
