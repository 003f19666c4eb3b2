#pragma once

// Finite-rank checks of kernel identities, partial-sum lemmas, the T_k
// decomposition and continuity functionals, plus the exact falsifier.

#include "dyadic/group.hpp"
#include "dyadic/quasimeasure.hpp"
#include "dyadic/series.hpp"
#include "dyadic/sets.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dyadic {

struct IdentityCell {
    nlohmann::json params;
    std::size_t checks = 0;
    std::size_t mismatches = 0;
    // First mismatch with both sides.
    std::string where;
    Rational lhs;
    Rational rhs;

    void record(const Rational& a, const Rational& b, const std::string& at);
};

struct IdentityReport {
    std::string name;
    nlohmann::json grid;
    std::vector<IdentityCell> cells;
    nlohmann::json info = nlohmann::json::object();
    uint64_t seed = 0;

    std::size_t checks() const;
    std::size_t mismatches() const;
    bool ok() const { return mismatches() == 0; }
    nlohmann::json to_json(bool all_cells = false) const;
};

uint64_t mix_seed(uint64_t seed, uint64_t index);

// Dirichlet kernels.
IdentityReport kernel_equivalence(uint64_t max_N, unsigned rank);
// D_{2^k + m} = D_{2^k} + R_k D_m, every kernel summed directly.
IdentityReport kernel_recursion(unsigned max_k, unsigned rank);
// D_N = 0 off Delta_0^{(k_s)}; info counts points where the one-larger cube reading fails.
IdentityReport kernel_vanishing(uint64_t max_N, unsigned rank);

// M1 = 2^{k_1} + ... + 2^{k_l}, k_1 > ... > k_l; M2 = M1 + r with r < 2^{k_l}.
struct Lemma1Result {
    Rational lhs;
    Rational rhs;
    bool equal = false;
};
std::vector<unsigned> binary_exponents(uint64_t M);
Lemma1Result lemma1_check(const SeriesSpec& series, const DyadicPoint& g, uint64_t M1, uint64_t M2);

struct Lemma1GridOptions {
    std::vector<std::size_t> dims{2, 3};
    unsigned max_l = 3;
    unsigned max_k1 = 5;
    std::vector<uint64_t> rs{0, 1};
    std::size_t series = 50;
    std::size_t points = 20;
    uint64_t seed = 1;
};
IdentityReport lemma1_grid(const Lemma1GridOptions& opt);

// E given as a rank-K mask inside a rank-s cube.
struct Lemma2Result {
    std::optional<unsigned> k0;  // smallest rank with a cube of density > 1 - 2^{-ld}
    std::optional<DyadicCube> dense_cube;
    std::optional<DyadicCube> point_cell;  // rank-K cell of a point satisfying the shifted condition
    std::size_t cells_tried = 0;
};
Lemma2Result lemma2_search(const SupportMask& E, unsigned s, unsigned l, const std::vector<unsigned>& ks);

// integrate_walsh(tau, N, P) against tau(P) when W_N = 1 on support(tau) inside P.
struct Lemma4Result {
    bool precondition = false;
    Rational integral;
    Rational tau_P;
};
Lemma4Result lemma4_check(const Quasimeasure& tau, const Index& N, const Parallelepiped& P);
IdentityReport lemma4_suite(std::size_t instances, uint64_t seed);

// eta holds the upper coordinates, xi the lower ones; requires s < k and K >= k+1.
struct TkResult {
    Rational kernel_integral;
    Rational decomposition;
    Rational coefficient_form;  // C
    Rational sigma_sum;         // T_k from partial sums at shifted points
    Rational extra;             // X
    bool ok = false;            // kernel == decomposition == C and T == 2^{d-m-1}(C + X)
    bool literal = false;       // T == 2^{d-m} C
};
TkResult tk_decomposition_check(const SeriesSpec& series, const Quasimeasure& tau, const DyadicPoint& eta,
                                const DyadicPoint& xi, unsigned k, unsigned s, const Partition& part);

struct TkGridOptions {
    std::vector<std::size_t> dims{2, 3};
    unsigned max_k = 4;
    unsigned max_s = 2;
    std::size_t series = 20;
    double density = 0.3;
    uint64_t seed = 1;
};
IdentityReport tk_grid(const TkGridOptions& opt);

struct TrendRow {
    uint64_t index = 0;  // k, or i for the Walsh mode
    uint64_t N = 0;      // N_i in the Walsh mode
    Rational value;
};
struct TrendReport {
    std::string mode;
    std::vector<TrendRow> rows;
    bool nonincreasing = true;  // |value| never grows
    std::optional<uint64_t> zero_from;  // first index after which every value is zero
    nlohmann::json to_json() const;
};
TrendReport rademacher_trend(const Quasimeasure& tau, const Partition& part, const DyadicCube& upper_cube,
                             const DyadicPoint& xi, const std::vector<unsigned>& ks);
// Throws when the lowest set bits of N_i are not nondecreasing with a larger last
// value, or when some #N_i exceeds max_popcount.
TrendReport walsh_trend(const Quasimeasure& tau, const std::vector<uint64_t>& N, const DyadicCube& delta,
                        unsigned max_popcount);

struct FalsifierConstraints {
    bool support = true;
    std::optional<unsigned> rademacher_max_k;
    std::vector<Partition> partitions;  // empty: every partition with m <= d-1
    std::vector<uint64_t> walsh_N;
    bool explicit_table = false;  // unknowns on every rank with additivity rows
};

struct FalsifierResult {
    std::string set;
    std::size_t d = 2;
    unsigned K = 0;
    std::size_t unknowns = 0;
    std::size_t equations = 0;
    std::size_t rank = 0;
    std::size_t dimension = 0;
    std::vector<Quasimeasure> basis;
    std::string label;
    nlohmann::json to_json() const;
};

extern const char* const kFalsifierLabel;

FalsifierResult uset_falsify(const SetSpec& E, unsigned K, const FalsifierConstraints& c, std::size_t max_basis = 4);

// Exact rank and nullspace of a sparse rational system.
class RationalEliminator {
public:
    explicit RationalEliminator(std::size_t columns);
    // Returns true when the row was independent of the rows before it.
    bool add_row(std::vector<std::pair<std::size_t, Rational>> row);
    std::size_t rank() const { return pivots_.size(); }
    std::size_t columns() const { return n_; }
    std::vector<std::vector<Rational>> nullspace(std::size_t max_vectors) const;

private:
    std::size_t n_;
    std::vector<std::vector<std::pair<std::size_t, Rational>>> rows_;
    std::vector<long> pivot_of_col_;  // row index or -1
    std::vector<std::size_t> pivots_;
};

}  // namespace dyadic
