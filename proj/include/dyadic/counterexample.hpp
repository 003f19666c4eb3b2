#pragma once

// Double Walsh series converging over squares everywhere while its diagonal
// coefficients grow, and Cantor-Lebesgue probes along diagonal indices.

#include "dyadic/group.hpp"
#include "dyadic/numeric.hpp"
#include "dyadic/series.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dyadic {

// n_s with dyadic coefficients 1 below m_s, s = 1..S, plus n_{S+1} which bounds the truncation.
struct IndexSequence {
    std::vector<uint64_t> n;
    std::vector<unsigned> m;
    uint64_t next = 0;
};

struct GrowthSchedule {
    std::vector<Rational> B;
    std::vector<Rational> d;
};

// n_s = 2^{2s} - 1, m_s = 2s, B_s = 1, d_s = s.
IndexSequence default_index_sequence(unsigned S);
GrowthSchedule default_schedule(unsigned S);

// Throws std::invalid_argument on inconsistent input.
void validate(const IndexSequence& idx, const GrowthSchedule& sched);

// Signed halves of column n_s: first index alpha in [L, (L+n_s-1)/2] gets d_s,
// alpha in [(L+n_s+1)/2, n_s] gets -d_s, L = 2^{floor(log2 n_s)}.
struct ColumnHalves {
    uint64_t L = 0;
    uint64_t mid = 0;  // first alpha of the negative half
    uint64_t n = 0;
};
ColumnHalves column_halves(uint64_t n_s);

// Truncated series with bound_rank floor(log2 n_{S+1}).
SeriesSpec build_theorem8_series(const IndexSequence& idx, const GrowthSchedule& sched);

// S_N(g) from the column sums d_j W_{n_j}(g^2) (2D_h - D_L - D_{n_j+1})(g^1), h = mid.
Rational theorem8_closed_form(const IndexSequence& idx, const GrowthSchedule& sched, uint64_t N, const DyadicPoint& g);

struct WindowVerdict {
    uint64_t lo = 0;  // first N of the window
    uint64_t hi = 0;  // last N of the window
    bool origin_zero = true;
};

struct StabilizationRow {
    DyadicElement g1;
    unsigned q = 0;  // 1 + index of the first nonzero digit
    unsigned J = 0;
    uint64_t bound = 0;  // n_J + 1
    uint64_t onset = 0;  // smallest N0 with S_N = S_{N0} for all N0 <= N <= N_max, over all g^2
    bool ok = true;
};

struct GrowthRow {
    unsigned s = 0;
    uint64_t n = 0;
    Rational d;
    Rational B;
    Rational ratio;  // |c_{n_s 1}| / |B_s|
};

struct CounterexampleOptions {
    unsigned point_rank = 8;   // g^2 enumerated exhaustively at this rank, both tails
    unsigned sample_rank = 10; // rank of the random points for the closed-form comparison
    uint64_t N_max = 256;
    std::size_t samples = 1000;
    std::vector<DyadicElement> probes;  // g^1 values for stabilization; empty means e_0..e_3
    uint64_t seed = 1;
};

struct CounterexampleReport {
    std::vector<WindowVerdict> windows;
    bool origin_ok = true;
    std::size_t origin_points = 0;
    std::vector<StabilizationRow> stabilization;
    bool stabilization_ok = true;
    std::vector<GrowthRow> growth;
    bool growth_increasing = true;
    bool closed_form_ok = true;
    std::size_t closed_form_checks = 0;
    std::string closed_form_mismatch;

    bool ok() const { return origin_ok && stabilization_ok && growth_increasing && closed_form_ok; }
};

CounterexampleReport verify_counterexample(const SeriesSpec& series, const IndexSequence& idx,
                                           const GrowthSchedule& sched, const CounterexampleOptions& opt = {});

nlohmann::json to_json(const CounterexampleReport& r);
// Columns s,n_s,d_s,ratio.
std::string growth_csv(const CounterexampleReport& r);

struct ProbeRow {
    uint64_t n = 0;
    unsigned popcount = 0;
    Rational coefficient;  // c_{n 1}
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    std::optional<unsigned> bound;  // empty: no bound on #n (contrast mode)
    bool all_zero = true;
    Rational max_abs;
    std::string assumption;

    // |c_{n 1}| <= eps for every row from index `from` on.
    bool tail_below(const Rational& eps, std::size_t from = 0) const;
};

// Throws when a probe index has more than `bound` nonzero dyadic coefficients.
ProbeReport cantor_lebesgue_probe(const SeriesSpec& series, const std::vector<uint64_t>& probes,
                                  std::optional<unsigned> bound);

nlohmann::json to_json(const ProbeReport& r);

}  // namespace dyadic
