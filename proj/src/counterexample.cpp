#include "dyadic/counterexample.hpp"

#include "dyadic/walsh.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dyadic {

namespace {

struct ScaledTerm {
    uint64_t key;  // max(alpha, beta)
    uint64_t alpha;
    uint64_t beta;
    BigInt num;
};

std::vector<ScaledTerm> scaled_terms(const SeriesSpec& series, uint64_t N_max) {
    if (series.dim() != 2) throw std::invalid_argument("expected a double series");
    std::vector<ScaledTerm> terms;
    for (const auto& [n, c] : series.coefficients()) {
        const uint64_t key = std::max(n[0], n[1]);
        if (key >= N_max) continue;
        terms.push_back({key, n[0], n[1], c.get_num() * (series.denominator() / c.get_den())});
    }
    std::stable_sort(terms.begin(), terms.end(), [](const ScaledTerm& a, const ScaledTerm& b) { return a.key < b.key; });
    return terms;
}

// Scaled S_N(g) for N = 1..N_max (entry N-1).
std::vector<BigInt> profile(const std::vector<ScaledTerm>& terms, uint64_t N_max, const DyadicPoint& g) {
    std::vector<BigInt> out(N_max);
    BigInt acc = 0;
    std::size_t t = 0;
    const uint64_t w1 = g[0].word(0);
    const uint64_t w2 = g[1].word(0);
    for (uint64_t N = 1; N <= N_max; ++N) {
        while (t < terms.size() && terms[t].key < N) {
            if (parity(terms[t].alpha & w1) ^ parity(terms[t].beta & w2)) acc -= terms[t].num;
            else acc += terms[t].num;
            ++t;
        }
        out[N - 1] = acc;
    }
    return out;
}

std::vector<Rational> column_factors(const IndexSequence& idx, const GrowthSchedule& sched, const DyadicPoint& g) {
    std::vector<Rational> f;
    for (std::size_t j = 0; j < idx.n.size(); ++j) {
        const ColumnHalves h = column_halves(idx.n[j]);
        BigInt k = 2 * dirichlet_closed(h.mid, g[0]) - dirichlet_closed(h.L, g[0]) - dirichlet_closed(h.n + 1, g[0]);
        Rational v = sched.d[j] * Rational(k) * walsh_eval(h.n, g[1]).value();
        f.push_back(v);
    }
    return f;
}

DyadicElement grid_element(uint64_t digits, unsigned rank, bool ones) {
    return DyadicElement::from_bits(digits, rank, ones ? Tail::AllOnes : Tail::AllZeros);
}

}  // namespace

IndexSequence default_index_sequence(unsigned S) {
    if (S == 0 || S > 30) throw std::invalid_argument("default sequence needs 1 <= S <= 30");
    IndexSequence idx;
    for (unsigned s = 1; s <= S; ++s) {
        idx.n.push_back((uint64_t{1} << (2 * s)) - 1);
        idx.m.push_back(2 * s);
    }
    idx.next = (uint64_t{1} << (2 * (S + 1))) - 1;
    return idx;
}

GrowthSchedule default_schedule(unsigned S) {
    GrowthSchedule g;
    for (unsigned s = 1; s <= S; ++s) {
        g.B.emplace_back(1);
        g.d.emplace_back(static_cast<long>(s));
    }
    return g;
}

ColumnHalves column_halves(uint64_t n_s) {
    if (n_s == 0) throw std::invalid_argument("n_s must be positive");
    ColumnHalves h;
    h.n = n_s;
    h.L = uint64_t{1} << (bit_length(n_s) - 1);
    const uint64_t count = n_s - h.L + 1;
    if (count % 2 != 0) {
        throw std::invalid_argument("column " + std::to_string(n_s) + " cannot be split into equal halves");
    }
    h.mid = h.L + count / 2;
    return h;
}

void validate(const IndexSequence& idx, const GrowthSchedule& sched) {
    const std::size_t S = idx.n.size();
    if (S == 0) throw std::invalid_argument("index sequence is empty");
    if (idx.m.size() != S || sched.B.size() != S || sched.d.size() != S) {
        throw std::invalid_argument("index sequence and schedule lengths differ");
    }
    for (std::size_t s = 0; s < S; ++s) {
        if (idx.m[s] == 0 || idx.m[s] > 62) throw std::invalid_argument("m_s must be in 1..62");
        const uint64_t low = (uint64_t{1} << idx.m[s]) - 1;
        if ((idx.n[s] & low) != low) {
            throw std::invalid_argument("n_" + std::to_string(s + 1) + " = " + std::to_string(idx.n[s]) +
                                        " does not have its low m_s dyadic coefficients equal to 1");
        }
        if (s > 0 && (idx.n[s] <= idx.n[s - 1] || idx.m[s] <= idx.m[s - 1])) {
            throw std::invalid_argument("n_s and m_s must be strictly increasing");
        }
        if (sched.B[s] == 0 || sched.d[s] == 0) throw std::invalid_argument("B_s and d_s must be nonzero");
        column_halves(idx.n[s]);
    }
    if (idx.next <= idx.n.back()) throw std::invalid_argument("n_{S+1} must exceed n_S");
}

SeriesSpec build_theorem8_series(const IndexSequence& idx, const GrowthSchedule& sched) {
    validate(idx, sched);
    const unsigned bound = bit_length(idx.next) - 1;
    if (idx.n.back() >= (uint64_t{1} << bound)) throw std::invalid_argument("n_{S+1} leaves no room below 2^bound");
    std::map<Index, Rational> coeffs;
    for (std::size_t s = 0; s < idx.n.size(); ++s) {
        const ColumnHalves h = column_halves(idx.n[s]);
        for (uint64_t a = h.L; a <= h.n; ++a) coeffs[{a, h.n}] = a < h.mid ? sched.d[s] : Rational(-sched.d[s]);
    }
    return SeriesSpec(2, bound, std::move(coeffs), true);
}

Rational theorem8_closed_form(const IndexSequence& idx, const GrowthSchedule& sched, uint64_t N, const DyadicPoint& g) {
    if (g.dim() != 2) throw std::invalid_argument("closed form needs a point of G^2");
    if (N == 0 || N > idx.next) throw std::out_of_range("closed form needs 1 <= N <= n_{S+1}");
    const auto f = column_factors(idx, sched, g);
    Rational sum = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        if (idx.n[j] < N) sum += f[j];
    }
    return sum;
}

CounterexampleReport verify_counterexample(const SeriesSpec& series, const IndexSequence& idx,
                                           const GrowthSchedule& sched, const CounterexampleOptions& opt) {
    validate(idx, sched);
    if (opt.N_max == 0 || opt.N_max > idx.next) {
        throw std::invalid_argument("truncation too shallow: N_max must lie in 1..n_{S+1}");
    }
    if (opt.point_rank == 0 || opt.point_rank > 20) throw std::invalid_argument("point_rank must be in 1..20");
    series.require_known_below(Index{opt.N_max, opt.N_max});
    CounterexampleReport rep;
    const auto terms = scaled_terms(series, opt.N_max);
    const unsigned r = opt.point_rank;

    // Windows [1, n_1], [n_1 + 1, n_2], ..., clipped to N_max.
    std::vector<uint64_t> edges{0};
    for (uint64_t n : idx.n) edges.push_back(n);
    edges.push_back(idx.next);
    for (std::size_t w = 0; w + 1 < edges.size() && edges[w] < opt.N_max; ++w) {
        rep.windows.push_back({edges[w] + 1, std::min(edges[w + 1], opt.N_max), true});
    }
    const DyadicElement zero = DyadicElement::zero(r);
    for (uint64_t digits = 0; digits < (uint64_t{1} << r); ++digits) {
        for (int tail = 0; tail < 2; ++tail) {
            DyadicPoint g({zero, grid_element(digits, r, tail)});
            const auto p = profile(terms, opt.N_max, g);
            ++rep.origin_points;
            for (auto& w : rep.windows) {
                for (uint64_t N = w.lo; N <= w.hi; ++N) {
                    if (p[N - 1] != 0) w.origin_zero = false;
                }
            }
        }
    }
    for (const auto& w : rep.windows) rep.origin_ok = rep.origin_ok && w.origin_zero;

    std::vector<DyadicElement> probes = opt.probes;
    if (probes.empty()) {
        for (unsigned k = 0; k < 4; ++k) probes.push_back(DyadicElement::unit(k));
    }
    for (const auto& g1 : probes) {
        StabilizationRow row;
        row.g1 = g1;
        unsigned first = 0;
        while (first < 64 && !g1.digit(first)) ++first;
        if (first == 64) throw std::invalid_argument("stabilization probe must have a nonzero digit");
        row.q = first + 1;
        std::size_t J = 0;
        while (J < idx.m.size() && idx.m[J] < row.q) ++J;
        if (J == idx.m.size()) throw std::invalid_argument("truncation too shallow: no m_j >= q");
        row.J = static_cast<unsigned>(J + 1);
        row.bound = idx.n[J] + 1;
        if (row.bound > opt.N_max) throw std::invalid_argument("truncation too shallow: n_J + 1 exceeds N_max");
        for (uint64_t digits = 0; digits < (uint64_t{1} << r); ++digits) {
            for (int tail = 0; tail < 2; ++tail) {
                DyadicPoint g({g1, grid_element(digits, r, tail)});
                const auto p = profile(terms, opt.N_max, g);
                uint64_t onset = opt.N_max;
                while (onset > 1 && p[onset - 2] == p[opt.N_max - 1]) --onset;
                row.onset = std::max(row.onset, onset);
            }
        }
        row.ok = row.onset <= row.bound;
        rep.stabilization_ok = rep.stabilization_ok && row.ok;
        rep.stabilization.push_back(row);
    }

    for (std::size_t s = 0; s < idx.n.size(); ++s) {
        GrowthRow g;
        g.s = static_cast<unsigned>(s + 1);
        g.n = idx.n[s];
        g.d = sched.d[s];
        g.B = sched.B[s];
        g.ratio = abs(series.coefficient({idx.n[s], idx.n[s]})) / abs(sched.B[s]);
        if (!rep.growth.empty() && g.ratio <= rep.growth.back().ratio) rep.growth_increasing = false;
        rep.growth.push_back(g);
    }

    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<uint64_t> bits(0, (uint64_t{1} << opt.sample_rank) - 1);
    std::bernoulli_distribution coin(0.5);
    const BigInt& den = series.denominator();
    for (std::size_t i = 0; i < opt.samples && rep.closed_form_ok; ++i) {
        const DyadicElement a = grid_element(bits(rng), opt.sample_rank, coin(rng));
        const DyadicElement b = grid_element(bits(rng), opt.sample_rank, coin(rng));
        DyadicPoint g({a, b});
        const auto p = profile(terms, opt.N_max, g);
        const auto f = column_factors(idx, sched, g);
        Rational closed = 0;
        std::size_t j = 0;
        for (uint64_t N = 1; N <= opt.N_max; ++N) {
            while (j < idx.n.size() && idx.n[j] < N) closed += f[j++];
            ++rep.closed_form_checks;
            if (Rational(p[N - 1], den) != closed) {
                rep.closed_form_ok = false;
                rep.closed_form_mismatch = "N=" + std::to_string(N) + " g=" + g.str();
                break;
            }
        }
    }
    return rep;
}

nlohmann::json to_json(const CounterexampleReport& r) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : r.windows) windows.push_back({{"first_N", w.lo}, {"last_N", w.hi}, {"origin_zero", w.origin_zero}});
    nlohmann::json stab = nlohmann::json::array();
    for (const auto& s : r.stabilization) {
        stab.push_back({{"g1", s.g1.str()}, {"q", s.q}, {"J", s.J}, {"bound", s.bound}, {"onset", s.onset}, {"ok", s.ok}});
    }
    nlohmann::json growth = nlohmann::json::array();
    for (const auto& g : r.growth) {
        growth.push_back({{"s", g.s}, {"n_s", g.n}, {"d_s", to_string(g.d)}, {"B_s", to_string(g.B)}, {"ratio", to_string(g.ratio)}});
    }
    nlohmann::json j = {{"origin", {{"ok", r.origin_ok}, {"points", r.origin_points}, {"windows", windows}}},
                        {"stabilization", {{"ok", r.stabilization_ok}, {"rows", stab}}},
                        {"growth", {{"strictly_increasing", r.growth_increasing}, {"rows", growth}}},
                        {"closed_form", {{"ok", r.closed_form_ok}, {"checks", r.closed_form_checks}}},
                        {"ok", r.ok()},
                        {"note", "window constancy and the origin identity at finite rank; not a proof of convergence"}};
    if (!r.closed_form_ok) j["closed_form"]["mismatch"] = r.closed_form_mismatch;
    return j;
}

std::string growth_csv(const CounterexampleReport& r) {
    std::ostringstream out;
    out << "s,n_s,d_s,ratio\n";
    for (const auto& g : r.growth) out << g.s << ',' << g.n << ',' << to_string(g.d) << ',' << to_string(g.ratio) << '\n';
    return out.str();
}

bool ProbeReport::tail_below(const Rational& eps, std::size_t from) const {
    for (std::size_t i = from; i < rows.size(); ++i) {
        if (abs(rows[i].coefficient) > eps) return false;
    }
    return true;
}

ProbeReport cantor_lebesgue_probe(const SeriesSpec& series, const std::vector<uint64_t>& probes,
                                  std::optional<unsigned> bound) {
    ProbeReport rep;
    rep.bound = bound;
    rep.max_abs = 0;
    rep.assumption = "convergence over cubes on a set of positive measure is assumed for the input, not certified";
    for (uint64_t n : probes) {
        ProbeRow row;
        row.n = n;
        row.popcount = static_cast<unsigned>(__builtin_popcountll(n));
        if (bound && row.popcount > *bound) {
            throw std::invalid_argument("probe index " + std::to_string(n) + " has " + std::to_string(row.popcount) +
                                        " nonzero dyadic coefficients, above the bound " + std::to_string(*bound));
        }
        row.coefficient = series.coefficient(Index(series.dim(), n));
        if (row.coefficient != 0) rep.all_zero = false;
        rep.max_abs = std::max(rep.max_abs, Rational(abs(row.coefficient)));
        rep.rows.push_back(row);
    }
    return rep;
}

nlohmann::json to_json(const ProbeReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"n", row.n}, {"popcount", row.popcount}, {"coefficient", to_string(row.coefficient)}});
    }
    nlohmann::json j = {{"rows", rows}, {"all_zero", r.all_zero}, {"max_abs", to_string(r.max_abs)}, {"assumption", r.assumption}};
    j["bound"] = r.bound ? nlohmann::json(*r.bound) : nlohmann::json("unbounded");
    return j;
}

}  // namespace dyadic
