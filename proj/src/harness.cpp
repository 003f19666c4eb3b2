#include "dyadic/harness.hpp"

#include "dyadic/parallel.hpp"
#include "dyadic/walsh.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dyadic {

using nlohmann::json;

const char* const kFalsifierLabel = "a zero dimension at rank K is evidence, not proof, of U-set behavior";

void IdentityCell::record(const Rational& a, const Rational& b, const std::string& at) {
    ++checks;
    if (a == b) return;
    if (mismatches == 0) {
        where = at;
        lhs = a;
        rhs = b;
    }
    ++mismatches;
}

std::size_t IdentityReport::checks() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.checks;
    return n;
}

std::size_t IdentityReport::mismatches() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.mismatches;
    return n;
}

json IdentityReport::to_json(bool all_cells) const {
    json j;
    j["identity"] = name;
    j["seed"] = seed;
    j["grid"] = grid;
    j["cells"] = cells.size();
    j["checks"] = checks();
    j["mismatches"] = mismatches();
    j["ok"] = ok();
    j["info"] = info;
    json list = json::array();
    for (const auto& c : cells) {
        if (!all_cells && c.mismatches == 0) continue;
        json e;
        e["params"] = c.params;
        e["checks"] = c.checks;
        e["mismatches"] = c.mismatches;
        if (c.mismatches > 0) {
            e["where"] = c.where;
            e["lhs"] = to_string(c.lhs);
            e["rhs"] = to_string(c.rhs);
        }
        list.push_back(e);
    }
    j[all_cells ? "verdicts" : "failures"] = list;
    return j;
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

DyadicElement cell_element(unsigned rank, uint64_t idx) { return DyadicCube{rank, {idx}}.corner(0); }

DyadicElement random_element(std::mt19937_64& rng, std::size_t rank) {
    std::vector<uint8_t> digits(rank);
    for (auto& b : digits) b = static_cast<uint8_t>(rng() & 1u);
    return DyadicElement(digits, (rng() & 1u) ? Tail::AllOnes : Tail::AllZeros);
}

DyadicPoint random_point(std::mt19937_64& rng, std::size_t d, std::size_t rank) {
    std::vector<DyadicElement> c;
    for (std::size_t l = 0; l < d; ++l) c.push_back(random_element(rng, rank));
    return DyadicPoint(std::move(c));
}

// Calls f(flat) for every rank-R cell in the box lo[l] <= m_l < hi[l].
void for_each_in_box(const std::vector<uint64_t>& lo, const std::vector<uint64_t>& hi, unsigned R,
                     const std::function<void(uint64_t, const std::vector<uint64_t>&)>& f) {
    const std::size_t d = lo.size();
    for (std::size_t l = 0; l < d; ++l)
        if (lo[l] >= hi[l]) return;
    std::vector<uint64_t> idx = lo;
    while (true) {
        uint64_t flat = 0;
        for (std::size_t l = 0; l < d; ++l) flat = (flat << R) | idx[l];
        f(flat, idx);
        std::size_t l = d;
        while (l > 0) {
            --l;
            if (++idx[l] < hi[l]) break;
            idx[l] = lo[l];
            if (l == 0) return;
        }
        if (d == 0) return;
    }
}

// Box of rank-R cells inside the interval (r, i) in each coordinate.
void box_of(const std::vector<std::pair<unsigned, uint64_t>>& sides, unsigned R, std::vector<uint64_t>& lo,
            std::vector<uint64_t>& hi) {
    lo.resize(sides.size());
    hi.resize(sides.size());
    for (std::size_t l = 0; l < sides.size(); ++l) {
        lo[l] = sides[l].second << (R - sides[l].first);
        hi[l] = (sides[l].second + 1) << (R - sides[l].first);
    }
}

std::string index_str(const Index& n) {
    std::string s = "(";
    for (std::size_t l = 0; l < n.size(); ++l) s += (l ? "," : "") + std::to_string(n[l]);
    return s + ")";
}

}  // namespace

// ---------------------------------------------------------------- kernels

IdentityReport kernel_equivalence(uint64_t max_N, unsigned rank) {
    if (max_N == 0 || rank == 0 || rank > 20) throw std::invalid_argument("kernel_equivalence: bad parameters");
    IdentityReport rep;
    rep.name = "dirichlet_closed == dirichlet_naive";
    rep.grid = {{"max_N", max_N}, {"rank", rank}, {"tails", {"0", "1"}}};
    const uint64_t count = uint64_t{1} << rank;
    rep.cells.resize(2 * count);
    parallel_for(rep.cells.size(), [&](std::size_t c) {
        const Tail tail = c >= count ? Tail::AllOnes : Tail::AllZeros;
        const DyadicElement g = DyadicElement::from_bits(c % count, rank, tail);
        IdentityCell& cell = rep.cells[c];
        cell.params = {{"g", g.str()}};
        for (uint64_t N = 1; N <= max_N; ++N) {
            cell.record(Rational(dirichlet_closed(N, g)), Rational(dirichlet_naive(N, g)), "N=" + std::to_string(N));
        }
    });
    return rep;
}

IdentityReport kernel_recursion(unsigned max_k, unsigned rank) {
    if (rank == 0 || rank > 20 || max_k > 30) throw std::invalid_argument("kernel_recursion: bad parameters");
    IdentityReport rep;
    rep.name = "D_{2^k+m} == D_{2^k} + R_k D_m";
    rep.grid = {{"max_k", max_k}, {"rank", rank}, {"tails", {"0", "1"}}};
    const uint64_t count = uint64_t{1} << rank;
    rep.cells.resize(2 * count);
    parallel_for(rep.cells.size(), [&](std::size_t c) {
        const Tail tail = c >= count ? Tail::AllOnes : Tail::AllZeros;
        const DyadicElement g = DyadicElement::from_bits(c % count, rank, tail);
        IdentityCell& cell = rep.cells[c];
        cell.params = {{"g", g.str()}};
        const uint64_t top = (uint64_t{1} << max_k) * 2;
        std::vector<BigInt> D(top + 1);
        D[0] = 0;
        for (uint64_t n = 1; n <= top; ++n) D[n] = D[n - 1] + walsh_eval(n - 1, g).value();
        for (unsigned k = 0; k <= max_k; ++k) {
            const uint64_t p = uint64_t{1} << k;
            const int R = rademacher(k, g).value();
            for (uint64_t m = 1; m <= p; ++m) {
                cell.record(Rational(D[p + m]), Rational(D[p] + R * D[m]),
                            "k=" + std::to_string(k) + " m=" + std::to_string(m));
            }
        }
    });
    return rep;
}

IdentityReport kernel_vanishing(uint64_t max_N, unsigned rank) {
    if (max_N == 0 || rank == 0 || rank > 20) throw std::invalid_argument("kernel_vanishing: bad parameters");
    IdentityReport rep;
    rep.name = "D_N = 0 off Delta_0^{(k_s)}";
    rep.grid = {{"max_N", max_N}, {"rank", rank}, {"tails", {"0", "1"}}};
    const uint64_t count = uint64_t{1} << rank;
    rep.cells.resize(2 * count);
    std::vector<std::size_t> literal(rep.cells.size(), 0);
    std::vector<std::string> literal_first(rep.cells.size());
    parallel_for(rep.cells.size(), [&](std::size_t c) {
        const Tail tail = c >= count ? Tail::AllOnes : Tail::AllZeros;
        const DyadicElement g = DyadicElement::from_bits(c % count, rank, tail);
        IdentityCell& cell = rep.cells[c];
        cell.params = {{"g", g.str()}};
        BigInt D = 0;
        for (uint64_t N = 1; N <= max_N; ++N) {
            D += walsh_eval(N - 1, g).value();
            const unsigned ks = vanishing_rank(N);
            if (!in_zero_cube(g, ks)) {
                cell.record(Rational(D), Rational(0), "N=" + std::to_string(N));
            } else if (!in_zero_cube(g, ks + 1) && D != 0) {
                if (literal[c] == 0) literal_first[c] = "N=" + std::to_string(N) + " g=" + g.str() + " D=" + D.get_str();
                ++literal[c];
            }
        }
    });
    std::size_t total = 0;
    std::string first;
    for (std::size_t c = 0; c < literal.size(); ++c) {
        total += literal[c];
        if (first.empty() && literal[c]) first = literal_first[c];
    }
    rep.info["one_larger_cube_violations"] = total;
    rep.info["one_larger_cube_first"] = first;
    return rep;
}

// ---------------------------------------------------------------- Lemma 1

std::vector<unsigned> binary_exponents(uint64_t M) {
    std::vector<unsigned> out;
    for (unsigned t = 64; t-- > 0;)
        if ((M >> t) & 1u) out.push_back(t);
    return out;
}

Lemma1Result lemma1_check(const SeriesSpec& series, const DyadicPoint& g, uint64_t M1, uint64_t M2) {
    if (M1 == 0 || M2 < M1) throw std::invalid_argument("lemma1_check: need 0 < M1 <= M2");
    const std::vector<unsigned> ks = binary_exponents(M1);
    if (M2 - M1 >= (uint64_t{1} << ks.back())) throw std::invalid_argument("lemma1_check: r >= 2^{k_l}");
    const std::size_t d = series.dim();
    if (g.dim() != d) throw std::invalid_argument("lemma1_check: dimension mismatch");
    series.require_known_below(Index(d, M2 + 1));

    const std::vector<SignVector> sig = even_sign_vectors(d);
    const std::size_t l = ks.size();
    const Index hiN(d, M2 + 1), loN(d, M1);
    BigInt lhs = 0;
    std::vector<std::size_t> choice(l, 0);
    while (true) {
        DyadicPoint h = g;
        for (std::size_t j = 0; j < l; ++j) h = add(h, sig[choice[j]].shift(ks[j]));
        lhs += series.scaled_partial_sum(hiN, h) - series.scaled_partial_sum(loN, h);
        std::size_t j = 0;
        while (j < l && ++choice[j] == sig.size()) choice[j++] = 0;
        if (j == l) break;
    }
    Lemma1Result res;
    res.lhs = Rational(lhs, series.denominator());
    res.lhs.canonicalize();

    Rational rhs = 0;
    Index n(d, M1);
    while (true) {
        MultiIndex mi(n.begin(), n.end());
        rhs += series.coefficient(n) * walsh_eval_multi(mi, g).value();
        std::size_t c = 0;
        while (c < d && ++n[c] > M2) n[c++] = M1;
        if (c == d) break;
    }
    rhs *= Rational(pow2(static_cast<unsigned>(l * (d - 1))));
    res.rhs = rhs;
    res.equal = res.lhs == res.rhs;
    return res;
}

namespace {

// Sparse series concentrated on the box [M1, M2]^d and the shell of S_{M2+1} - S_{M1}.
SeriesSpec focused_series(std::size_t d, uint64_t M1, uint64_t M2, unsigned bound, std::mt19937_64& rng) {
    std::vector<Index> support;
    Index n(d, M1);
    while (true) {
        support.push_back(n);
        std::size_t c = 0;
        while (c < d && ++n[c] > M2) n[c++] = M1;
        if (c == d) break;
    }
    std::uniform_int_distribution<uint64_t> in_sum(0, M2);
    std::uniform_int_distribution<uint64_t> anywhere(0, (uint64_t{1} << bound) - 1);
    for (int t = 0; t < 16; ++t) {
        Index x(d);
        for (auto& v : x) v = in_sum(rng);
        support.push_back(x);
    }
    for (int t = 0; t < 6; ++t) {
        Index x(d);
        for (auto& v : x) v = anywhere(rng);
        support.push_back(x);
    }
    return random_series_on(d, bound, support, rng);
}

}  // namespace

IdentityReport lemma1_grid(const Lemma1GridOptions& opt) {
    struct Spec {
        std::size_t d;
        uint64_t M1;
        uint64_t r;
    };
    std::vector<Spec> specs;
    for (std::size_t d : opt.dims) {
        if (d < 1 || d > 4) throw std::invalid_argument("lemma1_grid: d out of range");
        for (uint64_t mask = 1; mask < (uint64_t{1} << (opt.max_k1 + 1)); ++mask) {
            const unsigned l = static_cast<unsigned>(__builtin_popcountll(mask));
            if (l > opt.max_l) continue;
            const unsigned kl = static_cast<unsigned>(__builtin_ctzll(mask));
            for (uint64_t r : opt.rs)
                if (r < (uint64_t{1} << kl)) specs.push_back({d, mask, r});
        }
    }
    IdentityReport rep;
    rep.name = "Lemma 1 shifted partial sums";
    rep.seed = opt.seed;
    rep.grid = {{"dims", opt.dims}, {"max_l", opt.max_l}, {"max_k1", opt.max_k1}, {"r", opt.rs},
                {"series", opt.series}, {"points", opt.points}};
    rep.cells.resize(specs.size());
    parallel_for(specs.size(), [&](std::size_t c) {
        const Spec& sp = specs[c];
        IdentityCell& cell = rep.cells[c];
        const uint64_t M2 = sp.M1 + sp.r;
        cell.params = {{"d", sp.d}, {"M1", sp.M1}, {"M2", M2}};
        const unsigned k1 = binary_exponents(sp.M1).front();
        std::mt19937_64 rng(mix_seed(opt.seed, c));
        for (std::size_t t = 0; t < opt.series; ++t) {
            const SeriesSpec series = focused_series(sp.d, sp.M1, M2, k1 + 1, rng);
            for (std::size_t p = 0; p < opt.points; ++p) {
                const DyadicPoint g = random_point(rng, sp.d, k1 + 2);
                const Lemma1Result res = lemma1_check(series, g, sp.M1, M2);
                cell.record(res.lhs, res.rhs, "series " + std::to_string(t) + " g=" + g.str());
            }
        }
    });
    return rep;
}

// ---------------------------------------------------------------- Lemma 2

Lemma2Result lemma2_search(const SupportMask& E, unsigned s, unsigned l, const std::vector<unsigned>& ks) {
    const std::size_t d = E.d;
    const unsigned K = E.K;
    if (ks.size() != l || l == 0) throw std::invalid_argument("lemma2_search: need l ranks");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] >= K) throw std::invalid_argument("lemma2_search: k_i must be below K");
        if (i > 0 && ks[i] >= ks[i - 1]) throw std::invalid_argument("lemma2_search: ranks must decrease");
    }
    if (s > K) throw std::invalid_argument("lemma2_search: s > K");
    Lemma2Result res;

    // Dense cube: count cells per rank-k cube and compare with 1 - 2^{-ld}.
    for (unsigned k = s; k <= K && !res.k0; ++k) {
        const unsigned shift = K - k;
        std::map<uint64_t, uint64_t> counts;
        for (uint64_t f = 0; f < E.cells.size(); ++f) {
            if (!E.cells[f]) continue;
            uint64_t parent = 0;
            for (std::size_t c = 0; c < d; ++c) {
                const uint64_t coord = (f >> (K * (d - 1 - c))) & ((uint64_t{1} << K) - 1);
                parent = (parent << k) | (coord >> shift);
            }
            ++counts[parent];
        }
        // density = count / 2^{shift d} > 1 - 2^{-ld}  <=>  count 2^{ld} > 2^{shift d}(2^{ld} - 1)
        const BigInt total = pow2(static_cast<unsigned>(shift * d));
        const BigInt scale = pow2(static_cast<unsigned>(l * d));
        for (const auto& [parent, cnt] : counts) {
            if (BigInt(static_cast<unsigned long>(cnt)) * scale > total * (scale - 1)) {
                res.k0 = k;
                res.dense_cube = DyadicCube::from_flat(k, d, parent);
                break;
            }
        }
    }

    // Shift patterns: XOR masks on the flat index for every choice of sigma^i in Sigma^d.
    std::vector<uint64_t> patterns{0};
    for (unsigned k : ks) {
        std::vector<uint64_t> next;
        for (uint64_t sigma = 0; sigma < (uint64_t{1} << d); ++sigma) {
            uint64_t x = 0;
            for (std::size_t c = 0; c < d; ++c)
                if ((sigma >> (d - 1 - c)) & 1u) x |= uint64_t{1} << (K * (d - 1 - c) + (K - 1 - k));
            for (uint64_t p : patterns) next.push_back(p ^ x);
        }
        patterns = std::move(next);
    }
    for (uint64_t f = 0; f < E.cells.size(); ++f) {
        ++res.cells_tried;
        bool ok = true;
        for (uint64_t p : patterns) {
            if (!E.cells[f ^ p]) {
                ok = false;
                break;
            }
        }
        if (ok) {
            res.point_cell = DyadicCube::from_flat(K, d, f);
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------- Lemma 4

Lemma4Result lemma4_check(const Quasimeasure& tau, const Index& N, const Parallelepiped& P) {
    const std::size_t d = tau.dim();
    const unsigned K = tau.max_rank();
    if (N.size() != d || P.dim() != d) throw std::invalid_argument("lemma4_check: dimension mismatch");
    for (uint64_t n : N)
        if (bit_length(n) > K) throw std::out_of_range("lemma4_check: rank too small");
    const SupportMask mask = support_mask(tau);
    Lemma4Result res;
    res.precondition = true;
    std::vector<uint64_t> lo, hi;
    box_of(P.sides, K, lo, hi);
    for_each_in_box(lo, hi, K, [&](uint64_t f, const std::vector<uint64_t>& idx) {
        if (!mask.cells[f]) return;
        bool odd = false;
        for (std::size_t l = 0; l < d; ++l) odd ^= parity(N[l] & reverse_bits(idx[l], K));
        if (odd) res.precondition = false;
    });
    res.integral = integrate_walsh(tau, N, P);
    res.tau_P = tau_of(tau, P);
    return res;
}

IdentityReport lemma4_suite(std::size_t instances, uint64_t seed) {
    IdentityReport rep;
    rep.name = "integral of W_N over P equals tau(P) on WD supports";
    rep.seed = seed;
    rep.grid = {{"instances", instances}};
    rep.cells.resize(instances);
    std::vector<uint8_t> pre(instances, 1);
    parallel_for(instances, [&](std::size_t c) {
        std::mt19937_64 rng(mix_seed(seed, c));
        const std::size_t d = 2 + rng() % 2;
        const unsigned K = 4 + static_cast<unsigned>(rng() % 2);
        const std::size_t count = 1 + rng() % 3;
        std::vector<Index> Ns;
        for (std::size_t i = 0; i < count; ++i) {
            Index n(d);
            for (auto& v : n) v = rng() % (uint64_t{1} << K);
            Ns.push_back(n);
        }
        const SetPtr E = make_dirichlet(d, Ns);
        const SupportMask mask = set_mask(*E, K);
        std::vector<Rational> leaves(mask.cells.size(), Rational(0));
        for (std::size_t f = 0; f < leaves.size(); ++f)
            if (mask.cells[f]) leaves[f] = random_rational(rng, 9, 9);
        const Quasimeasure tau = Quasimeasure::from_leaves(d, K, leaves);
        const Index& N = Ns[rng() % Ns.size()];
        Parallelepiped P;
        for (std::size_t l = 0; l < d; ++l) {
            const unsigned r = static_cast<unsigned>(rng() % (K + 1));
            P.sides.push_back({r, rng() % (uint64_t{1} << r)});
        }
        IdentityCell& cell = rep.cells[c];
        cell.params = {{"d", d}, {"K", K}, {"set", describe(*E)}, {"N", index_str(N)}, {"P", P.str()}};
        const Lemma4Result res = lemma4_check(tau, N, P);
        pre[c] = res.precondition;
        cell.record(res.integral, res.tau_P, P.str());
    });
    std::size_t bad = 0;
    for (auto p : pre) bad += p ? 0 : 1;
    rep.info["precondition_failures"] = bad;
    return rep;
}

// ---------------------------------------------------------------- T_k

TkResult tk_decomposition_check(const SeriesSpec& series, const Quasimeasure& tau, const DyadicPoint& eta,
                                const DyadicPoint& xi, unsigned k, unsigned s, const Partition& part) {
    const std::size_t d = series.dim();
    const std::size_t m = part.m();
    if (d < 2 || part.d != d || m > d - 1 || tau.dim() != d) throw std::invalid_argument("tk: dimension mismatch");
    if (eta.dim() != d - m || xi.dim() != m) throw std::invalid_argument("tk: eta/xi dimension mismatch");
    if (s >= k) throw std::invalid_argument("tk: need s < k");
    if (tau.max_rank() < k + 1) throw std::out_of_range("tk: insufficient rank");
    const uint64_t P = uint64_t{1} << k;
    const uint64_t A = P + (uint64_t{1} << s);
    const unsigned R = k + 1;
    const uint64_t side = uint64_t{1} << R;

    TkResult res;

    // Kernel integral over rank-(k+1) cubes.
    std::vector<std::vector<BigInt>> kern(d, std::vector<BigInt>(side));
    for (std::size_t i = 0; i < part.upper.size(); ++i) {
        for (uint64_t c = 0; c < side; ++c) {
            const DyadicElement h = eta[i] ^ cell_element(R, c);
            kern[part.upper[i]][c] = dirichlet_closed(A, h) - dirichlet_closed(P, h);
        }
    }
    for (std::size_t i = 0; i < part.lower.size(); ++i) {
        for (uint64_t c = 0; c < side; ++c) kern[part.lower[i]][c] = dirichlet_closed(A, xi[i] ^ cell_element(R, c));
    }
    const RationalTable& t = tau.level(R);
    BigInt acc = 0;
    for (uint64_t f = 0; f < t.size(); ++f) {
        if (t.is_zero(f)) continue;
        BigInt w = t.numerator(f);
        for (std::size_t l = 0; l < d && w != 0; ++l) w *= kern[l][(f >> (R * (d - 1 - l))) & (side - 1)];
        acc += w;
    }
    res.kernel_integral = Rational(acc, t.denominator());
    res.kernel_integral.canonicalize();

    // Decomposition over subsets J of the lower coordinates.
    auto digit_k = [&](const DyadicElement& g) { return g.digit(k); };
    bool eta_odd = false;
    for (std::size_t i = 0; i < eta.dim(); ++i) eta_odd ^= digit_k(eta[i]);
    Rational decomp = 0;
    for (uint64_t J = 0; J < (uint64_t{1} << m); ++J) {
        const unsigned q = static_cast<unsigned>(__builtin_popcountll(J));
        std::vector<std::pair<unsigned, uint64_t>> sides(d);
        std::vector<uint8_t> signed_coord(d, 0);
        for (std::size_t i = 0; i < part.upper.size(); ++i) {
            sides[part.upper[i]] = {s, interval_index(eta[i], s)};
            signed_coord[part.upper[i]] = 1;
        }
        bool xi_odd = false;
        for (std::size_t i = 0; i < m; ++i) {
            if ((J >> i) & 1u) {
                sides[part.lower[i]] = {s, interval_index(xi[i], s)};
                signed_coord[part.lower[i]] = 1;
                xi_odd ^= digit_k(xi[i]);
            } else {
                sides[part.lower[i]] = {k, interval_index(xi[i], k)};
            }
        }
        std::vector<uint64_t> lo, hi;
        box_of(sides, R, lo, hi);
        BigInt q_acc = 0;
        for_each_in_box(lo, hi, R, [&](uint64_t f, const std::vector<uint64_t>& idx) {
            bool odd = false;
            for (std::size_t l = 0; l < d; ++l)
                if (signed_coord[l]) odd ^= idx[l] & 1u;
            if (odd) q_acc -= t.numerator(f);
            else q_acc += t.numerator(f);
        });
        Rational Q(q_acc * pow2(static_cast<unsigned>((m - q) * k)), t.denominator());
        Q.canonicalize();
        Rational term = Q * Rational(pow2(static_cast<unsigned>(s * (d - m + q))));
        if (xi_odd) term = -term;
        decomp += term;
    }
    res.decomposition = eta_odd ? Rational(-decomp) : decomp;

    // Full point (eta, xi) and the coefficient forms C and X.
    std::vector<DyadicElement> comps(d);
    for (std::size_t i = 0; i < part.upper.size(); ++i) comps[part.upper[i]] = eta[i];
    for (std::size_t i = 0; i < m; ++i) comps[part.lower[i]] = xi[i];
    const DyadicPoint g(comps);
    Rational C = 0, X = 0;
    for (const auto& [n, c] : series.coefficients()) {
        bool lower_ok = true, lower_big = false;
        for (std::size_t l : part.lower) {
            if (n[l] >= A) lower_ok = false;
            if (n[l] >= P) lower_big = true;
        }
        if (!lower_ok) continue;
        bool in_C = true, in_X = true;
        for (std::size_t l : part.upper) {
            if (n[l] < P || n[l] >= A) in_C = false;
            if (n[l] >= P) in_X = false;
        }
        if (!in_C && !(in_X && lower_big)) continue;
        const Rational v = c * walsh_eval_multi(MultiIndex(n.begin(), n.end()), g).value();
        if (in_C) C += v;
        else X += v;
    }
    res.coefficient_form = C;
    res.extra = X;

    // T_k from partial sums at the shifted points.
    Rational T = 0;
    const Index NA(d, A), NP(d, P);
    for (const SignVector& sig : even_sign_vectors(d - m)) {
        const DyadicPoint sh = sig.shift(k);
        std::vector<DyadicElement> hc = comps;
        for (std::size_t i = 0; i < part.upper.size(); ++i) hc[part.upper[i]] = comps[part.upper[i]] ^ sh[i];
        const DyadicPoint h(hc);
        T += series.partial_sum_rect(NA, h) - series.partial_sum_rect(NP, h);
    }
    res.sigma_sum = T;

    const Rational half(pow2(static_cast<unsigned>(d - m - 1)));
    res.ok = res.kernel_integral == res.decomposition && res.kernel_integral == C && T == half * (C + X);
    res.literal = T == Rational(pow2(static_cast<unsigned>(d - m))) * C;
    return res;
}

IdentityReport tk_grid(const TkGridOptions& opt) {
    struct Spec {
        std::size_t d;
        std::vector<std::size_t> lower;
        unsigned k, s;
    };
    std::vector<Spec> specs;
    for (std::size_t d : opt.dims) {
        if (d < 2 || d > 3) throw std::invalid_argument("tk_grid: d must be 2 or 3");
        std::vector<std::size_t> ms{1};
        if (d - 1 != 1) ms.push_back(d - 1);
        for (std::size_t m : ms) {
            for (uint64_t mask = 0; mask < (uint64_t{1} << d); ++mask) {
                if (static_cast<std::size_t>(__builtin_popcountll(mask)) != m) continue;
                std::vector<std::size_t> lower;
                for (std::size_t l = 0; l < d; ++l)
                    if ((mask >> l) & 1u) lower.push_back(l);
                for (unsigned k = 1; k <= opt.max_k; ++k)
                    for (unsigned s = 0; s < k && s <= opt.max_s; ++s) specs.push_back({d, lower, k, s});
            }
        }
    }
    IdentityReport rep;
    rep.name = "T_k decomposition";
    rep.seed = opt.seed;
    rep.grid = {{"dims", opt.dims}, {"m", "1 and d-1"}, {"max_k", opt.max_k}, {"max_s", opt.max_s},
                {"series", opt.series}, {"density", opt.density}};
    rep.cells.resize(specs.size());
    std::vector<std::size_t> literal(specs.size(), 0);
    parallel_for(specs.size(), [&](std::size_t c) {
        const Spec& sp = specs[c];
        const Partition part = Partition::with_lower(sp.d, sp.lower);
        IdentityCell& cell = rep.cells[c];
        cell.params = {{"d", sp.d}, {"lower", sp.lower}, {"k", sp.k}, {"s", sp.s}};
        std::mt19937_64 rng(mix_seed(opt.seed, c));
        for (std::size_t t = 0; t < opt.series; ++t) {
            RandomSeriesOptions ro;
            ro.d = sp.d;
            ro.bound_rank = sp.k + 1;
            ro.density = opt.density;
            const SeriesSpec series = random_series(ro, rng);
            const Quasimeasure tau = quasimeasure_from_series(series, sp.k + 1);
            std::vector<DyadicElement> e, x;
            for (std::size_t i = 0; i < part.upper.size(); ++i) e.push_back(random_element(rng, sp.k + 2));
            for (std::size_t i = 0; i < part.lower.size(); ++i) x.push_back(random_element(rng, sp.k + 2));
            const DyadicPoint eta(e), xi(x);
            const TkResult r = tk_decomposition_check(series, tau, eta, xi, sp.k, sp.s, part);
            const std::string at = "series " + std::to_string(t) + " eta=" + eta.str() + " xi=" + xi.str();
            cell.record(r.kernel_integral, r.decomposition, "kernel vs decomposition, " + at);
            cell.record(r.kernel_integral, r.coefficient_form, "kernel vs C, " + at);
            cell.record(r.sigma_sum, Rational(pow2(static_cast<unsigned>(sp.d - part.m() - 1))) *
                                         (r.coefficient_form + r.extra),
                        "T vs 2^{d-m-1}(C+X), " + at);
            if (r.literal) ++literal[c];
        }
    });
    std::size_t lit = 0;
    for (auto v : literal) lit += v;
    rep.info["instances"] = specs.size() * opt.series;
    rep.info["T_equals_2^{d-m}C"] = lit;
    return rep;
}

// ---------------------------------------------------------------- trends

namespace {

void finish_trend(TrendReport& rep) {
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (abs(rep.rows[i].value) > abs(rep.rows[i - 1].value)) rep.nonincreasing = false;
    for (std::size_t i = rep.rows.size(); i-- > 0;) {
        if (rep.rows[i].value != 0) break;
        rep.zero_from = rep.rows[i].index;
    }
}

}  // namespace

json TrendReport::to_json() const {
    json j;
    j["mode"] = mode;
    json rs = json::array();
    for (const auto& r : rows) {
        json e{{"index", r.index}, {"value", dyadic::to_string(r.value)}};
        if (mode == "walsh") e["N"] = r.N;
        rs.push_back(e);
    }
    j["rows"] = rs;
    j["nonincreasing"] = nonincreasing;
    j["zero_from"] = zero_from ? json(*zero_from) : json(nullptr);
    return j;
}

TrendReport rademacher_trend(const Quasimeasure& tau, const Partition& part, const DyadicCube& upper_cube,
                             const DyadicPoint& xi, const std::vector<unsigned>& ks) {
    TrendReport rep;
    rep.mode = "rademacher";
    for (unsigned k : ks) rep.rows.push_back({k, 0, rademacher_functional(tau, k, upper_cube, xi, part)});
    finish_trend(rep);
    return rep;
}

TrendReport walsh_trend(const Quasimeasure& tau, const std::vector<uint64_t>& N, const DyadicCube& delta,
                        unsigned max_popcount) {
    for (std::size_t i = 0; i < N.size(); ++i) {
        if (N[i] == 0) throw std::invalid_argument("walsh_trend: N_i must be positive");
        if (static_cast<unsigned>(__builtin_popcountll(N[i])) > max_popcount)
            throw std::invalid_argument("walsh_trend: #N_i exceeds the bound");
        if (i > 0 && __builtin_ctzll(N[i]) < __builtin_ctzll(N[i - 1]))
            throw std::invalid_argument("walsh_trend: lowest nonzero digit of N_i decreases");
    }
    if (N.size() >= 2 && __builtin_ctzll(N.back()) <= __builtin_ctzll(N.front()))
        throw std::invalid_argument("walsh_trend: lowest nonzero digit of N_i does not grow");
    TrendReport rep;
    rep.mode = "walsh";
    for (std::size_t i = 0; i < N.size(); ++i) rep.rows.push_back({i, N[i], walsh_functional(tau, N[i], delta)});
    finish_trend(rep);
    return rep;
}

// ---------------------------------------------------------------- elimination

RationalEliminator::RationalEliminator(std::size_t columns) : n_(columns), pivot_of_col_(columns, -1) {}

namespace {

using SparseRow = std::vector<std::pair<std::size_t, Rational>>;

// a - f * b, both sorted by column.
SparseRow axpy(const SparseRow& a, const Rational& f, const SparseRow& b) {
    SparseRow out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.emplace_back(b[j].first, -f * b[j].second);
            ++j;
        } else {
            Rational v = a[i].second - f * b[j].second;
            if (v != 0) out.emplace_back(a[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    return out;
}

const Rational* entry(const SparseRow& r, std::size_t col) {
    auto it = std::lower_bound(r.begin(), r.end(), col, [](const auto& e, std::size_t c) { return e.first < c; });
    return (it != r.end() && it->first == col) ? &it->second : nullptr;
}

}  // namespace

bool RationalEliminator::add_row(std::vector<std::pair<std::size_t, Rational>> row) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseRow clean;
    for (auto& e : row) {
        if (e.first >= n_) throw std::out_of_range("RationalEliminator: column out of range");
        if (!clean.empty() && clean.back().first == e.first) clean.back().second += e.second;
        else clean.push_back(std::move(e));
    }
    row.clear();
    for (auto& e : clean)
        if (e.second != 0) row.push_back(std::move(e));
    if (row.empty() || pivots_.size() == n_) return false;

    // Reduced rows carry no pivot column except their own, so one pass clears them.
    SparseRow work = row;
    for (const auto& [col, v] : row) {
        const long p = pivot_of_col_[col];
        if (p < 0) continue;
        const Rational* cur = entry(work, col);
        if (cur) work = axpy(work, Rational(*cur), rows_[static_cast<std::size_t>(p)]);
    }
    if (work.empty()) return false;

    // Pivot: smallest |num| * den, ties to the lowest column.
    std::size_t best = 0;
    BigInt best_w;
    for (std::size_t i = 0; i < work.size(); ++i) {
        BigInt w = abs(work[i].second.get_num()) * work[i].second.get_den();
        if (i == 0 || w < best_w) {
            best = i;
            best_w = w;
        }
    }
    const std::size_t pc = work[best].first;
    const Rational inv = 1 / work[best].second;
    for (auto& e : work) e.second *= inv;

    for (std::size_t r : pivots_) {
        const Rational* v = entry(rows_[r], pc);
        if (v) rows_[r] = axpy(rows_[r], Rational(*v), work);
    }
    rows_.push_back(std::move(work));
    pivot_of_col_[pc] = static_cast<long>(rows_.size() - 1);
    pivots_.push_back(rows_.size() - 1);
    return true;
}

std::vector<std::vector<Rational>> RationalEliminator::nullspace(std::size_t max_vectors) const {
    std::vector<std::vector<Rational>> out;
    for (std::size_t f = 0; f < n_ && out.size() < max_vectors; ++f) {
        if (pivot_of_col_[f] >= 0) continue;
        std::vector<Rational> x(n_, Rational(0));
        x[f] = 1;
        for (std::size_t c = 0; c < n_; ++c) {
            const long p = pivot_of_col_[c];
            if (p < 0) continue;
            const Rational* v = entry(rows_[static_cast<std::size_t>(p)], f);
            if (v) x[c] = -*v;
        }
        out.push_back(std::move(x));
    }
    return out;
}

// ---------------------------------------------------------------- falsifier

json FalsifierResult::to_json() const {
    json j;
    j["set"] = set;
    j["d"] = d;
    j["K"] = K;
    j["unknowns"] = unknowns;
    j["equations"] = equations;
    j["rank"] = rank;
    j["dimension"] = dimension;
    j["basis_returned"] = basis.size();
    j["label"] = label;
    return j;
}

FalsifierResult uset_falsify(const SetSpec& E, unsigned K, const FalsifierConstraints& c, std::size_t max_basis) {
    const std::size_t d = E.d;
    if (!((d == 2 && K <= 6) || (d == 3 && K <= 4) || (d == 1 && K <= 12)))
        throw std::invalid_argument("uset_falsify: 2^{Kd} too large (d=2: K <= 6, d=3: K <= 4)");
    const std::size_t leaves = std::size_t{1} << (K * d);
    std::vector<uint8_t> allowed(leaves, 1);
    if (c.support) allowed = set_mask(E, K).cells;

    FalsifierResult res;
    res.set = describe(E);
    res.d = d;
    res.K = K;
    res.label = kFalsifierLabel;

    // Column numbering: leaves first (only allowed ones in implicit mode), then coarser ranks.
    std::vector<long> leaf_col(leaves, -1);
    std::size_t cols = 0;
    std::vector<std::size_t> level_base(K + 1, 0);
    if (c.explicit_table) {
        for (std::size_t f = 0; f < leaves; ++f) leaf_col[f] = static_cast<long>(cols++);
        for (unsigned r = K; r-- > 0;) {
            level_base[r] = cols;
            cols += std::size_t{1} << (r * d);
        }
    } else {
        for (std::size_t f = 0; f < leaves; ++f)
            if (allowed[f]) leaf_col[f] = static_cast<long>(cols++);
    }
    res.unknowns = cols;
    RationalEliminator elim(cols);
    auto push = [&](SparseRow row) {
        ++res.equations;
        elim.add_row(std::move(row));
    };

    if (c.explicit_table) {
        for (unsigned r = 0; r < K; ++r) {
            for (uint64_t f = 0; f < (uint64_t{1} << (r * d)); ++f) {
                SparseRow row{{level_base[r] + f, Rational(1)}};
                for (const DyadicCube& ch : subdivide(DyadicCube::from_flat(r, d, f))) {
                    const std::size_t col = ch.k == K ? static_cast<std::size_t>(leaf_col[ch.flat()])
                                                      : level_base[ch.k] + ch.flat();
                    row.emplace_back(col, Rational(-1));
                }
                push(std::move(row));
            }
        }
        if (c.support)
            for (std::size_t f = 0; f < leaves; ++f)
                if (!allowed[f]) push({{static_cast<std::size_t>(leaf_col[f]), Rational(1)}});
    }

    auto leaf_row = [&](const std::vector<std::pair<unsigned, uint64_t>>& sides,
                        const std::function<bool(const std::vector<uint64_t>&)>& odd) {
        SparseRow row;
        std::vector<uint64_t> lo, hi;
        box_of(sides, K, lo, hi);
        for_each_in_box(lo, hi, K, [&](uint64_t f, const std::vector<uint64_t>& idx) {
            if (leaf_col[f] < 0 || (!c.explicit_table && !allowed[f])) return;
            row.emplace_back(static_cast<std::size_t>(leaf_col[f]), Rational(odd(idx) ? -1 : 1));
        });
        return row;
    };

    if (c.rademacher_max_k) {
        std::vector<Partition> parts = c.partitions;
        if (parts.empty()) {
            for (uint64_t mask = 0; mask < (uint64_t{1} << d); ++mask) {
                if (static_cast<std::size_t>(__builtin_popcountll(mask)) > d - 1) continue;
                std::vector<std::size_t> lower;
                for (std::size_t l = 0; l < d; ++l)
                    if ((mask >> l) & 1u) lower.push_back(l);
                parts.push_back(Partition::with_lower(d, lower));
            }
        }
        const unsigned kmax = std::min(*c.rademacher_max_k, K - 1);
        for (const Partition& part : parts) {
            const std::size_t mu = part.upper.size(), ml = part.lower.size();
            for (unsigned k = 0; k <= kmax && K >= 1; ++k) {
                for (unsigned su = 0; su <= k; ++su) {
                    for (uint64_t u = 0; u < (uint64_t{1} << (su * mu)); ++u) {
                        for (uint64_t x = 0; x < (uint64_t{1} << (k * ml)); ++x) {
                            std::vector<std::pair<unsigned, uint64_t>> sides(d);
                            for (std::size_t i = 0; i < mu; ++i)
                                sides[part.upper[i]] = {su, (u >> (su * (mu - 1 - i))) & ((uint64_t{1} << su) - 1)};
                            for (std::size_t i = 0; i < ml; ++i)
                                sides[part.lower[i]] = {k, (x >> (k * (ml - 1 - i))) & ((uint64_t{1} << k) - 1)};
                            push(leaf_row(sides, [&](const std::vector<uint64_t>& idx) {
                                bool odd = false;
                                for (std::size_t l : part.upper) odd ^= (idx[l] >> (K - 1 - k)) & 1u;
                                return odd;
                            }));
                        }
                    }
                }
            }
        }
    }

    for (uint64_t N : c.walsh_N) {
        if (bit_length(N) > K) throw std::out_of_range("uset_falsify: Walsh index needs a larger K");
        for (unsigned r = 0; r <= K; ++r) {
            for (uint64_t f = 0; f < (uint64_t{1} << (r * d)); ++f) {
                const DyadicCube cube = DyadicCube::from_flat(r, d, f);
                std::vector<std::pair<unsigned, uint64_t>> sides;
                for (uint64_t mi : cube.m) sides.push_back({r, mi});
                push(leaf_row(sides, [&](const std::vector<uint64_t>& idx) {
                    bool odd = false;
                    for (uint64_t v : idx) odd ^= parity(N & reverse_bits(v, K));
                    return odd;
                }));
            }
        }
    }

    res.rank = elim.rank();
    res.dimension = cols - res.rank;
    for (const auto& v : elim.nullspace(max_basis)) {
        std::vector<Rational> lv(leaves, Rational(0));
        for (std::size_t f = 0; f < leaves; ++f)
            if (leaf_col[f] >= 0) lv[f] = v[static_cast<std::size_t>(leaf_col[f])];
        res.basis.push_back(Quasimeasure::from_leaves(d, K, lv));
    }
    return res;
}

}  // namespace dyadic
