#include "dyadic/quasimeasure.hpp"

#include "dyadic/parallel.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dyadic {

namespace {

std::size_t level_size(std::size_t d, unsigned k) {
    if (k * d > 40) throw std::length_error("quasimeasure table too large");
    return std::size_t{1} << (k * d);
}

// Maps transform position u to the flat index of its cube (coordinatewise bit reversal).
std::vector<std::size_t> reversal_permutation(std::size_t d, unsigned k) {
    const std::size_t side = std::size_t{1} << k;
    std::vector<std::size_t> perm(level_size(d, k));
    for (std::size_t u = 0; u < perm.size(); ++u) {
        std::size_t flat = 0;
        std::size_t rest = u;
        std::size_t mult = 1;
        for (std::size_t l = 0; l < d; ++l) {
            flat += reverse_bits(rest % side, k) * mult;
            rest /= side;
            mult *= side;
        }
        perm[u] = flat;
    }
    return perm;
}

// Flat indices of the rank-r cubes inside P, in increasing order.
template <typename F>
void for_each_cube_in(const Parallelepiped& P, unsigned r, F&& f) {
    const std::size_t d = P.dim();
    std::vector<uint64_t> lo(d), count(d), cur(d, 0);
    for (std::size_t l = 0; l < d; ++l) {
        auto [kl, ml] = P.sides[l];
        lo[l] = ml << (r - kl);
        count[l] = uint64_t{1} << (r - kl);
    }
    while (true) {
        uint64_t flat = 0;
        for (std::size_t l = 0; l < d; ++l) flat = (flat << r) | (lo[l] + cur[l]);
        f(flat);
        std::size_t l = d;
        while (l-- > 0) {
            if (++cur[l] < count[l]) break;
            cur[l] = 0;
        }
        if (l == static_cast<std::size_t>(-1)) break;
    }
}

uint64_t coordinate_of(uint64_t flat, std::size_t l, std::size_t d, unsigned r) {
    const uint64_t mask = (uint64_t{1} << r) - 1;
    return (flat >> (r * (d - 1 - l))) & mask;
}

}  // namespace

RationalTable::RationalTable(std::vector<int64_t> nums, BigInt den)
    : small_(true), small_nums_(std::move(nums)), den_(std::move(den)) {
    if (den_ <= 0) throw std::invalid_argument("table denominator must be positive");
}

RationalTable::RationalTable(std::vector<BigInt> nums, BigInt den) : den_(std::move(den)) {
    if (den_ <= 0) throw std::invalid_argument("table denominator must be positive");
    small_ = std::all_of(nums.begin(), nums.end(), [](const BigInt& v) { return fits_int64(v); });
    if (small_) {
        small_nums_.reserve(nums.size());
        for (const auto& v : nums) small_nums_.push_back(v.get_si());
    } else {
        big_nums_ = std::move(nums);
    }
}

RationalTable RationalTable::from_values(const std::vector<Rational>& values) {
    BigInt den = 1;
    for (const auto& v : values) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
    std::vector<BigInt> nums;
    nums.reserve(values.size());
    for (const auto& v : values) nums.push_back(v.get_num() * (den / v.get_den()));
    return RationalTable(std::move(nums), den);
}

Rational RationalTable::get(std::size_t i) const {
    Rational r(numerator(i), den_);
    r.canonicalize();
    return r;
}

BigInt RationalTable::numerator(std::size_t i) const {
    if (small_) return BigInt(static_cast<long>(small_nums_.at(i)));
    return big_nums_.at(i);
}

bool RationalTable::is_zero(std::size_t i) const { return small_ ? small_nums_.at(i) == 0 : big_nums_.at(i) == 0; }

Quasimeasure::Quasimeasure(std::size_t d, unsigned K, std::vector<RationalTable> levels)
    : d_(d), K_(K), levels_(std::move(levels)) {
    if (d == 0) throw std::invalid_argument("quasimeasure dimension must be at least 1");
    if (levels_.size() != K + 1) throw std::invalid_argument("quasimeasure needs one table per rank 0..K");
    for (unsigned k = 0; k <= K; ++k) {
        if (levels_[k].size() != level_size(d, k)) throw std::invalid_argument("quasimeasure table has wrong size");
    }
}

Quasimeasure Quasimeasure::zero(std::size_t d, unsigned K) {
    std::vector<RationalTable> levels;
    for (unsigned k = 0; k <= K; ++k) levels.emplace_back(std::vector<int64_t>(level_size(d, k), 0), BigInt(1));
    return Quasimeasure(d, K, std::move(levels));
}

Quasimeasure Quasimeasure::from_leaves(std::size_t d, unsigned K, const std::vector<Rational>& leaves) {
    if (leaves.size() != level_size(d, K)) throw std::invalid_argument("from_leaves: wrong number of leaf values");
    BigInt den = 1;
    for (const auto& v : leaves) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
    std::vector<std::vector<BigInt>> nums(K + 1);
    nums[K].reserve(leaves.size());
    for (const auto& v : leaves) nums[K].push_back(v.get_num() * (den / v.get_den()));
    for (unsigned k = K; k-- > 0;) {
        nums[k].assign(level_size(d, k), BigInt(0));
        for (std::size_t c = 0; c < nums[k + 1].size(); ++c) {
            std::size_t parent = 0;
            for (std::size_t l = 0; l < d; ++l) parent = (parent << k) | (coordinate_of(c, l, d, k + 1) >> 1);
            nums[k][parent] += nums[k + 1][c];
        }
    }
    std::vector<RationalTable> levels;
    for (unsigned k = 0; k <= K; ++k) levels.emplace_back(std::move(nums[k]), den);
    return Quasimeasure(d, K, std::move(levels));
}

Quasimeasure Quasimeasure::from_table(std::size_t d, unsigned K, const std::vector<std::vector<Rational>>& values) {
    if (values.size() != K + 1) throw std::invalid_argument("from_table: need one level per rank 0..K");
    std::vector<RationalTable> levels;
    for (const auto& v : values) levels.push_back(RationalTable::from_values(v));
    return Quasimeasure(d, K, std::move(levels));
}

Rational Quasimeasure::value(const DyadicCube& cube) const {
    if (cube.dim() != d_) throw std::invalid_argument("cube dimension mismatch");
    if (cube.k > K_) throw std::out_of_range("cube rank " + std::to_string(cube.k) + " above quasimeasure rank");
    return levels_[cube.k].get(cube.flat());
}

Quasimeasure quasimeasure_from_series(const SeriesSpec& series, unsigned K) {
    const std::size_t d = series.dim();
    series.require_known_below(K);
    level_size(d, K);
    std::vector<RationalTable> levels(K + 1);
    parallel_for(K + 1, [&](std::size_t kk) {
        const unsigned k = static_cast<unsigned>(kk);
        const auto perm = reversal_permutation(d, k);
        BigInt den = series.denominator() * pow2(static_cast<unsigned>(k * d));
        if (series.small_numerators()) {
            auto a = series.scaled_block_i64(k);
            hadamard_transform(a, d, k);
            std::vector<int64_t> nums(a.size());
            for (std::size_t u = 0; u < a.size(); ++u) nums[perm[u]] = a[u];
            levels[k] = RationalTable(std::move(nums), den);
        } else {
            auto a = series.scaled_block(k);
            hadamard_transform(a, d, k);
            std::vector<BigInt> nums(a.size());
            for (std::size_t u = 0; u < a.size(); ++u) nums[perm[u]] = std::move(a[u]);
            levels[k] = RationalTable(std::move(nums), den);
        }
    });
    return Quasimeasure(d, K, std::move(levels));
}

Quasimeasure quasimeasure_from_series_naive(const SeriesSpec& series, unsigned K) {
    const std::size_t d = series.dim();
    series.require_known_below(K);
    std::vector<RationalTable> levels;
    for (unsigned k = 0; k <= K; ++k) {
        std::vector<BigInt> nums(level_size(d, k));
        for (std::size_t f = 0; f < nums.size(); ++f) {
            DyadicCube cube = DyadicCube::from_flat(k, d, f);
            nums[f] = series.scaled_partial_sum(Index(d, uint64_t{1} << k), cube.corner());
        }
        levels.emplace_back(std::move(nums), series.denominator() * pow2(static_cast<unsigned>(k * d)));
    }
    return Quasimeasure(d, K, std::move(levels));
}

Rational recover_coefficient(const Quasimeasure& tau, const Index& n) {
    const std::size_t d = tau.dim();
    const unsigned K = tau.max_rank();
    if (n.size() != d) throw std::invalid_argument("recover_coefficient: dimension mismatch");
    for (uint64_t v : n) {
        if (v >= (uint64_t{1} << K)) throw std::out_of_range("recover_coefficient: index beyond 2^K");
    }
    const RationalTable& t = tau.level(K);
    BigInt acc = 0;
    for (std::size_t f = 0; f < t.size(); ++f) {
        bool odd = false;
        for (std::size_t l = 0; l < d; ++l) odd ^= parity(n[l] & reverse_bits(coordinate_of(f, l, d, K), K));
        if (odd) acc -= t.numerator(f);
        else acc += t.numerator(f);
    }
    Rational r(acc, t.denominator());
    r.canonicalize();
    return r;
}

AdditivityReport check_additivity(const Quasimeasure& tau) {
    const std::size_t d = tau.dim();
    AdditivityReport rep;
    for (unsigned k = 0; k < tau.max_rank(); ++k) {
        const RationalTable& parent = tau.level(k);
        const RationalTable& child = tau.level(k + 1);
        std::vector<BigInt> sums(parent.size(), BigInt(0));
        for (std::size_t c = 0; c < child.size(); ++c) {
            std::size_t p = 0;
            for (std::size_t l = 0; l < d; ++l) p = (p << k) | (coordinate_of(c, l, d, k + 1) >> 1);
            sums[p] += child.numerator(c);
        }
        for (std::size_t p = 0; p < parent.size(); ++p) {
            if (parent.numerator(p) * child.denominator() != sums[p] * parent.denominator()) {
                rep.ok = false;
                rep.parent = DyadicCube::from_flat(k, d, p);
                rep.parent_value = parent.get(p);
                rep.children_sum = Rational(sums[p], child.denominator());
                rep.children_sum.canonicalize();
                return rep;
            }
        }
    }
    return rep;
}

bool SupportMask::contains(const DyadicCube& cube) const {
    if (cube.k != K || cube.dim() != d) throw std::invalid_argument("support mask query must use rank-K cubes");
    return cells.at(cube.flat()) != 0;
}

std::size_t SupportMask::count() const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }

std::vector<DyadicCube> SupportMask::list() const {
    std::vector<DyadicCube> out;
    for (std::size_t f = 0; f < cells.size(); ++f) {
        if (cells[f]) out.push_back(DyadicCube::from_flat(K, d, f));
    }
    return out;
}

SupportMask support_mask(const Quasimeasure& tau) {
    SupportMask mask;
    mask.d = tau.dim();
    mask.K = tau.max_rank();
    const RationalTable& leaves = tau.level(mask.K);
    mask.cells.resize(leaves.size());
    for (std::size_t f = 0; f < leaves.size(); ++f) mask.cells[f] = leaves.is_zero(f) ? 0 : 1;
    return mask;
}

Parallelepiped Parallelepiped::from_cube(const DyadicCube& cube) {
    Parallelepiped p;
    for (uint64_t m : cube.m) p.sides.emplace_back(cube.k, m);
    return p;
}

Parallelepiped Parallelepiped::whole(std::size_t d) {
    Parallelepiped p;
    p.sides.assign(d, {0u, uint64_t{0}});
    return p;
}

unsigned Parallelepiped::max_rank() const {
    unsigned r = 0;
    for (auto& s : sides) r = std::max(r, s.first);
    return r;
}

std::string Parallelepiped::str() const {
    std::string s;
    for (std::size_t l = 0; l < sides.size(); ++l) {
        if (l) s += " x ";
        s += std::to_string(sides[l].first) + ":" + std::to_string(sides[l].second);
    }
    return s;
}

Rational tau_of(const Quasimeasure& tau, const Parallelepiped& P) {
    if (P.dim() != tau.dim()) throw std::invalid_argument("parallelepiped dimension mismatch");
    const unsigned r = P.max_rank();
    if (r > tau.max_rank()) throw std::out_of_range("parallelepiped finer than quasimeasure rank");
    const RationalTable& t = tau.level(r);
    BigInt acc = 0;
    for_each_cube_in(P, r, [&](uint64_t f) { acc += t.numerator(f); });
    Rational v(acc, t.denominator());
    v.canonicalize();
    return v;
}

Partition Partition::with_lower(std::size_t d, std::vector<std::size_t> lower) {
    Partition p;
    p.d = d;
    std::sort(lower.begin(), lower.end());
    if (std::adjacent_find(lower.begin(), lower.end()) != lower.end()) throw std::invalid_argument("partition repeats a coordinate");
    for (auto l : lower) {
        if (l >= d) throw std::invalid_argument("partition coordinate out of range");
    }
    if (lower.size() + 1 > d) throw std::invalid_argument("partition needs m <= d-1");
    p.lower = lower;
    for (std::size_t l = 0; l < d; ++l) {
        if (!std::binary_search(lower.begin(), lower.end(), l)) p.upper.push_back(l);
    }
    return p;
}

Rational integrate_walsh(const Quasimeasure& tau, const Index& N, const Parallelepiped& P) {
    const std::size_t d = tau.dim();
    if (N.size() != d || P.dim() != d) throw std::invalid_argument("integrate_walsh: dimension mismatch");
    unsigned r = P.max_rank();
    for (uint64_t v : N) r = std::max(r, bit_length(v));
    if (r > tau.max_rank()) {
        throw std::out_of_range("integrate_walsh: rank too small (need K >= " + std::to_string(r) + ")");
    }
    const RationalTable& t = tau.level(r);
    BigInt acc = 0;
    for_each_cube_in(P, r, [&](uint64_t f) {
        bool odd = false;
        for (std::size_t l = 0; l < d; ++l) odd ^= parity(N[l] & reverse_bits(coordinate_of(f, l, d, r), r));
        if (odd) acc -= t.numerator(f);
        else acc += t.numerator(f);
    });
    Rational v(acc, t.denominator());
    v.canonicalize();
    return v;
}

LocalizeResult localize_mass(const Quasimeasure& tau, const DyadicCube& delta, const Partition& part, unsigned k) {
    const std::size_t d = tau.dim();
    if (delta.dim() != d || part.d != d) throw std::invalid_argument("localize_mass: dimension mismatch");
    if (k < delta.k || k > tau.max_rank()) throw std::out_of_range("localize_mass: need rank(delta) <= k <= K");
    const Rational C = tau.value(delta);
    if (C == 0) throw std::invalid_argument("localize_mass: tau(delta) = 0");
    const std::size_t m = part.m();
    Parallelepiped slab = Parallelepiped::from_cube(delta);
    LocalizeResult res;
    res.chain.push_back(C);
    Rational current = C;
    for (unsigned j = delta.k; j < k; ++j) {
        Rational best;
        uint64_t best_mask = 0;
        bool have = false;
        for (uint64_t mask = 0; mask < (uint64_t{1} << m); ++mask) {
            Parallelepiped child = slab;
            for (std::size_t i = 0; i < m; ++i) {
                auto& side = child.sides[part.lower[i]];
                side = {j + 1, 2 * side.second + ((mask >> (m - 1 - i)) & 1u)};
            }
            Rational v = tau_of(tau, child);
            if (!have || abs(v) > abs(best)) {
                best = v;
                best_mask = mask;
                have = true;
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            auto& side = slab.sides[part.lower[i]];
            side = {j + 1, 2 * side.second + ((best_mask >> (m - 1 - i)) & 1u)};
        }
        current = best;
        res.chain.push_back(current);
    }
    std::vector<DyadicElement> xi;
    for (std::size_t i = 0; i < m; ++i) {
        DyadicCube c;
        c.k = k;
        c.m = {slab.sides[part.lower[i]].second};
        xi.push_back(c.corner(0));
    }
    res.xi = DyadicPoint(std::move(xi));
    res.slab_value = current;
    res.bound = abs(C) * pow2_rational(-static_cast<int>(m * (k - delta.k)));
    return res;
}

Rational rademacher_functional(const Quasimeasure& tau, unsigned k, const DyadicCube& upper_cube,
                               const DyadicPoint& xi, const Partition& part) {
    const std::size_t d = tau.dim();
    if (part.d != d || upper_cube.dim() != part.upper.size() || xi.dim() != part.lower.size()) {
        throw std::invalid_argument("rademacher_functional: dimension mismatch");
    }
    const unsigned r = std::max(k + 1, upper_cube.k);
    if (r > tau.max_rank()) throw std::out_of_range("rademacher_functional: rank too small");
    Parallelepiped P;
    P.sides.resize(d);
    for (std::size_t i = 0; i < part.upper.size(); ++i) P.sides[part.upper[i]] = {upper_cube.k, upper_cube.m[i]};
    for (std::size_t i = 0; i < part.lower.size(); ++i) P.sides[part.lower[i]] = {k, interval_index(xi[i], k)};
    const RationalTable& t = tau.level(r);
    BigInt acc = 0;
    for_each_cube_in(P, r, [&](uint64_t f) {
        bool odd = false;
        for (std::size_t l : part.upper) odd ^= (coordinate_of(f, l, d, r) >> (r - 1 - k)) & 1u;
        if (odd) acc -= t.numerator(f);
        else acc += t.numerator(f);
    });
    Rational v(acc * pow2(static_cast<unsigned>(part.m() * k)), t.denominator());
    v.canonicalize();
    return v;
}

Rational walsh_functional(const Quasimeasure& tau, uint64_t N, const DyadicCube& delta) {
    return integrate_walsh(tau, Index(tau.dim(), N), Parallelepiped::from_cube(delta));
}

void write_quasimeasure_csv(const Quasimeasure& tau, std::ostream& out) {
    const std::size_t d = tau.dim();
    out << "k";
    for (std::size_t l = 1; l <= d; ++l) out << ",m" << l;
    out << ",value\n";
    for (unsigned k = 0; k <= tau.max_rank(); ++k) {
        const RationalTable& t = tau.level(k);
        for (std::size_t f = 0; f < t.size(); ++f) {
            out << k;
            for (std::size_t l = 0; l < d; ++l) out << ',' << coordinate_of(f, l, d, k);
            out << ',' << to_string(t.get(f)) << '\n';
        }
    }
}

Quasimeasure read_quasimeasure_csv(std::istream& in) {
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.empty() || fields[0] == "k") continue;
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw std::invalid_argument("quasimeasure CSV has no rows");
    const std::size_t d = rows[0].size() - 2;
    if (rows[0].size() < 3) throw std::invalid_argument("quasimeasure CSV rows need k, indices and a value");
    unsigned K = 0;
    for (const auto& r : rows) {
        if (r.size() != d + 2) throw std::invalid_argument("quasimeasure CSV has ragged rows");
        K = std::max<unsigned>(K, static_cast<unsigned>(std::stoul(r[0])));
    }
    std::vector<std::vector<Rational>> values(K + 1);
    std::vector<std::vector<uint8_t>> seen(K + 1);
    for (unsigned k = 0; k <= K; ++k) {
        values[k].assign(level_size(d, k), Rational(0));
        seen[k].assign(values[k].size(), 0);
    }
    for (const auto& r : rows) {
        DyadicCube c;
        c.k = static_cast<unsigned>(std::stoul(r[0]));
        for (std::size_t l = 0; l < d; ++l) {
            c.m.push_back(std::stoull(r[1 + l]));
            if (c.m.back() >= (uint64_t{1} << c.k)) throw std::invalid_argument("quasimeasure CSV index out of range");
        }
        auto f = c.flat();
        values[c.k][f] = parse_rational(r[d + 1]);
        seen[c.k][f] = 1;
    }
    for (const auto& s : seen) {
        if (std::find(s.begin(), s.end(), 0) != s.end()) throw std::invalid_argument("quasimeasure CSV is missing cubes");
    }
    return Quasimeasure::from_table(d, K, values);
}

}  // namespace dyadic
