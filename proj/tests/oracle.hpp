#pragma once

// Reference implementations straight from the definitions. Slow on purpose;
// they share nothing with the library beyond element digit access.

#include "dyadic/group.hpp"
#include "dyadic/numeric.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using dyadic::DyadicElement;
using dyadic::DyadicPoint;
using dyadic::Rational;
using Index = std::vector<uint64_t>;

inline DyadicElement element(const std::vector<int>& digits, bool ones_tail = false) {
    std::vector<uint8_t> d(digits.begin(), digits.end());
    return DyadicElement(d, ones_tail ? dyadic::Tail::AllOnes : dyadic::Tail::AllZeros);
}

// Element whose first k digits spell the interval index m (g_t = m_{k-1-t}).
inline DyadicElement interval_corner(unsigned k, uint64_t m) {
    std::vector<int> digits(k == 0 ? 1 : k, 0);
    for (unsigned t = 0; t < k; ++t) digits[t] = static_cast<int>((m >> (k - 1 - t)) & 1u);
    return element(digits);
}

inline int walsh(uint64_t n, const DyadicElement& g) {
    int s = 1;
    for (unsigned t = 0; t < 64; ++t)
        if (((n >> t) & 1u) && g.digit(t)) s = -s;
    return s;
}

inline int walsh(const Index& n, const DyadicPoint& g) {
    int s = 1;
    for (std::size_t l = 0; l < n.size(); ++l) s *= walsh(n[l], g[l]);
    return s;
}

inline long dirichlet(uint64_t N, const DyadicElement& g) {
    long s = 0;
    for (uint64_t n = 0; n < N; ++n) s += walsh(n, g);
    return s;
}

using Coeffs = std::map<Index, Rational>;

inline Rational partial_sum(const Coeffs& c, const Index& N, const DyadicPoint& g) {
    Rational s = 0;
    for (const auto& [n, v] : c) {
        bool in = true;
        for (std::size_t l = 0; l < n.size(); ++l) in = in && n[l] < N[l];
        if (in) s += v * walsh(n, g);
    }
    return s;
}

inline DyadicPoint cube_corner(unsigned k, const std::vector<uint64_t>& m) {
    std::vector<DyadicElement> comps;
    for (uint64_t v : m) comps.push_back(interval_corner(k, v));
    return DyadicPoint(comps);
}

// tau(cube) = 2^{-kd} S_{2^k}(cube), flat index row-major with coordinate 0 first.
inline std::vector<Rational> quasimeasure_level(const Coeffs& c, std::size_t d, unsigned k) {
    const uint64_t side = uint64_t{1} << k;
    uint64_t total = 1;
    for (std::size_t l = 0; l < d; ++l) total *= side;
    std::vector<Rational> out(total);
    const Rational scale(1, dyadic::pow2(static_cast<unsigned>(k * d)));
    for (uint64_t f = 0; f < total; ++f) {
        std::vector<uint64_t> m(d);
        uint64_t rest = f;
        for (std::size_t l = d; l-- > 0;) {
            m[l] = rest % side;
            rest /= side;
        }
        out[f] = partial_sum(c, Index(d, side), cube_corner(k, m)) * scale;
    }
    return out;
}

inline Coeffs random_coeffs(std::mt19937_64& rng, std::size_t d, unsigned bound, double density) {
    Coeffs c;
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 9);
    const uint64_t side = uint64_t{1} << bound;
    Index n(d, 0);
    while (true) {
        if (u(rng) < density) {
            Rational v(num(rng), den(rng));
            v.canonicalize();
            if (v != 0) c[n] = v;
        }
        std::size_t l = 0;
        while (l < d && ++n[l] == side) n[l++] = 0;
        if (l == d) break;
    }
    return c;
}

inline DyadicElement random_element(std::mt19937_64& rng, std::size_t rank) {
    std::vector<int> digits(rank);
    for (auto& b : digits) b = static_cast<int>(rng() & 1u);
    return element(digits, (rng() & 1u) != 0);
}

inline DyadicPoint random_point(std::mt19937_64& rng, std::size_t d, std::size_t rank) {
    std::vector<DyadicElement> comps;
    for (std::size_t l = 0; l < d; ++l) comps.push_back(random_element(rng, rank));
    return DyadicPoint(comps);
}

// Exact rank over Q by plain Gauss-Jordan on a dense matrix.
inline std::size_t rational_rank(std::vector<std::vector<Rational>> a) {
    std::size_t rank = 0;
    const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[rank]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || a[r][c] == 0) continue;
            const Rational f = a[r][c] / a[rank][c];
            for (std::size_t j = c; j < cols; ++j) a[r][j] -= f * a[rank][j];
        }
        ++rank;
    }
    return rank;
}

}  // namespace oracle
