#include "dyadic/walsh.hpp"

#include "dyadic/series.hpp"

#include <stdexcept>

namespace dyadic {

WalshIndex::WalshIndex(BigInt n) : n_(std::move(n)) {
    if (n_ < 0) throw std::invalid_argument("Walsh index must be nonnegative");
}

unsigned WalshIndex::bit_length() const {
    return n_ == 0 ? 0u : static_cast<unsigned>(mpz_sizeinbase(n_.get_mpz_t(), 2));
}

unsigned WalshIndex::lowest_bit() const {
    if (n_ == 0) throw std::invalid_argument("lowest_bit of zero");
    return static_cast<unsigned>(mpz_scan1(n_.get_mpz_t(), 0));
}

uint64_t WalshIndex::to_u64() const {
    if (!fits_u64()) throw std::overflow_error("Walsh index does not fit 64 bits");
    uint64_t v = 0;
    if (mpz_size(n_.get_mpz_t()) > 0) v = mpz_getlimbn(n_.get_mpz_t(), 0);
    return v;
}

Sign walsh_eval(uint64_t n, const DyadicElement& g) { return Sign::from_parity(parity(n & g.word(0))); }

Sign walsh_eval(const WalshIndex& n, const DyadicElement& g) {
    const mpz_srcptr z = n.value().get_mpz_t();
    static_assert(sizeof(mp_limb_t) == sizeof(uint64_t), "64-bit limbs expected");
    bool odd = false;
    for (std::size_t w = 0; w < mpz_size(z); ++w) odd ^= parity(mpz_getlimbn(z, w) & g.word(w));
    return Sign::from_parity(odd);
}

Sign walsh_eval_multi(const MultiIndex& n, const DyadicPoint& g) {
    if (n.size() != g.dim()) throw std::invalid_argument("walsh_eval_multi: dimension mismatch");
    Sign s;
    for (std::size_t l = 0; l < n.size(); ++l) s = s * walsh_eval(n[l], g[l]);
    return s;
}

Sign rademacher(unsigned k, const DyadicElement& g) { return Sign::from_parity(g.digit(k)); }

bool in_zero_cube(const DyadicElement& g, unsigned k) {
    for (unsigned t = 0; t < k; ++t) {
        if (g.digit(t)) return false;
    }
    return true;
}

BigInt dirichlet_naive(const WalshIndex& N, const DyadicElement& g) {
    if (N.is_zero()) throw std::invalid_argument("Dirichlet kernel D_0 is undefined");
    if (N.bit_length() < 63) {
        const uint64_t n_max = N.to_u64();
        const uint64_t gw = g.word(0);
        int64_t sum = 0;
        for (uint64_t n = 0; n < n_max; ++n) sum += parity(n & gw) ? -1 : 1;
        return BigInt(static_cast<long>(sum));
    }
    BigInt sum = 0;
    for (BigInt n = 0; n < N.value(); ++n) sum += walsh_eval(WalshIndex(n), g).value();
    return sum;
}

BigInt dirichlet_closed(const WalshIndex& N, const DyadicElement& g) {
    if (N.is_zero()) throw std::invalid_argument("Dirichlet kernel D_0 is undefined");
    BigInt sum = 0;
    Sign prefix;
    for (unsigned k = N.bit_length(); k-- > 0;) {
        if (!N.coefficient(k)) continue;
        if (in_zero_cube(g, k)) {
            BigInt term = pow2(k);
            if (prefix.negative()) sum -= term;
            else sum += term;
        }
        prefix = prefix * rademacher(k, g);
    }
    return sum;
}

BigInt dirichlet_multi(const MultiIndex& N, const DyadicPoint& g) {
    if (N.size() != g.dim()) throw std::invalid_argument("dirichlet_multi: dimension mismatch");
    BigInt p = 1;
    for (std::size_t l = 0; l < N.size(); ++l) {
        p *= dirichlet_closed(N[l], g[l]);
        if (p == 0) break;
    }
    return p;
}

unsigned vanishing_rank(const WalshIndex& N) {
    if (N.is_zero()) throw std::invalid_argument("vanishing_rank of zero");
    return N.lowest_bit();
}

std::vector<Rational> fwht_table(const SeriesSpec& series, unsigned k) {
    const std::size_t d = series.dim();
    series.require_known_below(k);
    std::vector<BigInt> a = series.scaled_block(k);
    hadamard_transform(a, d, k);
    const BigInt& den = series.denominator();
    const std::size_t side = std::size_t{1} << k;
    std::vector<Rational> out(a.size());
    for (std::size_t u = 0; u < a.size(); ++u) {
        // Entry u belongs to the cube whose index is the coordinatewise bit reversal of u.
        std::size_t flat = 0;
        std::size_t rest = u;
        std::size_t mult = 1;
        for (std::size_t l = 0; l < d; ++l) {
            std::size_t digit = rest % side;
            rest /= side;
            flat += reverse_bits(digit, k) * mult;
            mult *= side;
        }
        out[flat] = Rational(a[u], den);
        out[flat].canonicalize();
    }
    return out;
}

}  // namespace dyadic
