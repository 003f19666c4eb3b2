#include "dyadic/numeric.hpp"

#include <stdexcept>

namespace dyadic {

Rational parse_rational(std::string_view text) {
    std::string s(text);
    auto bad = [&] { return std::invalid_argument("invalid rational literal '" + s + "'"); };
    if (s.empty()) throw bad();
    auto slash = s.find('/');
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    auto digits_ok = [](const std::string& part, bool allow_sign) {
        size_t i = 0;
        if (allow_sign && !part.empty() && (part[0] == '-' || part[0] == '+')) i = 1;
        if (i >= part.size()) return false;
        for (; i < part.size(); ++i) {
            if (part[i] < '0' || part[i] > '9') return false;
        }
        return true;
    };
    if (!digits_ok(num, true) || !digits_ok(den, false)) throw bad();
    if (num[0] == '+') num.erase(0, 1);
    BigInt p(num, 10);
    BigInt q(den, 10);
    if (q == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    Rational r(p, q);
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& r) { return r.get_str(10); }

std::string to_string(const BigInt& n) { return n.get_str(10); }

BigInt pow2(unsigned k) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
    return r;
}

Rational pow2_rational(int k) {
    if (k >= 0) return Rational(pow2(static_cast<unsigned>(k)));
    Rational r(BigInt(1), pow2(static_cast<unsigned>(-k)));
    return r;
}

bool fits_int64(const BigInt& n) { return mpz_fits_slong_p(n.get_mpz_t()) != 0; }

}  // namespace dyadic
