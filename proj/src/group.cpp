#include "dyadic/group.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dyadic {

namespace {

std::size_t words_for(std::size_t rank) { return (rank + 63) / 64; }

uint64_t tail_mask(std::size_t w, std::size_t rank) {
    std::size_t lo = 64 * w;
    if (lo >= rank) return ~uint64_t{0};
    if (lo + 64 <= rank) return 0;
    return ~uint64_t{0} << (rank - lo);
}

}  // namespace

DyadicElement::DyadicElement() : words_(1, 0), rank_(1), tail_(Tail::AllZeros) {}

DyadicElement::DyadicElement(const std::vector<uint8_t>& digits, Tail tail)
    : words_(words_for(std::max<std::size_t>(digits.size(), 1)), 0),
      rank_(std::max<std::size_t>(digits.size(), 1)),
      tail_(tail) {
    if (digits.empty()) {
        if (tail == Tail::AllOnes) words_[0] = 1;
        return;
    }
    for (std::size_t t = 0; t < digits.size(); ++t) {
        if (digits[t] > 1) throw std::invalid_argument("digit must be 0 or 1");
        if (digits[t]) words_[t / 64] |= uint64_t{1} << (t % 64);
    }
}

DyadicElement DyadicElement::zero(std::size_t rank) {
    return DyadicElement(std::vector<uint8_t>(std::max<std::size_t>(rank, 1), 0));
}

DyadicElement DyadicElement::all_ones(std::size_t rank) {
    return DyadicElement(std::vector<uint8_t>(std::max<std::size_t>(rank, 1), 1), Tail::AllOnes);
}

DyadicElement DyadicElement::unit(std::size_t k) {
    std::vector<uint8_t> d(k + 1, 0);
    d[k] = 1;
    return DyadicElement(d);
}

DyadicElement DyadicElement::from_bits(uint64_t bits, std::size_t rank, Tail tail) {
    if (rank == 0 || rank > 64) throw std::invalid_argument("from_bits: rank must be in 1..64");
    std::vector<uint8_t> d(rank);
    for (std::size_t t = 0; t < rank; ++t) d[t] = (bits >> t) & 1u;
    return DyadicElement(d, tail);
}

DyadicElement DyadicElement::parse(std::string_view text) {
    auto bar = text.find('|');
    if (bar == std::string_view::npos || bar + 2 != text.size() || bar == 0) {
        throw std::invalid_argument("element literal must look like '0110|0': '" + std::string(text) + "'");
    }
    std::vector<uint8_t> digits;
    for (std::size_t i = 0; i < bar; ++i) {
        char c = text[i];
        if (c != '0' && c != '1') throw std::invalid_argument("bad digit in '" + std::string(text) + "'");
        digits.push_back(static_cast<uint8_t>(c - '0'));
    }
    char t = text[bar + 1];
    if (t != '0' && t != '1') throw std::invalid_argument("bad tail marker in '" + std::string(text) + "'");
    return DyadicElement(digits, t == '1' ? Tail::AllOnes : Tail::AllZeros);
}

bool DyadicElement::digit(std::size_t t) const {
    if (t >= rank_) return tail_ == Tail::AllOnes;
    return (words_[t / 64] >> (t % 64)) & 1u;
}

uint64_t DyadicElement::word(std::size_t w) const {
    uint64_t v = w < words_.size() ? words_[w] : 0;
    if (tail_ == Tail::AllOnes) v |= tail_mask(w, rank_);
    return v;
}

DyadicElement DyadicElement::extended(std::size_t rank) const {
    if (rank <= rank_) return *this;
    DyadicElement r = *this;
    r.words_.assign(words_for(rank), 0);
    for (std::size_t w = 0; w < r.words_.size(); ++w) r.words_[w] = word(w);
    r.rank_ = rank;
    r.words_.back() &= ~tail_mask(r.words_.size() - 1, rank);
    return r;
}

DyadicElement DyadicElement::truncated(std::size_t k, Tail tail) const {
    std::vector<uint8_t> d(std::max<std::size_t>(k, 1));
    for (std::size_t t = 0; t < k; ++t) d[t] = digit(t);
    if (k == 0) d[0] = tail == Tail::AllOnes;
    return DyadicElement(d, tail);
}

bool DyadicElement::is_zero() const {
    if (tail_ == Tail::AllOnes) return false;
    return std::all_of(words_.begin(), words_.end(), [](uint64_t w) { return w == 0; });
}

std::string DyadicElement::str() const {
    std::string s;
    s.reserve(rank_ + 2);
    for (std::size_t t = 0; t < rank_; ++t) s.push_back(digit(t) ? '1' : '0');
    s += tail_ == Tail::AllOnes ? "|1" : "|0";
    return s;
}

bool operator==(const DyadicElement& a, const DyadicElement& b) {
    if (a.tail_ != b.tail_) return false;
    std::size_t n = words_for(std::max(a.rank_, b.rank_));
    for (std::size_t w = 0; w < n; ++w) {
        if (a.word(w) != b.word(w)) return false;
    }
    return true;
}

DyadicElement operator^(const DyadicElement& a, const DyadicElement& b) {
    std::size_t rank = std::max(a.rank_, b.rank_);
    DyadicElement r;
    r.rank_ = rank;
    r.tail_ = a.tail_ == b.tail_ ? Tail::AllZeros : Tail::AllOnes;
    r.words_.assign(words_for(rank), 0);
    for (std::size_t w = 0; w < r.words_.size(); ++w) r.words_[w] = a.word(w) ^ b.word(w);
    r.words_.back() &= ~tail_mask(r.words_.size() - 1, rank);
    return r;
}

DyadicPoint::DyadicPoint(std::vector<DyadicElement> components) : comps_(std::move(components)) {
    std::size_t rank = 0;
    for (const auto& c : comps_) rank = std::max(rank, c.rank());
    for (auto& c : comps_) c = c.extended(rank);
}

DyadicPoint DyadicPoint::zero(std::size_t d, std::size_t rank) {
    return DyadicPoint(std::vector<DyadicElement>(d, DyadicElement::zero(rank)));
}

DyadicPoint DyadicPoint::parse(std::string_view text) {
    std::vector<DyadicElement> comps;
    std::size_t start = 0;
    while (true) {
        auto comma = text.find(',', start);
        comps.push_back(DyadicElement::parse(text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return DyadicPoint(std::move(comps));
}

DyadicPoint DyadicPoint::extended(std::size_t rank) const {
    std::vector<DyadicElement> c;
    c.reserve(comps_.size());
    for (const auto& e : comps_) c.push_back(e.extended(rank));
    return DyadicPoint(std::move(c));
}

std::string DyadicPoint::str() const {
    std::string s;
    for (std::size_t l = 0; l < comps_.size(); ++l) {
        if (l) s += ',';
        s += comps_[l].str();
    }
    return s;
}

bool operator==(const DyadicPoint& a, const DyadicPoint& b) {
    if (a.dim() != b.dim()) return false;
    for (std::size_t l = 0; l < a.dim(); ++l) {
        if (a[l] != b[l]) return false;
    }
    return true;
}

DyadicPoint add(const DyadicPoint& g, const DyadicPoint& h) {
    if (g.dim() != h.dim()) throw std::invalid_argument("add: dimension mismatch");
    std::vector<DyadicElement> c;
    c.reserve(g.dim());
    for (std::size_t l = 0; l < g.dim(); ++l) c.push_back(g[l] ^ h[l]);
    return DyadicPoint(std::move(c));
}

uint64_t DyadicCube::flat() const {
    uint64_t f = 0;
    for (uint64_t v : m) f = (f << k) | v;
    return f;
}

DyadicCube DyadicCube::from_flat(unsigned k, std::size_t d, uint64_t flat) {
    DyadicCube c;
    c.k = k;
    c.m.assign(d, 0);
    uint64_t mask = k >= 64 ? ~uint64_t{0} : (uint64_t{1} << k) - 1;
    for (std::size_t l = d; l-- > 0;) {
        c.m[l] = flat & mask;
        flat = k >= 64 ? 0 : flat >> k;
    }
    return c;
}

DyadicCube DyadicCube::parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("cube literal must look like 'k:m1,m2'");
    DyadicCube c;
    try {
        c.k = static_cast<unsigned>(std::stoul(std::string(text.substr(0, colon))));
        std::string rest(text.substr(colon + 1));
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) c.m.push_back(std::stoull(item));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bad cube literal '" + std::string(text) + "'");
    }
    if (c.m.empty() || c.k > 62) throw std::invalid_argument("bad cube literal '" + std::string(text) + "'");
    for (uint64_t v : c.m) {
        if (v >= (uint64_t{1} << c.k)) throw std::invalid_argument("cube index out of range in '" + std::string(text) + "'");
    }
    return c;
}

std::string DyadicCube::str() const {
    std::string s = std::to_string(k) + ":";
    for (std::size_t l = 0; l < m.size(); ++l) {
        if (l) s += ',';
        s += std::to_string(m[l]);
    }
    return s;
}

DyadicElement DyadicCube::corner(std::size_t l) const {
    std::vector<uint8_t> d(std::max<unsigned>(k, 1), 0);
    for (unsigned t = 0; t < k; ++t) d[t] = (m[l] >> (k - 1 - t)) & 1u;
    return DyadicElement(d);
}

DyadicPoint DyadicCube::corner() const {
    std::vector<DyadicElement> c;
    for (std::size_t l = 0; l < m.size(); ++l) c.push_back(corner(l));
    return DyadicPoint(std::move(c));
}

bool DyadicCube::contains(const DyadicPoint& g) const {
    if (g.dim() != m.size()) return false;
    for (std::size_t l = 0; l < m.size(); ++l) {
        if (interval_index(g[l], k) != m[l]) return false;
    }
    return true;
}

bool DyadicCube::contains(const DyadicCube& other) const {
    if (other.m.size() != m.size() || other.k < k) return false;
    for (std::size_t l = 0; l < m.size(); ++l) {
        if ((other.m[l] >> (other.k - k)) != m[l]) return false;
    }
    return true;
}

uint64_t interval_index(const DyadicElement& g, unsigned k) {
    if (k > 63) throw std::invalid_argument("interval_index: rank above 63");
    uint64_t m = 0;
    for (unsigned t = 0; t < k; ++t) m = (m << 1) | (g.digit(t) ? 1u : 0u);
    return m;
}

DyadicCube cube_of(const DyadicPoint& g, unsigned k) {
    DyadicCube c;
    c.k = k;
    c.m.reserve(g.dim());
    for (std::size_t l = 0; l < g.dim(); ++l) c.m.push_back(interval_index(g[l], k));
    return c;
}

Rational to_unit_interval(const DyadicElement& g) {
    BigInt num = 0;
    for (std::size_t t = 0; t < g.rank(); ++t) {
        num <<= 1;
        if (g.digit(t)) num += 1;
    }
    if (g.tail() == Tail::AllOnes) num += 1;
    Rational r(num, pow2(static_cast<unsigned>(g.rank())));
    r.canonicalize();
    return r;
}

Rational measure(unsigned k, std::size_t d) { return pow2_rational(-static_cast<int>(k * d)); }

Rational measure(const DyadicCube& cube, std::size_t d) { return measure(cube.k, d); }

std::vector<DyadicCube> subdivide(const DyadicCube& cube) {
    std::size_t d = cube.dim();
    std::vector<DyadicCube> out;
    out.reserve(std::size_t{1} << d);
    for (uint64_t c = 0; c < (uint64_t{1} << d); ++c) {
        DyadicCube child;
        child.k = cube.k + 1;
        child.m.resize(d);
        for (std::size_t l = 0; l < d; ++l) child.m[l] = 2 * cube.m[l] + ((c >> (d - 1 - l)) & 1u);
        out.push_back(std::move(child));
    }
    return out;
}

bool contract_eq(const DyadicElement& g, unsigned q, const DyadicElement& h, unsigned p) {
    if (q > p) return contract_eq(h, p, g, q);
    std::size_t shift = p - q;
    std::size_t limit = std::max(g.rank(), h.rank()) + 1;
    for (std::size_t k = 0; k <= limit; ++k) {
        if (g.digit(k) != h.digit(k + shift)) return false;
    }
    return true;
}

SignVector::SignVector(std::vector<uint8_t> entries) : entries_(std::move(entries)) {
    unsigned s = 0;
    for (uint8_t e : entries_) {
        if (e > 1) throw std::invalid_argument("sign vector entries must be 0 or 1");
        s += e;
    }
    even_ = s % 2 == 0;
}

SignVector SignVector::from_mask(uint64_t mask, std::size_t d) {
    std::vector<uint8_t> e(d);
    for (std::size_t l = 0; l < d; ++l) e[l] = (mask >> (d - 1 - l)) & 1u;
    return SignVector(std::move(e));
}

DyadicPoint SignVector::shift(std::size_t k) const {
    std::vector<DyadicElement> c;
    for (uint8_t e : entries_) c.push_back(e ? DyadicElement::unit(k) : DyadicElement::zero(k + 1));
    return DyadicPoint(std::move(c));
}

std::vector<SignVector> all_sign_vectors(std::size_t d) {
    std::vector<SignVector> out;
    for (uint64_t mask = 0; mask < (uint64_t{1} << d); ++mask) out.push_back(SignVector::from_mask(mask, d));
    return out;
}

std::vector<SignVector> even_sign_vectors(std::size_t d) {
    std::vector<SignVector> out;
    for (auto& s : all_sign_vectors(d)) {
        if (s.even()) out.push_back(s);
    }
    return out;
}

}  // namespace dyadic
