#include "dyadic/series.hpp"

#include <fstream>
#include <stdexcept>

namespace dyadic {

namespace {

constexpr unsigned kMaxBoundRank = 62;

std::string index_str(const Index& n) {
    std::string s = "(";
    for (std::size_t l = 0; l < n.size(); ++l) {
        if (l) s += ",";
        s += std::to_string(n[l]);
    }
    return s + ")";
}

}  // namespace

SeriesSpec::SeriesSpec(std::size_t d, unsigned bound_rank, std::map<Index, Rational> coeffs, bool truncated)
    : d_(d), bound_rank_(bound_rank), truncated_(truncated) {
    if (d == 0) throw std::invalid_argument("series dimension must be at least 1");
    if (bound_rank > kMaxBoundRank) throw std::invalid_argument("bound_rank above 62 is not supported");
    const uint64_t limit = uint64_t{1} << bound_rank;
    for (auto& [n, c] : coeffs) {
        if (n.size() != d) throw std::invalid_argument("coefficient index " + index_str(n) + " has wrong dimension");
        for (uint64_t v : n) {
            if (v >= limit) throw std::invalid_argument("coefficient index " + index_str(n) + " exceeds bound_rank");
        }
        c.canonicalize();
        if (c != 0) coeffs_.emplace(n, c);
    }
    for (const auto& [n, c] : coeffs_) mpz_lcm(den_.get_mpz_t(), den_.get_mpz_t(), c.get_den_mpz_t());
    terms_.reserve(coeffs_.size());
    for (const auto& [n, c] : coeffs_) {
        Term t;
        t.offset = idx_.size();
        idx_.insert(idx_.end(), n.begin(), n.end());
        t.big = c.get_num() * (den_ / c.get_den());
        l1_ += abs(t.big);
        t.small = fits_int64(t.big) ? t.big.get_si() : 0;
        terms_.push_back(std::move(t));
    }
    small_ = l1_ < pow2(62);
}

SeriesSpec SeriesSpec::constant(std::size_t d, const Rational& c0) {
    std::map<Index, Rational> m;
    m.emplace(Index(d, 0), c0);
    return SeriesSpec(d, 0, std::move(m));
}

Rational SeriesSpec::coefficient(const Index& n) const {
    if (n.size() != d_) throw std::invalid_argument("coefficient: dimension mismatch");
    if (truncated_) {
        for (uint64_t v : n) {
            if (bound_rank_ >= 64 || v >= (uint64_t{1} << bound_rank_)) {
                throw std::out_of_range("missing coefficients: index " + index_str(n) + " beyond bound_rank " +
                                        std::to_string(bound_rank_));
            }
        }
    }
    auto it = coeffs_.find(n);
    return it == coeffs_.end() ? Rational(0) : it->second;
}

void SeriesSpec::require_known_below(unsigned k) const {
    if (truncated_ && k > bound_rank_) {
        throw std::out_of_range("missing coefficients: need indices below 2^" + std::to_string(k) +
                                " but the series is known only below 2^" + std::to_string(bound_rank_));
    }
}

void SeriesSpec::require_known_below(const Index& N) const {
    if (N.size() != d_) throw std::invalid_argument("partial sum: dimension mismatch");
    for (uint64_t v : N) {
        if (v == 0) throw std::invalid_argument("partial sum: every component of N must be at least 1");
        if (truncated_ && v > (uint64_t{1} << bound_rank_)) {
            throw std::out_of_range("missing coefficients: partial sum up to " + index_str(N) +
                                    " needs indices beyond bound_rank " + std::to_string(bound_rank_));
        }
    }
}

BigInt SeriesSpec::scaled_partial_sum(const Index& N, const DyadicPoint& g) const {
    require_known_below(N);
    if (g.dim() != d_) throw std::invalid_argument("partial sum: point dimension mismatch");
    uint64_t gw[16];
    std::vector<uint64_t> gw_big;
    uint64_t* gp = gw;
    if (d_ > 16) {
        gw_big.resize(d_);
        gp = gw_big.data();
    }
    for (std::size_t l = 0; l < d_; ++l) gp[l] = g[l].word(0);
    auto sign_of = [&](const uint64_t* n) {
        bool odd = false;
        for (std::size_t l = 0; l < d_; ++l) odd ^= parity(n[l] & gp[l]);
        return odd;
    };
    auto inside = [&](const uint64_t* n) {
        for (std::size_t l = 0; l < d_; ++l) {
            if (n[l] >= N[l]) return false;
        }
        return true;
    };
    if (small_) {
        int64_t acc = 0;
        for (const Term& t : terms_) {
            const uint64_t* n = idx_.data() + t.offset;
            if (!inside(n)) continue;
            acc += sign_of(n) ? -t.small : t.small;
        }
        return BigInt(static_cast<long>(acc));
    }
    BigInt acc = 0;
    for (const Term& t : terms_) {
        const uint64_t* n = idx_.data() + t.offset;
        if (!inside(n)) continue;
        if (sign_of(n)) acc -= t.big;
        else acc += t.big;
    }
    return acc;
}

Rational SeriesSpec::partial_sum_rect(const Index& N, const DyadicPoint& g) const {
    Rational r(scaled_partial_sum(N, g), den_);
    r.canonicalize();
    return r;
}

Rational SeriesSpec::partial_sum_cube(uint64_t N, const DyadicPoint& g) const {
    return partial_sum_rect(Index(d_, N), g);
}

double SeriesSpec::partial_sum_rect_approx(const Index& N, const DyadicPoint& g) const {
    require_known_below(N);
    if (g.dim() != d_) throw std::invalid_argument("partial sum: point dimension mismatch");
    double acc = 0.0;
    for (const auto& [n, c] : coeffs_) {
        bool in = true;
        bool odd = false;
        for (std::size_t l = 0; l < d_ && in; ++l) {
            in = n[l] < N[l];
            odd ^= parity(n[l] & g[l].word(0));
        }
        if (in) acc += odd ? -c.get_d() : c.get_d();
    }
    return acc;
}

std::vector<BigInt> SeriesSpec::scaled_block(unsigned k) const {
    require_known_below(k);
    if (k * d_ > 30) throw std::length_error("dense block too large");
    const uint64_t side = uint64_t{1} << k;
    std::vector<BigInt> a(std::size_t{1} << (k * d_));
    for (const Term& t : terms_) {
        const uint64_t* n = idx_.data() + t.offset;
        std::size_t flat = 0;
        bool in = true;
        for (std::size_t l = 0; l < d_; ++l) {
            if (n[l] >= side) {
                in = false;
                break;
            }
            flat = flat * side + n[l];
        }
        if (in) a[flat] = t.big;
    }
    return a;
}

std::vector<int64_t> SeriesSpec::scaled_block_i64(unsigned k) const {
    if (!small_) throw std::logic_error("scaled_block_i64 requires small numerators");
    require_known_below(k);
    if (k * d_ > 30) throw std::length_error("dense block too large");
    const uint64_t side = uint64_t{1} << k;
    std::vector<int64_t> a(std::size_t{1} << (k * d_), 0);
    for (const Term& t : terms_) {
        const uint64_t* n = idx_.data() + t.offset;
        std::size_t flat = 0;
        bool in = true;
        for (std::size_t l = 0; l < d_; ++l) {
            if (n[l] >= side) {
                in = false;
                break;
            }
            flat = flat * side + n[l];
        }
        if (in) a[flat] = t.small;
    }
    return a;
}

Rational partial_sum_rect_naive(const SeriesSpec& series, const MultiIndex& N, const DyadicPoint& g) {
    if (N.size() != series.dim() || g.dim() != series.dim()) throw std::invalid_argument("dimension mismatch");
    Index n64;
    for (const auto& v : N) n64.push_back(v.to_u64());
    series.require_known_below(n64);
    Rational sum = 0;
    for (const auto& [n, c] : series.coefficients()) {
        bool in = true;
        MultiIndex mi;
        for (std::size_t l = 0; l < n.size(); ++l) {
            in = in && n[l] < n64[l];
            mi.emplace_back(n[l]);
        }
        if (!in) continue;
        sum += walsh_eval_multi(mi, g).value() * c;
    }
    return sum;
}

nlohmann::json series_to_json(const SeriesSpec& s) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [n, c] : s.coefficients()) coeffs.push_back({{"n", n}, {"c", to_string(c)}});
    nlohmann::json j = {{"d", s.dim()}, {"coeffs", coeffs}, {"bound_rank", s.bound_rank()}};
    if (s.truncated()) j["truncated"] = true;
    return j;
}

SeriesSpec series_from_json(const nlohmann::json& j) {
    try {
        std::size_t d = j.at("d").get<std::size_t>();
        unsigned bound = j.at("bound_rank").get<unsigned>();
        bool truncated = j.value("truncated", false);
        std::map<Index, Rational> coeffs;
        for (const auto& item : j.at("coeffs")) {
            Index n = item.at("n").get<Index>();
            const auto& c = item.at("c");
            Rational value = c.is_string() ? parse_rational(c.get<std::string>())
                                           : Rational(BigInt(static_cast<long>(c.get<int64_t>())));
            if (!coeffs.emplace(n, value).second) throw std::invalid_argument("duplicate coefficient index");
        }
        return SeriesSpec(d, bound, std::move(coeffs), truncated);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed series JSON: ") + e.what());
    }
}

SeriesSpec load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return series_from_json(j);
}

void save_series(const SeriesSpec& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << series_to_json(s).dump(2) << "\n";
}

Rational random_rational(std::mt19937_64& rng, int max_numerator, int max_denominator) {
    std::uniform_int_distribution<int> num(-max_numerator, max_numerator);
    std::uniform_int_distribution<int> den(1, max_denominator);
    Rational r(num(rng), den(rng));
    r.canonicalize();
    return r;
}

SeriesSpec random_series(const RandomSeriesOptions& opt, std::mt19937_64& rng) {
    if (opt.bound_rank * opt.d > 24) throw std::length_error("random_series: dense block too large");
    std::bernoulli_distribution keep(opt.density);
    std::map<Index, Rational> coeffs;
    const uint64_t side = uint64_t{1} << opt.bound_rank;
    const uint64_t total = uint64_t{1} << (opt.bound_rank * opt.d);
    for (uint64_t f = 0; f < total; ++f) {
        if (!keep(rng)) continue;
        Index n(opt.d);
        uint64_t rest = f;
        for (std::size_t l = opt.d; l-- > 0;) {
            n[l] = rest % side;
            rest /= side;
        }
        coeffs.emplace(std::move(n), random_rational(rng, opt.max_numerator, opt.max_denominator));
    }
    return SeriesSpec(opt.d, opt.bound_rank, std::move(coeffs));
}

SeriesSpec random_series_on(std::size_t d, unsigned bound_rank, const std::vector<Index>& support,
                            std::mt19937_64& rng, int max_numerator, int max_denominator) {
    std::map<Index, Rational> coeffs;
    for (const auto& n : support) {
        Rational c = random_rational(rng, max_numerator, max_denominator);
        coeffs.emplace(n, c);
    }
    return SeriesSpec(d, bound_rank, std::move(coeffs));
}

}  // namespace dyadic
