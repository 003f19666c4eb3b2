#include "dyadic/sets.hpp"

#include "dyadic/parallel.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dyadic {

namespace {

// One GF(2) condition: XOR of the listed digits (coordinate, digit index) equals rhs.
struct Equation {
    std::vector<std::pair<std::size_t, std::size_t>> vars;
    bool rhs = false;
};

bool gf2_consistent(std::vector<std::vector<uint64_t>>& rows, std::vector<uint8_t>& rhs, std::size_t ncols) {
    std::size_t rank = 0;
    for (std::size_t c = 0; c < ncols && rank < rows.size(); ++c) {
        const std::size_t w = c / 64;
        const uint64_t bit = uint64_t{1} << (c % 64);
        std::size_t piv = rank;
        while (piv < rows.size() && !(rows[piv][w] & bit)) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank]);
        std::swap(rhs[piv], rhs[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r != rank && (rows[r][w] & bit)) {
                for (std::size_t x = 0; x < rows[r].size(); ++x) rows[r][x] ^= rows[rank][x];
                rhs[r] ^= rhs[rank];
            }
        }
        ++rank;
    }
    for (std::size_t r = rank; r < rows.size(); ++r) {
        if (rhs[r]) return false;
    }
    return true;
}

CellStatus equations_status(const std::vector<Equation>& eqs, const Region& region) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> column;
    std::vector<std::vector<std::size_t>> free_vars(eqs.size());
    std::vector<uint8_t> rhs(eqs.size());
    bool all_fixed = true;
    for (std::size_t e = 0; e < eqs.size(); ++e) {
        bool r = eqs[e].rhs;
        for (const auto& v : eqs[e].vars) {
            if (v.first >= region.dim()) throw std::invalid_argument("set condition refers to a missing coordinate");
            int dig = region.digit(v.first, v.second);
            if (dig < 0) {
                auto it = column.emplace(v, column.size()).first;
                free_vars[e].push_back(it->second);
            } else {
                r ^= dig != 0;
            }
        }
        rhs[e] = r;
        // A digit listed twice cancels.
        std::sort(free_vars[e].begin(), free_vars[e].end());
        std::vector<std::size_t> reduced;
        for (std::size_t i = 0; i < free_vars[e].size(); ++i) {
            if (i + 1 < free_vars[e].size() && free_vars[e][i] == free_vars[e][i + 1]) {
                ++i;
                continue;
            }
            reduced.push_back(free_vars[e][i]);
        }
        free_vars[e] = std::move(reduced);
        if (free_vars[e].empty() && r) return CellStatus::Misses;
        if (!free_vars[e].empty()) all_fixed = false;
    }
    if (all_fixed) return CellStatus::Contained;
    const std::size_t ncols = column.size();
    const std::size_t words = (ncols + 63) / 64;
    std::vector<std::vector<uint64_t>> rows;
    std::vector<uint8_t> b;
    for (std::size_t e = 0; e < eqs.size(); ++e) {
        if (free_vars[e].empty()) continue;
        std::vector<uint64_t> row(words, 0);
        for (auto c : free_vars[e]) row[c / 64] |= uint64_t{1} << (c % 64);
        rows.push_back(std::move(row));
        b.push_back(rhs[e]);
    }
    return gf2_consistent(rows, b, ncols) ? CellStatus::Meets : CellStatus::Misses;
}

std::vector<Equation> dirichlet_equations(const DirichletSet& s) {
    std::vector<Equation> eqs;
    for (const auto& n : s.N) {
        Equation e;
        for (std::size_t l = 0; l < n.size(); ++l) {
            for (unsigned b = 0; b < 64; ++b) {
                if ((n[l] >> b) & 1u) e.vars.emplace_back(l, b);
            }
        }
        eqs.push_back(std::move(e));
    }
    return eqs;
}

std::vector<Equation> lukomskii_equations(const LukomskiiLayer& s, const LukomskiiPiece& p) {
    std::vector<Equation> eqs;
    const unsigned r1 = s.i - 1;
    const unsigned r2 = s.m - s.i + 1;
    for (unsigned t = 0; t < r1; ++t) eqs.push_back({{{0, t}}, ((p.j >> (r1 - 1 - t)) & 1u) != 0});
    for (unsigned t = 0; t < r2; ++t) eqs.push_back({{{1, t}}, ((p.k >> (r2 - 1 - t)) & 1u) != 0});
    Equation w;
    w.vars.emplace_back(0, s.i - 1);
    for (unsigned b = 0; b < 64; ++b) {
        if ((p.N >> b) & 1u) w.vars.emplace_back(1, b);
    }
    eqs.push_back(std::move(w));
    return eqs;
}

CellStatus plane_status(const PlaneSet& s, const Region& region) {
    const std::size_t H = region.horizon();
    bool contained = true;
    if (s.kind == PlaneSet::Kind::Coordinate) {
        for (std::size_t a : s.part.upper) {
            for (std::size_t t = 0; t <= H; ++t) {
                int dig = region.digit(a, t);
                if (dig == 1) return CellStatus::Misses;
                if (dig < 0) contained = false;
            }
        }
        return contained ? CellStatus::Contained : CellStatus::Meets;
    }
    unsigned qmax = 0;
    for (unsigned q : s.shifts) qmax = std::max(qmax, q);
    // Class p holds digit p - q_a of every upper coordinate a with q_a <= p; all must agree.
    // From p = H + qmax on every class looks the same, so one more class suffices.
    for (std::size_t p = 0; p <= H + qmax; ++p) {
        bool seen0 = false, seen1 = false;
        std::size_t free = 0, members = 0;
        for (std::size_t i = 0; i < s.part.upper.size(); ++i) {
            const unsigned q = s.shifts.empty() ? 0u : s.shifts[i];
            if (q > p) continue;
            ++members;
            int dig = region.digit(s.part.upper[i], p - q);
            if (dig < 0) ++free;
            else if (dig) seen1 = true;
            else seen0 = true;
        }
        if (seen0 && seen1) return CellStatus::Misses;
        if (free > 0 && members >= 2) contained = false;
    }
    return contained ? CellStatus::Contained : CellStatus::Meets;
}

CellStatus power_status(const PowerDirichlet& s, const Region& region) {
    const std::size_t H = region.horizon();
    int min_off = -1;
    for (int o : s.offsets) {
        if (o >= 0 && (min_off < 0 || o < min_off)) min_off = o;
    }
    if (min_off < 0) return CellStatus::Contained;
    bool contained = true;
    // Equations are independent; once every digit is past the horizon they repeat.
    for (std::size_t i = 0;; ++i) {
        if (s.count && i >= *s.count) break;
        bool parity = false;
        std::size_t free = 0;
        for (std::size_t l = 0; l < s.offsets.size(); ++l) {
            if (s.offsets[l] < 0) continue;
            int dig = region.digit(l, static_cast<std::size_t>(s.offsets[l]) + s.step * i);
            if (dig < 0) ++free;
            else parity ^= dig != 0;
        }
        if (free == 0 && parity) return CellStatus::Misses;
        if (free > 0) contained = false;
        if (static_cast<std::size_t>(min_off) + s.step * i >= H) break;
    }
    return contained ? CellStatus::Contained : CellStatus::Meets;
}

std::size_t lower_m(const Partition& p) { return p.lower.size(); }

std::string join(const std::vector<std::size_t>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "}";
}

DyadicPoint grid_point(uint64_t flat, uint64_t tails, unsigned r, std::size_t d) {
    std::vector<DyadicElement> comps;
    for (std::size_t l = 0; l < d; ++l) {
        const uint64_t m = (flat >> (r * (d - 1 - l))) & ((uint64_t{1} << r) - 1);
        const Tail tail = ((tails >> l) & 1u) ? Tail::AllOnes : Tail::AllZeros;
        comps.push_back(DyadicElement::from_bits(reverse_bits(m, r), r, tail));
    }
    return DyadicPoint(std::move(comps));
}

uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Finds a point of a that fails pred by grid enumeration or sampling.
template <typename Pred>
SetCheck search(const SetSpec& a, unsigned rank, const SearchOptions& opt, Pred&& bad) {
    if (rank == 0) throw std::invalid_argument("set search needs rank >= 1");
    const std::size_t d = a.d;
    SetCheck res;
    if (rank * d <= opt.exhaustive_limit_log2) {
        res.exhaustive = true;
        const uint64_t cells = uint64_t{1} << (rank * d);
        for (uint64_t f = 0; f < cells; ++f) {
            if (status(a, Region::cell(DyadicCube::from_flat(rank, d, f))) == CellStatus::Misses) continue;
            for (uint64_t t = 0; t < (uint64_t{1} << d); ++t) {
                DyadicPoint g = grid_point(f, t, rank, d);
                if (!contains(a, g)) continue;
                ++res.points;
                if (bad(g)) {
                    res.holds = false;
                    res.witness = g;
                    return res;
                }
            }
        }
        return res;
    }
    res.exhaustive = false;
    std::vector<std::optional<DyadicPoint>> found(opt.samples);
    parallel_for(opt.samples, [&](std::size_t i) {
        std::mt19937_64 rng(splitmix(opt.seed ^ splitmix(i)));
        DyadicPoint g = sample_point(a, rank, rng);
        if (bad(g)) found[i] = g;
    });
    res.points = opt.samples;
    for (auto& f : found) {
        if (f) {
            res.holds = false;
            res.witness = f;
            break;
        }
    }
    return res;
}

}  // namespace

SetPtr make_whole(std::size_t d) { return std::make_shared<SetSpec>(SetSpec{d, WholeSet{}}); }
SetPtr make_empty(std::size_t d) { return std::make_shared<SetSpec>(SetSpec{d, EmptySet{}}); }

SetPtr make_dirichlet(std::size_t d, std::vector<Index> N, bool complete) {
    for (const auto& n : N) {
        if (n.size() != d) throw std::invalid_argument("Dirichlet index has wrong dimension");
    }
    return std::make_shared<SetSpec>(SetSpec{d, DirichletSet{std::move(N), complete}});
}

SetPtr make_power_dirichlet(std::vector<int> offsets, unsigned step, std::optional<std::size_t> count) {
    if (offsets.empty()) throw std::invalid_argument("power Dirichlet set needs at least one coordinate");
    for (int o : offsets) {
        if (o < -1) throw std::invalid_argument("power Dirichlet offsets must be >= -1");
    }
    if (step == 0 && (!count || *count > 1)) throw std::invalid_argument("power Dirichlet step must be positive");
    const std::size_t d = offsets.size();
    return std::make_shared<SetSpec>(SetSpec{d, PowerDirichlet{std::move(offsets), step, count}});
}

SetPtr make_power_product(std::size_t d, std::size_t m) {
    if (m >= d) throw std::invalid_argument("power product needs m < d");
    std::vector<int> offsets(d, -1);
    for (std::size_t l = 0; l < d - m; ++l) offsets[l] = 0;
    return make_power_dirichlet(std::move(offsets), 1);
}

SetPtr make_diagonal(const Partition& part) {
    if (part.upper.size() < 2) throw std::invalid_argument("diagonal plane needs m <= d-2");
    PlaneSet p{PlaneSet::Kind::Diagonal, part, std::vector<unsigned>(part.upper.size(), 0)};
    return std::make_shared<SetSpec>(SetSpec{part.d, p});
}

SetPtr make_shifted_diagonal(const Partition& part, std::vector<unsigned> shifts) {
    if (part.upper.size() < 2) throw std::invalid_argument("shifted diagonal needs m <= d-2");
    if (shifts.size() != part.upper.size()) throw std::invalid_argument("need one shift per upper coordinate");
    PlaneSet p{PlaneSet::Kind::Shifted, part, std::move(shifts)};
    return std::make_shared<SetSpec>(SetSpec{part.d, p});
}

SetPtr make_coordinate_plane(const Partition& part) {
    if (part.upper.empty()) throw std::invalid_argument("coordinate plane needs m <= d-1");
    PlaneSet p{PlaneSet::Kind::Coordinate, part, {}};
    return std::make_shared<SetSpec>(SetSpec{part.d, p});
}

SetPtr make_coset(SetPtr inner, DyadicPoint x) {
    if (!inner) throw std::invalid_argument("coset of a null set");
    if (x.dim() != inner->d) throw std::invalid_argument("coset shift has wrong dimension");
    const std::size_t d = inner->d;
    return std::make_shared<SetSpec>(SetSpec{d, CosetSet{std::move(inner), std::move(x)}});
}

SetPtr make_union(std::vector<SetPtr> members, std::optional<unsigned> claimed_disjoint_rank) {
    if (members.empty()) throw std::invalid_argument("union needs at least one member");
    const std::size_t d = members.front()->d;
    for (const auto& s : members) {
        if (!s || s->d != d) throw std::invalid_argument("union members must share the dimension");
    }
    if (claimed_disjoint_rank) {
        SetCheck c = pairwise_disjoint(members, *claimed_disjoint_rank);
        if (!c.holds) throw std::invalid_argument("union members claimed disjoint meet at " + c.witness->str());
    }
    return std::make_shared<SetSpec>(SetSpec{d, UnionSet{std::move(members), claimed_disjoint_rank}});
}

SetPtr make_lukomskii(unsigned i, unsigned m, std::vector<LukomskiiPiece> pairing) {
    if (i < 1 || m < i) throw std::invalid_argument("Lukomskii layer needs 1 <= i <= m");
    if (2 * m - i > 62) throw std::invalid_argument("Lukomskii layer too deep");
    LukomskiiLayer layer{i, m, {}, pairing.empty()};
    const uint64_t rows = uint64_t{1} << (i - 1);
    const uint64_t cols = uint64_t{1} << (m - i + 1);
    const uint64_t n_lo = uint64_t{1} << (m - i);
    const uint64_t n_hi = uint64_t{1} << (2 * m - i);
    if (pairing.empty()) {
        uint64_t N = n_lo;
        for (uint64_t j = 0; j < rows && N < n_hi; ++j) {
            for (uint64_t k = 0; k < cols && N < n_hi; ++k) layer.pieces.push_back({j, k, N++});
        }
    } else {
        for (const auto& p : pairing) {
            if (p.j >= rows || p.k >= cols || p.N < n_lo || p.N >= n_hi) {
                throw std::invalid_argument("Lukomskii pairing entry out of range");
            }
        }
        layer.pieces = std::move(pairing);
    }
    return std::make_shared<SetSpec>(SetSpec{2, std::move(layer)});
}

SetPtr make_external(std::size_t d) { return std::make_shared<SetSpec>(SetSpec{d, ExternalSet{}}); }

std::string describe(const SetSpec& s) {
    return std::visit(
        [&](const auto& b) -> std::string {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, WholeSet>) {
                return "G^" + std::to_string(s.d);
            } else if constexpr (std::is_same_v<T, EmptySet>) {
                return "empty";
            } else if constexpr (std::is_same_v<T, DirichletSet>) {
                return "WD^" + std::to_string(s.d) + "(" + std::to_string(b.N.size()) + " indices" +
                       (b.complete ? "" : ", incomplete") + ")";
            } else if constexpr (std::is_same_v<T, PowerDirichlet>) {
                std::string o;
                for (std::size_t l = 0; l < b.offsets.size(); ++l) o += (l ? "," : "") + std::to_string(b.offsets[l]);
                return "WD(2^(offset+" + std::to_string(b.step) + "i), offsets " + o + ", " +
                       (b.count ? std::to_string(*b.count) + " terms" : std::string("infinite")) + ")";
            } else if constexpr (std::is_same_v<T, PlaneSet>) {
                const std::string m = std::to_string(lower_m(b.part));
                if (b.kind == PlaneSet::Kind::Coordinate) return "P_" + m + " lower " + join(b.part.lower);
                if (b.kind == PlaneSet::Kind::Diagonal) return "D_" + m + " lower " + join(b.part.lower);
                std::vector<std::size_t> q(b.shifts.begin(), b.shifts.end());
                return "Q_" + m + "," + join(q) + " lower " + join(b.part.lower);
            } else if constexpr (std::is_same_v<T, CosetSet>) {
                return "(" + describe(*b.inner) + ") + " + b.x.str();
            } else if constexpr (std::is_same_v<T, UnionSet>) {
                std::string u;
                for (std::size_t i = 0; i < b.members.size(); ++i) u += (i ? " | " : "") + describe(*b.members[i]);
                return "union[" + u + "]";
            } else if constexpr (std::is_same_v<T, LukomskiiLayer>) {
                return "Lukomskii layer i=" + std::to_string(b.i) + " m=" + std::to_string(b.m) + " (" +
                       std::to_string(b.pieces.size()) + " pieces" + (b.default_pairing ? ", illustrative pairing" : "") +
                       ")";
            } else {
                return "external F^" + std::to_string(s.d);
            }
        },
        s.body);
}

nlohmann::json set_to_json(const SetSpec& s) {
    using nlohmann::json;
    return std::visit(
        [&](const auto& b) -> json {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, WholeSet>) {
                return {{"kind", "whole"}, {"d", s.d}};
            } else if constexpr (std::is_same_v<T, EmptySet>) {
                return {{"kind", "empty"}, {"d", s.d}};
            } else if constexpr (std::is_same_v<T, DirichletSet>) {
                return {{"kind", "dirichlet"}, {"d", s.d}, {"N", b.N}, {"complete", b.complete}};
            } else if constexpr (std::is_same_v<T, PowerDirichlet>) {
                json j = {{"kind", "power_dirichlet"}, {"offsets", b.offsets}, {"step", b.step}};
                if (b.count) j["count"] = *b.count;
                return j;
            } else if constexpr (std::is_same_v<T, PlaneSet>) {
                const char* kind = b.kind == PlaneSet::Kind::Coordinate ? "coordinate_plane"
                                   : b.kind == PlaneSet::Kind::Diagonal ? "diagonal"
                                                                        : "shifted_diagonal";
                json j = {{"kind", kind}, {"d", s.d}, {"lower", b.part.lower}};
                if (b.kind == PlaneSet::Kind::Shifted) j["q"] = b.shifts;
                return j;
            } else if constexpr (std::is_same_v<T, CosetSet>) {
                return {{"kind", "coset"}, {"inner", set_to_json(*b.inner)}, {"x", b.x.str()}};
            } else if constexpr (std::is_same_v<T, UnionSet>) {
                json members = json::array();
                for (const auto& m : b.members) members.push_back(set_to_json(*m));
                json j = {{"kind", "union"}, {"members", members}};
                if (b.disjoint_rank) j["disjoint_rank"] = *b.disjoint_rank;
                return j;
            } else if constexpr (std::is_same_v<T, LukomskiiLayer>) {
                json j = {{"kind", "lukomskii"}, {"i", b.i}, {"m", b.m}};
                if (!b.default_pairing) {
                    json p = json::array();
                    for (const auto& piece : b.pieces) p.push_back({{"j", piece.j}, {"k", piece.k}, {"N", piece.N}});
                    j["pairing"] = p;
                }
                return j;
            } else {
                return {{"kind", "external"}, {"d", s.d}};
            }
        },
        s.body);
}

SetPtr set_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "whole") return make_whole(j.at("d").get<std::size_t>());
        if (kind == "empty") return make_empty(j.at("d").get<std::size_t>());
        if (kind == "dirichlet") {
            return make_dirichlet(j.at("d").get<std::size_t>(), j.at("N").get<std::vector<Index>>(),
                                  j.value("complete", true));
        }
        if (kind == "power_dirichlet") {
            std::optional<std::size_t> count;
            if (j.contains("count")) count = j.at("count").get<std::size_t>();
            return make_power_dirichlet(j.at("offsets").get<std::vector<int>>(), j.value("step", 1u), count);
        }
        if (kind == "diagonal" || kind == "shifted_diagonal" || kind == "coordinate_plane") {
            Partition part = Partition::with_lower(j.at("d").get<std::size_t>(), j.at("lower").get<std::vector<std::size_t>>());
            if (kind == "diagonal") return make_diagonal(part);
            if (kind == "coordinate_plane") return make_coordinate_plane(part);
            return make_shifted_diagonal(part, j.at("q").get<std::vector<unsigned>>());
        }
        if (kind == "coset") return make_coset(set_from_json(j.at("inner")), DyadicPoint::parse(j.at("x").get<std::string>()));
        if (kind == "union") {
            std::vector<SetPtr> members;
            for (const auto& m : j.at("members")) members.push_back(set_from_json(m));
            std::optional<unsigned> rank;
            if (j.contains("disjoint_rank")) rank = j.at("disjoint_rank").get<unsigned>();
            return make_union(std::move(members), rank);
        }
        if (kind == "lukomskii") {
            std::vector<LukomskiiPiece> pairing;
            if (j.contains("pairing")) {
                for (const auto& p : j.at("pairing")) {
                    pairing.push_back({p.at("j").get<uint64_t>(), p.at("k").get<uint64_t>(), p.at("N").get<uint64_t>()});
                }
            }
            return make_lukomskii(j.at("i").get<unsigned>(), j.at("m").get<unsigned>(), std::move(pairing));
        }
        if (kind == "external") return make_external(j.at("d").get<std::size_t>());
        throw std::invalid_argument("unknown set kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed set JSON: ") + e.what());
    }
}

SetPtr load_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return set_from_json(j);
}

Region Region::point(const DyadicPoint& g) {
    Region r;
    for (const auto& c : g.components()) r.slots.push_back({true, c, 0, 0});
    return r;
}

Region Region::cell(const DyadicCube& cube) {
    Region r;
    for (uint64_t m : cube.m) r.slots.push_back({false, DyadicElement(), cube.k, m});
    return r;
}

int Region::digit(std::size_t l, std::size_t t) const {
    const Slot& s = slots[l];
    if (s.exact) return s.elem.digit(t) ? 1 : 0;
    if (t >= s.rank) return -1;
    return static_cast<int>((s.index >> (s.rank - 1 - t)) & 1u);
}

std::size_t Region::horizon() const {
    std::size_t h = 0;
    for (const auto& s : slots) h = std::max<std::size_t>(h, s.exact ? s.elem.rank() : s.rank);
    return h;
}

Region Region::shifted(const DyadicPoint& x) const {
    if (x.dim() != slots.size()) throw std::invalid_argument("shift has wrong dimension");
    Region r = *this;
    for (std::size_t l = 0; l < slots.size(); ++l) {
        Slot& s = r.slots[l];
        if (s.exact) s.elem = s.elem ^ x[l];
        else s.index ^= interval_index(x[l], s.rank);
    }
    return r;
}

CellStatus status(const SetSpec& s, const Region& region) {
    if (region.dim() != s.d) throw std::invalid_argument("region dimension does not match the set");
    return std::visit(
        [&](const auto& b) -> CellStatus {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, WholeSet>) {
                return CellStatus::Contained;
            } else if constexpr (std::is_same_v<T, EmptySet>) {
                return CellStatus::Misses;
            } else if constexpr (std::is_same_v<T, DirichletSet>) {
                CellStatus c = equations_status(dirichlet_equations(b), region);
                if (!b.complete && c != CellStatus::Misses) return CellStatus::Undetermined;
                return c;
            } else if constexpr (std::is_same_v<T, PowerDirichlet>) {
                return power_status(b, region);
            } else if constexpr (std::is_same_v<T, PlaneSet>) {
                return plane_status(b, region);
            } else if constexpr (std::is_same_v<T, CosetSet>) {
                return status(*b.inner, region.shifted(b.x));
            } else if constexpr (std::is_same_v<T, UnionSet>) {
                CellStatus best = CellStatus::Misses;
                for (const auto& m : b.members) {
                    best = std::max(best, status(*m, region));
                    if (best == CellStatus::Contained) break;
                }
                return best;
            } else if constexpr (std::is_same_v<T, LukomskiiLayer>) {
                CellStatus best = CellStatus::Misses;
                for (const auto& p : b.pieces) {
                    best = std::max(best, equations_status(lukomskii_equations(b, p), region));
                    if (best == CellStatus::Contained) break;
                }
                return best;
            } else {
                throw std::logic_error("external set F^d is not implemented");
            }
        },
        s.body);
}

std::string to_string(Membership m) {
    switch (m) {
        case Membership::In: return "In";
        case Membership::Out: return "Out";
        default: return "UndeterminedAtRank";
    }
}

Membership membership(const SetSpec& s, const DyadicPoint& g, unsigned rank) {
    if (g.dim() != s.d) throw std::invalid_argument("point dimension does not match the set");
    const Region region = rank >= g.rank() ? Region::point(g) : Region::cell(cube_of(g, rank));
    switch (status(s, region)) {
        case CellStatus::Contained: return Membership::In;
        case CellStatus::Misses: return Membership::Out;
        default: return Membership::Undetermined;
    }
}

bool contains(const SetSpec& s, const DyadicPoint& g) {
    Membership m = membership(s, g, static_cast<unsigned>(g.rank()));
    if (m == Membership::Undetermined) throw std::domain_error("membership undetermined for " + g.str());
    return m == Membership::In;
}

SupportMask set_mask(const SetSpec& s, unsigned K) {
    SupportMask mask;
    mask.d = s.d;
    mask.K = K;
    if (K * s.d > 30) throw std::length_error("set mask too large");
    mask.cells.resize(std::size_t{1} << (K * s.d));
    for (std::size_t f = 0; f < mask.cells.size(); ++f) {
        mask.cells[f] = status(s, Region::cell(DyadicCube::from_flat(K, s.d, f))) != CellStatus::Misses;
    }
    return mask;
}

DyadicPoint sample_point(const SetSpec& s, unsigned rank, std::mt19937_64& rng) {
    const std::size_t d = s.d;
    Region region;
    region.slots.assign(d, Slot{});
    if (status(s, region) == CellStatus::Misses) throw std::invalid_argument("cannot sample from an empty set");
    std::bernoulli_distribution coin(0.5);
    for (unsigned depth = 0; depth < rank + 64; ++depth) {
        for (std::size_t l = 0; l < d; ++l) {
            Slot& slot = region.slots[l];
            slot.rank += 1;
            slot.index = 2 * slot.index + (coin(rng) ? 1u : 0u);
            if (status(s, region) == CellStatus::Misses) {
                slot.index ^= 1u;
                if (status(s, region) == CellStatus::Misses) throw std::logic_error("sample descent lost the set");
            }
        }
        if (depth + 1 < rank) continue;
        std::vector<uint64_t> order(uint64_t{1} << d);
        for (uint64_t t = 0; t < order.size(); ++t) order[t] = t;
        std::shuffle(order.begin(), order.end(), rng);
        for (uint64_t t : order) {
            std::vector<DyadicElement> comps;
            for (std::size_t l = 0; l < d; ++l) {
                std::vector<uint8_t> digits(depth + 1);
                for (unsigned i = 0; i <= depth; ++i) digits[i] = static_cast<uint8_t>(region.digit(l, i));
                comps.emplace_back(digits, ((t >> l) & 1u) ? Tail::AllOnes : Tail::AllZeros);
            }
            DyadicPoint g(std::move(comps));
            if (status(s, Region::point(g)) == CellStatus::Contained) return g;
        }
    }
    throw std::runtime_error("no point of the set found with constant tails");
}

SetCheck subset_check(const SetSpec& a, const SetSpec& b, unsigned rank, const SearchOptions& opt) {
    if (a.d != b.d) throw std::invalid_argument("subset_check: dimension mismatch");
    return search(a, rank, opt, [&](const DyadicPoint& g) { return !contains(b, g); });
}

SetCheck pairwise_disjoint(const std::vector<SetPtr>& sets, unsigned rank, const SearchOptions& opt) {
    SetCheck total;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            if (sets[i]->d != sets[j]->d) throw std::invalid_argument("pairwise_disjoint: dimension mismatch");
            SetCheck c = search(*sets[i], rank, opt, [&](const DyadicPoint& g) { return contains(*sets[j], g); });
            total.points += c.points;
            total.exhaustive = total.exhaustive && c.exhaustive;
            if (!c.holds) {
                c.points = total.points;
                return c;
            }
        }
    }
    return total;
}

Bitmap rasterize(const SetSpec& s, unsigned k, const std::optional<DyadicPoint>& slice, unsigned threads) {
    if (s.d < 2) throw std::invalid_argument("rasterize needs d >= 2");
    if (k > 12) throw std::invalid_argument("rasterize supports k <= 12");
    DyadicPoint fixed = slice ? *slice : (s.d > 2 ? DyadicPoint::zero(s.d - 2) : DyadicPoint());
    if (fixed.dim() != s.d - 2) throw std::invalid_argument("slice must fix exactly d-2 coordinates");
    Bitmap b;
    b.width = b.height = std::size_t{1} << k;
    b.pixels.assign(b.width * b.height, 0);
    parallel_for(
        b.height,
        [&](std::size_t row) {
            Region region;
            region.slots.resize(s.d);
            const uint64_t m2 = b.height - 1 - row;
            region.slots[1] = {false, DyadicElement(), k, m2};
            for (std::size_t l = 2; l < s.d; ++l) region.slots[l] = {true, fixed[l - 2], 0, 0};
            for (std::size_t col = 0; col < b.width; ++col) {
                region.slots[0] = {false, DyadicElement(), k, col};
                CellStatus c = status(s, region);
                b.pixels[row * b.width + col] = c == CellStatus::Misses ? 0 : c == CellStatus::Undetermined ? 128 : 255;
            }
        },
        threads);
    return b;
}

std::string to_pgm(const Bitmap& b) {
    std::string out = "P5\n" + std::to_string(b.width) + " " + std::to_string(b.height) + "\n255\n";
    out.append(b.pixels.begin(), b.pixels.end());
    return out;
}

void write_pgm(const Bitmap& b, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::string data = to_pgm(b);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace dyadic
