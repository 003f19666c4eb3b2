#pragma once

// Structured subsets of G^d: Dirichlet sets, dyadic planes, cosets, unions and
// the Lukomskii layer, with membership tests at finite rank and a rasterizer.

#include "dyadic/group.hpp"
#include "dyadic/quasimeasure.hpp"
#include "dyadic/series.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace dyadic {

struct SetSpec;
using SetPtr = std::shared_ptr<const SetSpec>;

struct WholeSet {};
struct EmptySet {};

// Points with W_{N_i}(g) = 1 for every listed N_i. An incomplete list stands for
// a longer sequence whose remaining terms are unknown.
struct DirichletSet {
    std::vector<Index> N;
    bool complete = true;
};

// Dirichlet set for N_i with components 2^{offsets[l] + step i}, i = 0, 1, ...;
// offset -1 makes component l zero. count empty means the sequence is infinite.
struct PowerDirichlet {
    std::vector<int> offsets;
    unsigned step = 1;
    std::optional<std::size_t> count;
};

// D_m (shifts all zero), Q_{m,q} or P_m. shifts has one entry per upper coordinate.
struct PlaneSet {
    enum class Kind { Diagonal, Shifted, Coordinate };
    Kind kind = Kind::Diagonal;
    Partition part;
    std::vector<unsigned> shifts;
};

struct CosetSet {
    SetPtr inner;
    DyadicPoint x;
};

struct UnionSet {
    std::vector<SetPtr> members;
    std::optional<unsigned> disjoint_rank;
};

// Rectangle (j, k) of ranks (i-1, m-i+1) paired with the condition W_{(2^{i-1}, N)} = 1.
struct LukomskiiPiece {
    uint64_t j = 0;
    uint64_t k = 0;
    uint64_t N = 0;
};

struct LukomskiiLayer {
    unsigned i = 1;
    unsigned m = 1;
    std::vector<LukomskiiPiece> pieces;
    bool default_pairing = true;
};

// Placeholder for a set defined elsewhere; every query throws.
struct ExternalSet {};

struct SetSpec {
    std::size_t d = 2;
    std::variant<WholeSet, EmptySet, DirichletSet, PowerDirichlet, PlaneSet, CosetSet, UnionSet, LukomskiiLayer,
                 ExternalSet>
        body;
};

SetPtr make_whole(std::size_t d);
SetPtr make_empty(std::size_t d);
SetPtr make_dirichlet(std::size_t d, std::vector<Index> N, bool complete = true);
SetPtr make_power_dirichlet(std::vector<int> offsets, unsigned step = 1, std::optional<std::size_t> count = {});
// WD^{d-m}(2^N 1) x G^m with the Dirichlet factor on the first d-m coordinates.
SetPtr make_power_product(std::size_t d, std::size_t m);
SetPtr make_diagonal(const Partition& part);
SetPtr make_shifted_diagonal(const Partition& part, std::vector<unsigned> shifts);
SetPtr make_coordinate_plane(const Partition& part);
SetPtr make_coset(SetPtr inner, DyadicPoint x);
// With claimed_disjoint_rank the members are checked pairwise at that rank; throws if they meet.
SetPtr make_union(std::vector<SetPtr> members, std::optional<unsigned> claimed_disjoint_rank = {});
// Default pairing zips the rectangles (j-major) with N = 2^{m-i}, 2^{m-i}+1, ...
SetPtr make_lukomskii(unsigned i, unsigned m, std::vector<LukomskiiPiece> pairing = {});
SetPtr make_external(std::size_t d);

std::string describe(const SetSpec& s);
nlohmann::json set_to_json(const SetSpec& s);
SetPtr set_from_json(const nlohmann::json& j);
SetPtr load_set(const std::string& path);

// Per coordinate either an exact element or a dyadic interval whose digits from
// its rank on are free.
struct Slot {
    bool exact = false;
    DyadicElement elem;
    unsigned rank = 0;
    uint64_t index = 0;
};

struct Region {
    std::vector<Slot> slots;

    static Region point(const DyadicPoint& g);
    static Region cell(const DyadicCube& cube);
    std::size_t dim() const { return slots.size(); }
    // Known digit value, or -1 when the digit is free.
    int digit(std::size_t l, std::size_t t) const;
    // Largest rank among the slots.
    std::size_t horizon() const;
    Region shifted(const DyadicPoint& x) const;
};

// Ordered so that the status of a union is the maximum over its members.
enum class CellStatus { Misses = 0, Undetermined = 1, Meets = 2, Contained = 3 };
CellStatus status(const SetSpec& s, const Region& region);

enum class Membership { In, Out, Undetermined };
std::string to_string(Membership m);

// Exact when rank >= rank(g); otherwise decided from the rank cell of g.
Membership membership(const SetSpec& s, const DyadicPoint& g, unsigned rank);
// Exact membership of a point with known tails.
bool contains(const SetSpec& s, const DyadicPoint& g);

// Rank-K cells that meet the set (undetermined cells included).
SupportMask set_mask(const SetSpec& s, unsigned K);

struct SearchOptions {
    std::size_t exhaustive_limit_log2 = 20;
    std::size_t samples = 100000;
    uint64_t seed = 1;
};

struct SetCheck {
    bool holds = true;
    std::optional<DyadicPoint> witness;
    bool exhaustive = true;
    std::size_t points = 0;
};

// Points of a at rank r: every digit pattern with every tail when 2^{rd} is within
// the limit, otherwise random points of a. Each is tested for exact membership in b.
SetCheck subset_check(const SetSpec& a, const SetSpec& b, unsigned rank, const SearchOptions& opt = {});
// holds == true means no common point was found; witness is a shared point.
SetCheck pairwise_disjoint(const std::vector<SetPtr>& sets, unsigned rank, const SearchOptions& opt = {});

// Random point of s: digits below rank + extra fixed by a descent that stays inside
// meeting cells, then tails tried in random order. Throws if s looks empty.
DyadicPoint sample_point(const SetSpec& s, unsigned rank, std::mt19937_64& rng);

struct Bitmap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<uint8_t> pixels;  // row-major, top row first
};

// Column m^1 and row 2^k-1-m^2 of the rank-k cell; other coordinates fixed to slice.
Bitmap rasterize(const SetSpec& s, unsigned k, const std::optional<DyadicPoint>& slice = {}, unsigned threads = 0);
std::string to_pgm(const Bitmap& b);
void write_pgm(const Bitmap& b, const std::string& path);
// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace dyadic
