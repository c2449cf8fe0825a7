#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mspace/pocset.hpp"
#include "mspace/spaces.hpp"

namespace msp {

// Convex vertex set inside a realization, with the wall trichotomy cached:
// every wall either crosses the set or has the whole set on one fixed side.
struct ConvexSet {
    const MedianRealization* R = nullptr;
    std::vector<uint32_t> verts;      // ascending vertex indices
    Bits member;                      // indicator over R->vertices
    std::vector<HalfId> sigma;        // halfspaces containing the set, ascending
    Bits crossing;                    // walls meeting both sides

    bool contains(uint32_t v) const { return member.get(v); }
    size_t size() const { return verts.size(); }
    // Trichotomy for an arbitrary vertex set; does not check convexity.
    static ConvexSet of(const MedianRealization& R, std::vector<uint32_t> verts);
};

// Smallest convex superset: iterate interval closure to a fixed point.
ConvexSet convex_hull(const MedianRealization& R, const std::vector<uint32_t>& S);

bool is_convex(const ConvexSet& C);

// Walls with x on the opposite side from the (non-crossing) side of C.
std::vector<uint32_t> walls_between(const ConvexSet& C, uint32_t x);

// Unique nearest point of C, cross-checked against the separating-wall
// identity walls_between(C, x) == walls_between({gate}, x).
uint32_t gate(const ConvexSet& C, uint32_t x);

// x1 in C1, x2 in C2 projecting to each other; the walls between them are
// exactly the walls between the sets.
std::pair<uint32_t, uint32_t> pair_of_gates(const ConvexSet& C1, const ConvexSet& C2);

struct BridgeResult {
    ConvexSet S1, S2;                 // mutual gate projections (shores)
    ConvexSet B;                      // union of geodesics between the shores
    uint32_t x1, x2;                  // a pair of gates
    std::vector<uint32_t> interval_factor;  // I(x1, x2), ascending
    // per vertex of B.verts: (index into S1.verts, index into interval_factor)
    std::vector<std::pair<uint32_t, uint32_t>> witness;
};

// Shores, bridge and an explicit product decomposition B ~ S1 x I(x1,x2),
// verified vertexwise to be a weighted isometry.  Also checks that the walls
// crossing B are exactly the common crossing walls plus the separating walls.
BridgeResult shores_and_bridge(const ConvexSet& C1, const ConvexSet& C2);

// Disjoint halfspaces with no wall transverse to both.
bool is_strongly_separated(const WeightedPocset& P, HalfId h, HalfId k);
// Disjoint vertex sets with no common crossing wall.
bool is_strongly_separated_sets(const ConvexSet& C1, const ConvexSet& C2);

// n pairwise disjoint halfspaces (h_i inside the complement of h_j), found by
// depth-first search in ascending id order.
std::optional<std::vector<HalfId>> find_facing_tuple(const WeightedPocset& P,
                                                     uint32_t n);

// Breadth-first search over generator words g with g(k) strictly inside h
// inside k, deduplicated by the image of k.  Throws when the only candidates
// fall off the truncation (deeper slice needed).
std::optional<Aut> skewering_search(ComplexPtr X, const std::vector<Aut>& gens,
                                    int depth, HalfId h, HalfId k,
                                    uint32_t max_len = 8);

// The common median of all triples drawn from three pairwise "far" convex
// sets: samples triples (exhaustive up to 10^4, else a seeded subset) and
// asserts the median never moves.  Requires h to be a facing triple with k_i
// strongly separated from the complement side of h_i.
uint32_t strong_separation_center(const std::array<HalfId, 3>& h,
                                  const std::array<ConvexSet, 3>& k,
                                  uint64_t seed = 1);

}  // namespace msp
