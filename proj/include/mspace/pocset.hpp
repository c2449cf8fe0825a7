#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mspace/bits.hpp"
#include "mspace/rational.hpp"

namespace msp {

// Halfspace ids: wall w owns ids 2w and 2w+1, complements of each other.
using HalfId = uint32_t;
inline constexpr HalfId kNoHalf = UINT32_MAX;
inline HalfId mate(HalfId h) { return h ^ 1u; }
inline uint32_t wall_of(HalfId h) { return h >> 1; }

// Weighted pocset: partial order "h <= k" means the halfspace h is contained
// in k, plus the complement involution and a positive rational weight per
// wall.  Two backends share one interface:
//   - dense: explicit closed relation matrix, supports validation, rank,
//     closures, realization (small wall counts);
//   - comparator: a containment predicate supplied by a space generator,
//     usable at wall counts where a matrix is out of the question.
class WeightedPocset {
public:
    uint32_t wall_count() const { return walls_; }
    uint32_t half_count() const { return 2 * walls_; }
    const Rat& wall_weight(uint32_t w) const { return weight_[w]; }
    const Rat& weight_of(HalfId h) const { return weight_[wall_of(h)]; }
    // Depth at which the wall first appears in a growing family (0 = static).
    uint32_t birth(uint32_t w) const { return birth_.empty() ? 0 : birth_[w]; }

    bool leq(HalfId a, HalfId b) const {
        if (a == b) return true;
        if (dense_) return up_[a].get(b);
        return cmp_(a, b);
    }
    bool lt(HalfId a, HalfId b) const { return a != b && leq(a, b); }
    bool comparable(HalfId a, HalfId b) const { return leq(a, b) || leq(b, a); }
    // Walls u, v transverse: no two distinct members of {h,h*,k,k*} comparable.
    bool transverse(uint32_t u, uint32_t v) const {
        if (u == v) return false;
        HalfId h = 2 * u, k = 2 * v;
        return !comparable(h, k) && !comparable(h, mate(k)) &&
               !comparable(mate(h), k) && !comparable(mate(h), mate(k));
    }

    bool has_dense() const { return dense_; }
    const Bits& up_row(HalfId a) const { return up_[a]; }    // {b : a <= b}
    const Bits& down_row(HalfId a) const { return down_[a]; }  // {b : b <= a}

    Rat total_weight() const;

    // Builds the dense matrix from `rel` pairs (a <= b), closing under
    // reflexivity, transitivity and duality (a <= b implies b* <= a*).
    static WeightedPocset from_relations(uint32_t walls, std::vector<Rat> weights,
                                         const std::vector<std::pair<HalfId, HalfId>>& rel,
                                         std::vector<uint32_t> birth = {});
    // Comparator backend; cmp must already be reflexive/transitive/dual-closed.
    static WeightedPocset from_comparator(uint32_t walls, std::vector<Rat> weights,
                                          std::function<bool(HalfId, HalfId)> cmp,
                                          std::vector<uint32_t> birth = {});

    // Axiom diagnostics; empty iff valid.  Dense backend only.
    std::vector<std::string> validate() const;

private:
    uint32_t walls_ = 0;
    std::vector<Rat> weight_;
    std::vector<uint32_t> birth_;
    bool dense_ = false;
    std::vector<Bits> up_, down_;
    std::function<bool(HalfId, HalfId)> cmp_;
};

using PocsetPtr = std::shared_ptr<const WeightedPocset>;

// One chosen side per wall: bit w set means id 2w+1 is chosen.
struct Ultrafilter {
    Bits side;
    explicit Ultrafilter(uint32_t walls = 0) : side(walls) {}
    uint32_t walls() const { return uint32_t(side.nbits); }
    HalfId at(uint32_t w) const { return 2 * w + (side.get(w) ? 1 : 0); }
    bool contains(HalfId h) const { return at(wall_of(h)) == h; }
    void choose(HalfId h) { side.assign(wall_of(h), h & 1); }
    bool operator==(const Ultrafilter& o) const { return side == o.side; }
    bool operator<(const Ultrafilter& o) const { return side < o.side; }
};

// Full consistency check (quadratic in walls; dense or comparator).
bool is_ultrafilter(const WeightedPocset& P, const Ultrafilter& s);
// Checks consistency of `s` only on pairs involving the listed walls,
// assuming the rest was consistent before those walls were flipped.
bool is_consistent_at(const WeightedPocset& P, const Ultrafilter& s,
                      const std::vector<uint32_t>& touched);

void median(const WeightedPocset& P, const Ultrafilter& a, const Ultrafilter& b,
            const Ultrafilter& c, Ultrafilter& out, bool check = true);
Ultrafilter median(const WeightedPocset& P, const Ultrafilter& a,
                   const Ultrafilter& b, const Ultrafilter& c, bool check = true);

Rat distance(const WeightedPocset& P, const Ultrafilter& a, const Ultrafilter& b);
// Walls where a and b pick different sides, ascending.
std::vector<uint32_t> diff_walls(const Ultrafilter& a, const Ultrafilter& b);

struct MedianRealization {
    PocsetPtr pocset;
    std::vector<Ultrafilter> vertices;        // BFS discovery order from seed
    std::map<Bits, uint32_t> index;           // side bits -> vertex index
    std::vector<std::pair<uint32_t, uint32_t>> edges;  // one-wall neighbours

    const WeightedPocset& P() const { return *pocset; }
    std::optional<uint32_t> find(const Ultrafilter& u) const {
        auto it = index.find(u.side);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

// BFS over minimal-halfspace flips; materializes every ultrafilter of a
// finite pocset.  Throws on invalid seed or when the vertex cap is exceeded.
MedianRealization realize(PocsetPtr P, const Ultrafilter& seed,
                          uint64_t vertex_cap = 1000000);

// {v : median(a, v, b) == v}, as indices into R.
std::vector<uint32_t> interval(const MedianRealization& R, uint32_t a, uint32_t b);

// Halfspaces h with B inside h and A inside h*, ascending.
std::vector<HalfId> halfspace_interval(const MedianRealization& R,
                                       const std::vector<uint32_t>& A,
                                       const std::vector<uint32_t>& B);

// Exact max clique in the wall transversality graph.
uint32_t rank(const WeightedPocset& P);

// Minimal partition of a \ b into <=-chains, each listed from the largest
// halfspace down.  Exact Dilworth via bipartite matching.
std::vector<std::vector<HalfId>> chain_decomposition(const WeightedPocset& P,
                                                     const Ultrafilter& a,
                                                     const Ultrafilter& b);

// Union of the intervals {j : h <= j <= k} over h, k in A.
std::vector<HalfId> inseparable_closure(const WeightedPocset& P,
                                        const std::vector<HalfId>& A);
bool is_inseparable(const WeightedPocset& P, const std::vector<HalfId>& A);

}  // namespace msp
