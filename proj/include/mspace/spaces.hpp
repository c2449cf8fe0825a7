#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mspace/pocset.hpp"

namespace msp {

// A depth-indexed family of finite pocsets with a basepoint and, per depth
// step, an injection of the previous wall set.  Finite spaces are constant
// in depth.
struct Slice {
    PocsetPtr P;
    Ultrafilter base;               // sigma of the basepoint
    std::vector<uint32_t> inject;   // wall w at depth-1 -> wall index here
};

class GrowingComplex;

// Named boundary direction: a coherent side selection at every depth.
struct BoundaryDir {
    std::string name;
    std::function<Ultrafilter(int)> sigma;
};

// Named generator automorphism.  Partial on halfspaces; `shrink` bounds how
// much domain is lost per application near the truncation boundary.
struct GenAuto {
    std::string name;
    int shrink = 0;
    bool total = false;           // defined everywhere at each depth
    bool depth_coherent = true;   // commutes with the depth injections
    // forward / backward on halfspace ids at a given depth
    std::function<std::optional<HalfId>(int, HalfId)> half, half_inv;
    // vertex maps; when absent and total, transported through `half`
    std::function<std::optional<Ultrafilter>(int, const Ultrafilter&)> vert, vert_inv;
};

class GrowingComplex {
public:
    std::string spec;          // the string that built this space
    int default_depth = 4;
    int min_depth = 1;
    int stable_rank_depth = 1;  // rank constant from this depth on
    uint32_t rank_ = 0;         // declared rank at stable depth
    bool finite = false;        // depth-independent
    std::vector<BoundaryDir> boundary;
    std::vector<GenAuto> gens;
    std::function<Slice(int)> make_slice;

    const Slice& at(int depth) const;
    uint32_t declared_rank() const { return rank_; }
    const GenAuto& gen(const std::string& name) const;
    const BoundaryDir& xi(const std::string& name) const;

private:
    mutable std::mutex cache_mu_;
    mutable std::map<int, Slice> cache_;
};

using ComplexPtr = std::shared_ptr<const GrowingComplex>;

// Generators ---------------------------------------------------------------

// Path with `depth` walls; vertex x in [0, depth]; wall k is {x >= k}.
// Optional weight cycle applied per wall index.
ComplexPtr line(int n, std::vector<Rat> weights = {});
// Finite box; dims[i] walls on axis i; optional per-axis weights.
ComplexPtr grid(std::vector<int> dims, std::vector<Rat> axis_weights = {});
// Rooted q-regular tree truncated at `depth` (root has q children, inner
// vertices q-1); walls are edges.
ComplexPtr regular_tree(int q, int depth);
// Vertices {0<=i,j<=n, 0<=j-i<=width}; rank 2 for width 2.
ComplexPtr strip(int n, int width = 2, std::vector<Rat> weights = {});
// Each tree edge blown up to a square (two transverse wall copies).
ComplexPtr tree_of_squares(ComplexPtr tree);
ComplexPtr product(ComplexPtr X1, ComplexPtr X2);
// Every wall split into two nested hemiatom walls of half weight.
ComplexPtr barycentric_subdivision(ComplexPtr X);

// Spec strings: "line:n=8[,weights=1/2;3]", "grid:dims=2x3", "tree:q=3,d=4",
// "strip:n=8,w=2", "tos:<tree spec>", "subdiv:<spec>",
// "product:<spec>|<spec>", "quadrant:n=8".  Positional forms like "line:8",
// "tree:3:4" are accepted.
ComplexPtr parse_space(const std::string& spec);

// Automorphism words --------------------------------------------------------

// A word in the generators of one complex, evaluated at a chosen depth.
struct Aut {
    ComplexPtr X;
    // applied right to left: word {g,h} is the map g∘h
    std::vector<std::pair<uint32_t, bool>> word;  // (gen index, inverted)

    static Aut identity(ComplexPtr X) { return Aut{std::move(X), {}}; }
    static Aut of(ComplexPtr X, const std::string& gen_name);
    Aut inverse() const;
    Aut then_after(const Aut& inner) const;  // this ∘ inner
    int shrink() const;
    bool total() const;
    std::string name() const;

    std::optional<HalfId> fwd(int depth, HalfId h) const;
    std::optional<HalfId> bwd(int depth, HalfId h) const;
    std::optional<Ultrafilter> vfwd(int depth, const Ultrafilter& u) const;
    std::optional<Ultrafilter> vbwd(int depth, const Ultrafilter& u) const;
};

// All declared generators, optionally filtered by a comma list ("all" or "").
std::vector<Aut> select_gens(ComplexPtr X, const std::string& which);

}  // namespace msp
