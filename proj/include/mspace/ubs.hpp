#pragma once

#include <string>
#include <vector>

#include "mspace/pocset.hpp"
#include "mspace/spaces.hpp"

namespace msp {

// Halfspace set between a base vertex and a boundary direction at one depth,
// or any subset of such a set that still carries a chain reaching the depth
// horizon.
struct UBS {
    ComplexPtr X;
    int depth = 0;
    Ultrafilter x;               // side selection of the base vertex
    Ultrafilter xi;              // side selection of the boundary direction
    std::vector<HalfId> omega;   // the halfspaces, ascending
    bool stable = true;          // membership unchanged from depth-1 on
                                 // shared walls

    const WeightedPocset& P() const { return *X->at(depth).P; }
    bool contains(HalfId h) const;
    Rat weight() const;
    UBS with(std::vector<HalfId> o) const;  // same frame, different support
};

// All halfspaces toward xi that exclude the base vertex (resp. a chosen
// vertex) at the given depth.
UBS sigma_difference(ComplexPtr X, const std::string& xi_name, int depth);
UBS sigma_difference(ComplexPtr X, const std::string& xi_name, const Ultrafilter& x,
                     int depth);

struct UBSClass {
    std::vector<HalfId> members;               // inseparable closure, ascending
    std::vector<std::vector<HalfId>> chains;   // horizon chains, shallow first
};

struct UBSGraph {
    std::vector<UBSClass> classes;  // minimal classes
    std::vector<std::pair<uint32_t, uint32_t>> edges;  // directed, by index
    std::vector<HalfId> residual;   // halfspaces in no class
    uint32_t residual_max_birth = 0;
};

// Minimal classes as closures of grouped horizon chains, edges by the
// one-sided transversality rule.  Throws when no chain reaches the horizon
// (depth too small), naming a usable depth.
UBSGraph minimal_decomposition(const UBS& o);

struct ReduceResult {
    UBS reduced;
    std::vector<HalfId> removed;    // transverse to some horizon chain
    uint32_t removed_max_birth = 0;
};
ReduceResult reduce(const UBS& o);

struct StrongReduction {
    bool strongly_reduced = false;
    std::vector<std::vector<HalfId>> chains;  // the certifying partition
    std::vector<HalfId> offending;            // members of stalled chains
};
// Partitions into inclusion chains; true iff every chain reaches the
// horizon.  Throws when a chain reaches the horizon with too few elements to
// certify divergence.
StrongReduction is_strongly_reduced(const UBS& o);

// Weight of the members strictly separating the base vertex from h.
Rat alpha(const UBS& o, HalfId h);
// alpha for every member at once (aligned with o.omega), via binary searches
// on per-chain weight prefixes; usable at wall counts where the quadratic
// scan is not.
std::vector<Rat> alpha_all(const UBS& o);
// Members whose own wall plus separators weigh at most c.
UBS omega_c(const UBS& o, const Rat& c);

struct OmegaCReport {
    Rat measure;        // weight of the shallow part
    Rat bound;          // rank * c
    bool within_bound = false;
    bool rest_inseparable = false;
    bool rest_has_horizon_chain = false;
};
OmegaCReport check_omega_c_bound(const UBS& o, const Rat& c);

// nu(g^-1 O \ O) - nu(O \ g^-1 O), with undefined images classified by their
// wall's birth depth (shallow: genuinely enters/leaves; deep: beyond the
// horizon, no contribution).  Throws when g visibly fails to fix the class.
Rat transfer_character(const Aut& g, const UBS& o);

// The vertex y with sigma_difference(xi, y) == o.omega: flip exactly those
// walls of xi.  Verified; throws if the flip is not an ultrafilter or the
// recomputed difference disagrees.
Ultrafilter ubs_to_vertex(const UBS& o);

struct XKResult {
    Ultrafilter xK;
    std::vector<UBS> pieces;        // one per minimal class, shallow part cut
    std::vector<Rat> thresholds;    // the cut level found per piece
};
// Cuts each minimal class below the smallest level whose complement is
// generator-stable, then reassembles the vertex realizing the union.
XKResult construct_xK(ComplexPtr X, const std::string& xi_name,
                      const std::vector<Aut>& gens, int depth);

struct PowerStabilization {
    Rat chi;
    uint64_t power = 1;             // r!
    std::vector<HalfId> omega1;     // intersection of g^-i images, i <= r
    std::vector<HalfId> omega2;     // union of g^-i images, i <= r
    bool omega1_stable = false;     // g^{r!} omega1 inside omega1 (or reverse
                                    // for negative chi)
    bool omega2_stable = false;
    bool equality = false;          // exact when chi == 0
    bool wallwise = false;          // g^{r!} h nested in h per wall when
                                    // chi > 0 (reverse when chi < 0)
};
PowerStabilization power_stabilization_check(const Aut& g, const UBS& o, uint32_t r);

}  // namespace msp
