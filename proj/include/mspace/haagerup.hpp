#pragma once

#include <map>
#include <string>
#include <vector>

#include "mspace/pocset.hpp"
#include "mspace/spaces.hpp"
#include "mspace/ubs.hpp"

namespace msp {

// Finitely supported function on halfspace ids with exact rational values,
// carrying the weighted L2 structure <u,v> = sum weight(h) u(h) v(h).
struct HVec {
    PocsetPtr P;
    std::map<HalfId, Rat> coef;  // nonzero entries only, ascending ids

    explicit HVec(PocsetPtr p = nullptr) : P(std::move(p)) {}

    Rat at(HalfId h) const;
    void add(HalfId h, const Rat& v);  // accumulate, dropping zeros
    bool is_zero() const { return coef.empty(); }

    Rat inner(const HVec& other) const;
    Rat norm2() const;            // squared weighted L2 norm
    Rat norm_p_p(int p) const;    // sum weight*|v|^p, p in {1, 2}

    HVec& operator+=(const HVec& o);
    HVec& operator-=(const HVec& o);
    HVec scaled(const Rat& s) const;
};
HVec operator+(HVec a, const HVec& b);
HVec operator-(HVec a, const HVec& b);

// 1_A; and the signed form 2_A = 1_A - 1_{A*}, which requires A disjoint
// from its own complements (throws otherwise).
HVec indicator(PocsetPtr P, const std::vector<HalfId>& A);
HVec signed_indicator(PocsetPtr P, const std::vector<HalfId>& A);

// (g.v)(h) = v(g^-1 h): the support is pushed forward through g.  Throws
// when the image of a supported wall is undefined at this depth.
HVec act(const Aut& g, int depth, const HVec& v);

// b^x(g) = g.1_{sigma_x} - 1_{sigma_x}, assembled sparsely on the walls
// separating x from gx; exact identity |b|_2^2 = 2 d(x, gx).  Throws when
// gx is undefined at this depth.
HVec haagerup_cocycle(ComplexPtr X, const Aut& g, int depth, const Ultrafilter& x);
HVec haagerup_cocycle(ComplexPtr X, const Aut& g, int depth);  // at the basepoint

// -(1 - alpha/c) on the shallow part of the set; values in [-1, 0].
HVec f_c(const UBS& omega, const Rat& c);
// Signed sum of the per-piece approximants on their shallow parts.
HVec g_c(const std::vector<UBS>& pieces, const Rat& c);

struct ResidualRow {
    Rat c;
    int depth = 0;
    Rat residual2;        // exact squared residual norm
    double residual = 0;  // float rendering of its square root
};

struct ConvergenceReport {
    std::vector<ResidualRow> rows;  // depth-major, c ascending within a depth
    double beta = 0;                // fitted decay exponent at the last depth
    bool monotone = false;  // residuals strictly decreasing in c per depth
};

// Residual |(g - id) F_{c,Omega} - 1_{Omega \ g Omega}|_2 over the sweep,
// with the containment direction between Omega and its image auto-detected
// (sign-flipped target when the image is the larger set).  Throws when the
// direction is indeterminate.  The decay fit needs at least three c values.
ConvergenceReport ubs_convergence_experiment(const Aut& g, const std::string& xi_name,
                                             const std::vector<Rat>& c_list,
                                             const std::vector<int>& depth_list);

struct WitnessRow {
    std::string gen;
    Rat c;
    int depth = 0;
    Rat residual2;
    double residual = 0;
};

struct WitnessReport {
    bool success = false;
    bool bounded_orbit = false;  // finite complex: orbit-average coboundary
    // The witness vector: the orbit-average coboundary in bounded-orbit mode,
    // otherwise the approximant plus the sparse correction between the
    // basepoint and the reassembled vertex.
    HVec psi;
    Rat c;                     // parameters of the successful (or last) attempt
    int depth = 0;
    std::vector<WitnessRow> rows;  // per attempt, per generator
    Rat best_residual2;            // max over generators, best attempt
    double best_residual = 0;
};

// Searches for psi with |b^x(g) - (g psi - psi)|_2 < epsilon for every
// generator: on finite complexes via the orbit-average coboundary (residual
// exactly 0 when the orbit closes), otherwise by cutting the halfspace set
// toward xi at escalating c in {4^k} with depth >= 4c, up to k =
// max_exponent.  Throws when a generator moves xi.
WitnessReport elementarity_witness(ComplexPtr X, const std::vector<Aut>& gens,
                                   const std::string& xi_name, const Rat& epsilon,
                                   int max_exponent = 9, int min_depth = 8);

}  // namespace msp
