#include "mspace/haagerup.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace msp {

Rat HVec::at(HalfId h) const {
    auto it = coef.find(h);
    return it == coef.end() ? Rat(0) : it->second;
}

void HVec::add(HalfId h, const Rat& v) {
    if (v == 0) return;
    auto [it, fresh] = coef.emplace(h, v);
    if (!fresh) {
        it->second += v;
        if (it->second == 0) coef.erase(it);
    }
}

Rat HVec::inner(const HVec& other) const {
    Rat s = 0;
    auto a = coef.begin();
    auto b = other.coef.begin();
    while (a != coef.end() && b != other.coef.end()) {
        if (a->first < b->first)
            ++a;
        else if (b->first < a->first)
            ++b;
        else {
            s += P->weight_of(a->first) * a->second * b->second;
            ++a;
            ++b;
        }
    }
    return s;
}

Rat HVec::norm2() const {
    Rat s = 0;
    for (const auto& [h, v] : coef) s += P->weight_of(h) * v * v;
    return s;
}

Rat HVec::norm_p_p(int p) const {
    if (p != 1 && p != 2) throw std::invalid_argument("norm_p_p: p must be 1 or 2");
    if (p == 2) return norm2();
    Rat s = 0;
    for (const auto& [h, v] : coef) s += P->weight_of(h) * (v < 0 ? -v : v);
    return s;
}

HVec& HVec::operator+=(const HVec& o) {
    for (const auto& [h, v] : o.coef) add(h, v);
    return *this;
}

HVec& HVec::operator-=(const HVec& o) {
    for (const auto& [h, v] : o.coef) add(h, -v);
    return *this;
}

HVec HVec::scaled(const Rat& s) const {
    HVec out(P);
    if (s == 0) return out;
    for (const auto& [h, v] : coef) out.coef.emplace(h, v * s);
    return out;
}

HVec operator+(HVec a, const HVec& b) {
    a += b;
    return a;
}

HVec operator-(HVec a, const HVec& b) {
    a -= b;
    return a;
}

HVec indicator(PocsetPtr P, const std::vector<HalfId>& A) {
    HVec out(std::move(P));
    for (HalfId h : A) out.add(h, 1);
    return out;
}

HVec signed_indicator(PocsetPtr P, const std::vector<HalfId>& A) {
    std::set<HalfId> seen(A.begin(), A.end());
    for (HalfId h : A)
        if (seen.count(mate(h)))
            throw std::invalid_argument(
                "signed_indicator: set contains a halfspace and its complement");
    HVec out(std::move(P));
    for (HalfId h : A) {
        out.add(h, 1);
        out.add(mate(h), -1);
    }
    return out;
}

HVec act(const Aut& g, int depth, const HVec& v) {
    HVec out(v.P);
    for (const auto& [h, val] : v.coef) {
        auto i = g.fwd(depth, h);
        if (!i)
            throw std::runtime_error("act: image of supported halfspace " +
                                     std::to_string(h) + " undefined at depth " +
                                     std::to_string(depth));
        out.add(*i, val);
    }
    return out;
}

HVec haagerup_cocycle(ComplexPtr X, const Aut& g, int depth, const Ultrafilter& x) {
    auto gx = g.vfwd(depth, x);
    if (!gx)
        throw std::runtime_error("haagerup_cocycle: image vertex undefined at depth " +
                                 std::to_string(depth));
    HVec out(X->at(depth).P);
    for (uint32_t w : diff_walls(x, *gx)) {
        out.add(gx->at(w), 1);
        out.add(x.at(w), -1);
    }
    return out;
}

HVec haagerup_cocycle(ComplexPtr X, const Aut& g, int depth) {
    return haagerup_cocycle(X, g, depth, X->at(depth).base);
}

HVec f_c(const UBS& omega, const Rat& c) {
    if (c <= 0) throw std::invalid_argument("f_c: c must be positive");
    const auto& P = omega.P();
    auto a = alpha_all(omega);
    HVec out(omega.X->at(omega.depth).P);
    for (size_t i = 0; i < omega.omega.size(); ++i)
        if (a[i] + P.weight_of(omega.omega[i]) <= c)
            out.add(omega.omega[i], -(1 - a[i] / c));
    return out;
}

HVec g_c(const std::vector<UBS>& pieces, const Rat& c) {
    if (pieces.empty()) throw std::invalid_argument("g_c: no pieces");
    if (c <= 0) throw std::invalid_argument("g_c: c must be positive");
    HVec out(pieces.front().X->at(pieces.front().depth).P);
    for (const auto& piece : pieces) {
        const auto& P = piece.P();
        auto a = alpha_all(piece);
        for (size_t i = 0; i < piece.omega.size(); ++i)
            if (a[i] + P.weight_of(piece.omega[i]) <= c) {
                Rat v = 1 - a[i] / c;
                out.add(piece.omega[i], -v);
                out.add(mate(piece.omega[i]), v);
            }
    }
    return out;
}

namespace {

// Shallow-or-deep classification of an undefined generator image: deep walls
// ride past the horizon (stay in the set), shallow walls drop off the base
// side (leave it); a gap in the middle means the map does not fix the set.
bool undefined_leaves(const WeightedPocset& P, HalfId h, int depth, int margin) {
    int b = int(P.birth(wall_of(h)));
    if (b + margin >= depth) return false;
    if (b <= margin) return true;
    throw std::runtime_error(
        "undefined generator image away from both truncation margins (wall born "
        "at depth " +
        std::to_string(b) + " of " + std::to_string(depth) + ")");
}

// Members of the set without a generator preimage inside it.
std::vector<HalfId> exits_under(const Aut& g, const UBS& O) {
    const auto& P = O.P();
    int margin = std::max(1, g.shrink());
    std::vector<HalfId> A;
    for (HalfId h : O.omega) {
        auto b = g.bwd(O.depth, h);
        if (b) {
            if (!O.contains(*b)) A.push_back(h);
        } else if (undefined_leaves(P, h, O.depth, margin)) {
            A.push_back(h);
        }
    }
    return A;
}

// True when some member's forward image lands outside the set (or drops off
// the shallow margin), i.e. the image is not contained in the set.
bool image_escapes(const Aut& g, const UBS& O) {
    const auto& P = O.P();
    int margin = std::max(1, g.shrink());
    for (HalfId h : O.omega) {
        auto f = g.fwd(O.depth, h);
        if (f) {
            if (!O.contains(*f)) return true;
        } else if (undefined_leaves(P, h, O.depth, margin)) {
            return true;
        }
    }
    return false;
}

double slope_beta(const std::vector<ResidualRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.residual > 0)
            pts.emplace_back(std::log(double(r.c.convert_to<double>())),
                             std::log(r.residual));
    if (pts.size() < 3) return 0;
    double xm = 0, ym = 0;
    for (auto& [x, y] : pts) {
        xm += x;
        ym += y;
    }
    xm /= double(pts.size());
    ym /= double(pts.size());
    double num = 0, den = 0;
    for (auto& [x, y] : pts) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    return den == 0 ? 0 : -num / den;
}

}  // namespace

ConvergenceReport ubs_convergence_experiment(const Aut& g, const std::string& xi_name,
                                             const std::vector<Rat>& c_list,
                                             const std::vector<int>& depth_list) {
    ConvergenceReport rep;
    rep.monotone = true;
    for (int depth : depth_list) {
        UBS O = sigma_difference(g.X, xi_name, depth);
        // containment direction between the set and its image: shrink means
        // members exit under the inverse; growth means forward images escape
        Aut use = g;
        std::vector<HalfId> target_set = exits_under(g, O);
        bool grows = image_escapes(g, O);
        if (!target_set.empty() && grows)
            throw std::runtime_error(
                "ubs_convergence_experiment: containment direction indeterminate "
                "(the image neither contains nor is contained in the set)");
        if (grows) {
            use = g.inverse();
            target_set = exits_under(use, O);
        }
        HVec target = indicator(g.X->at(depth).P, target_set);
        std::optional<Rat> prev;
        for (const Rat& c : c_list) {
            HVec F = f_c(O, c);
            HVec res = act(use, depth, F) - F - target;
            ResidualRow row;
            row.c = c;
            row.depth = depth;
            row.residual2 = res.norm2();
            row.residual = std::sqrt(row.residual2.convert_to<double>());
            if (prev && !(row.residual2 < *prev)) rep.monotone = false;
            prev = row.residual2;
            rep.rows.push_back(std::move(row));
        }
    }
    if (!depth_list.empty()) {
        std::vector<ResidualRow> last(rep.rows.end() - ptrdiff_t(c_list.size()),
                                      rep.rows.end());
        rep.beta = slope_beta(last);
    }
    return rep;
}

namespace {

void check_fixes_xi(ComplexPtr X, const std::vector<Aut>& gens,
                    const std::string& xi_name, int depth) {
    Ultrafilter xi = X->xi(xi_name).sigma(depth);
    for (const auto& g : gens)
        for (uint32_t w = 0; w < xi.walls(); ++w) {
            auto f = g.fwd(depth, xi.at(w));
            if (f && !xi.contains(*f))
                throw std::runtime_error("elementarity_witness: generator " +
                                         g.name() + " does not fix direction " +
                                         xi_name);
        }
}

WitnessReport bounded_orbit_witness(ComplexPtr X, const std::vector<Aut>& gens) {
    int depth = X->min_depth;
    const Ultrafilter& x = X->at(depth).base;
    std::set<Ultrafilter> orbit;
    std::queue<Ultrafilter> frontier;
    orbit.insert(x);
    frontier.push(x);
    constexpr size_t kOrbitCap = 100000;
    while (!frontier.empty()) {
        Ultrafilter u = frontier.front();
        frontier.pop();
        for (const auto& g : gens)
            for (bool inv : {false, true}) {
                auto v = inv ? g.vbwd(depth, u) : g.vfwd(depth, u);
                if (!v)
                    throw std::runtime_error(
                        "elementarity_witness: generator undefined on an orbit "
                        "vertex of the finite complex");
                if (orbit.insert(*v).second) {
                    if (orbit.size() > kOrbitCap)
                        throw std::runtime_error(
                            "elementarity_witness: orbit exceeds vertex budget");
                    frontier.push(*v);
                }
            }
    }

    WitnessReport rep;
    rep.bounded_orbit = true;
    rep.depth = depth;
    rep.c = 0;
    // average of the coboundaries from x to each orbit vertex; exact because
    // the orbit is finite and permuted by every generator
    HVec psi(X->at(depth).P);
    Rat inv_n = Rat(1) / Rat(uint64_t(orbit.size()));
    for (const auto& y : orbit)
        for (uint32_t w : diff_walls(x, y)) {
            psi.add(x.at(w), inv_n);
            psi.add(y.at(w), -inv_n);
        }
    rep.psi = psi;
    rep.success = true;
    bool first = true;
    for (const auto& g : gens) {
        HVec res = haagerup_cocycle(X, g, depth) - (act(g, depth, psi) - psi);
        WitnessRow row;
        row.gen = g.name();
        row.c = 0;
        row.depth = depth;
        row.residual2 = res.norm2();
        row.residual = std::sqrt(row.residual2.convert_to<double>());
        if (first || row.residual2 > rep.best_residual2) {
            rep.best_residual2 = row.residual2;
            rep.best_residual = row.residual;
            first = false;
        }
        if (!(row.residual2 == 0)) rep.success = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace

WitnessReport elementarity_witness(ComplexPtr X, const std::vector<Aut>& gens,
                                   const std::string& xi_name, const Rat& epsilon,
                                   int max_exponent, int min_depth) {
    if (gens.empty()) throw std::invalid_argument("elementarity_witness: no generators");
    if (epsilon <= 0) throw std::invalid_argument("elementarity_witness: epsilon <= 0");
    if (X->finite) return bounded_orbit_witness(X, gens);

    int probe = std::max(min_depth, X->min_depth);
    check_fixes_xi(X, gens, xi_name, probe);

    WitnessReport rep;
    Rat eps2 = epsilon * epsilon;
    bool have_best = false;
    std::string last_error;
    for (int k = 1; k <= max_exponent && !rep.success; ++k) {
        Rat c = 1;
        for (int i = 0; i < k; ++i) c *= 4;
        int depth = std::max({4 * int(c.convert_to<int64_t>()), min_depth, X->min_depth});
        try {
            XKResult xk = construct_xK(X, xi_name, gens, depth);
            HVec psi = g_c(xk.pieces, c);
            const Ultrafilter& x = X->at(depth).base;
            for (uint32_t w : diff_walls(x, xk.xK)) {
                psi.add(x.at(w), 1);
                psi.add(xk.xK.at(w), -1);
            }
            bool all_ok = true;
            Rat worst = 0;
            for (const auto& g : gens) {
                HVec res =
                    haagerup_cocycle(X, g, depth, x) - (act(g, depth, psi) - psi);
                WitnessRow row;
                row.gen = g.name();
                row.c = c;
                row.depth = depth;
                row.residual2 = res.norm2();
                row.residual = std::sqrt(row.residual2.convert_to<double>());
                if (row.residual2 > worst) worst = row.residual2;
                if (!(row.residual2 < eps2)) all_ok = false;
                rep.rows.push_back(std::move(row));
            }
            if (!have_best || worst < rep.best_residual2) {
                rep.best_residual2 = worst;
                rep.best_residual = std::sqrt(worst.convert_to<double>());
                rep.c = c;
                rep.depth = depth;
                rep.psi = psi;
                have_best = true;
            }
            if (all_ok) {
                rep.success = true;
                rep.c = c;
                rep.depth = depth;
                rep.psi = std::move(psi);
            }
        } catch (const std::runtime_error& e) {
            last_error = e.what();
        }
    }
    if (!have_best && !rep.success)
        throw std::runtime_error("elementarity_witness: every escalation step failed; "
                                 "last error: " +
                                 last_error);
    return rep;
}

}  // namespace msp
