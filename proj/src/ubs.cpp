#include "mspace/ubs.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace msp {

namespace {

// Undefined generator images are legitimate only at the two ends of the
// truncation: deep walls whose image passes the horizon (still toward xi)
// and shallow walls whose image drops off the base side (no longer in the
// set).  Anything else means the map does not fix the class at this depth.
enum class Fate { kStays, kLeaves };

Fate classify_undefined(const WeightedPocset& P, HalfId h, int depth, int margin) {
    int b = int(P.birth(wall_of(h)));
    if (b + margin >= depth) return Fate::kStays;
    if (b <= margin) return Fate::kLeaves;
    throw std::runtime_error(
        "undefined generator image away from both truncation margins (wall born at "
        "depth " +
        std::to_string(b) + " of " + std::to_string(depth) + ")");
}

std::vector<std::vector<HalfId>> chain_cover(const WeightedPocset& P,
                                             const std::vector<HalfId>& omega) {
    // shallow-to-deep greedy: append to the first chain whose tail still
    // contains the new halfspace
    std::vector<HalfId> order(omega);
    std::stable_sort(order.begin(), order.end(), [&](HalfId a, HalfId b) {
        return std::pair(P.birth(wall_of(a)), a) < std::pair(P.birth(wall_of(b)), b);
    });
    std::vector<std::vector<HalfId>> chains;
    for (HalfId h : order) {
        bool placed = false;
        for (auto& c : chains)
            if (P.leq(h, c.back())) {
                c.push_back(h);
                placed = true;
                break;
            }
        if (!placed) chains.push_back({h});
    }
    return chains;
}

uint32_t max_birth(const WeightedPocset& P, const std::vector<HalfId>& hs) {
    uint32_t m = 0;
    for (HalfId h : hs) m = std::max(m, P.birth(wall_of(h)));
    return m;
}

bool reaches_horizon(const WeightedPocset& P, const std::vector<HalfId>& chain,
                     int depth) {
    return int(max_birth(P, chain)) + 1 >= depth;
}

// distance from the base vertex along a chain grows strictly by
// construction; a chain certifies divergence when it reaches the horizon
// with at least three members.
constexpr size_t kMinChainLen = 3;

std::vector<HalfId> sorted_unique(std::vector<HalfId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

bool UBS::contains(HalfId h) const {
    return std::binary_search(omega.begin(), omega.end(), h);
}

Rat UBS::weight() const {
    Rat s = 0;
    for (HalfId h : omega) s += P().weight_of(h);
    return s;
}

UBS UBS::with(std::vector<HalfId> o) const {
    UBS u(*this);
    u.omega = sorted_unique(std::move(o));
    return u;
}

UBS sigma_difference(ComplexPtr X, const std::string& xi_name, int depth) {
    return sigma_difference(X, xi_name, X->at(depth).base, depth);
}

UBS sigma_difference(ComplexPtr X, const std::string& xi_name, const Ultrafilter& x,
                     int depth) {
    const BoundaryDir& dir = X->xi(xi_name);
    UBS u;
    u.X = X;
    u.depth = depth;
    u.x = x;
    u.xi = dir.sigma(depth);
    for (uint32_t w = 0; w < u.xi.walls(); ++w)
        if (u.xi.side.get(w) != x.side.get(w)) u.omega.push_back(u.xi.at(w));
    u.omega = sorted_unique(std::move(u.omega));
    u.stable = true;
    // the stability flag compares against the previous truncation; skip the
    // extra slice at very large depths where it would double the footprint
    if (!X->finite && depth > X->min_depth && u.xi.walls() <= 65536) {
        Ultrafilter pxi = dir.sigma(depth - 1);
        const Ultrafilter& px = X->at(depth - 1).base;
        const auto& inj = X->at(depth).inject;
        for (uint32_t w = 0; w < pxi.walls(); ++w) {
            bool prev = pxi.side.get(w) != px.side.get(w);
            bool cur = u.xi.side.get(inj[w]) != x.side.get(inj[w]);
            if (prev != cur) u.stable = false;
        }
    }
    return u;
}

UBSGraph minimal_decomposition(const UBS& o) {
    const auto& P = o.P();
    auto chains = chain_cover(P, o.omega);
    std::vector<std::vector<HalfId>> horizon;
    size_t best_reaching = 0;
    for (auto& c : chains)
        if (reaches_horizon(P, c, o.depth)) {
            best_reaching = std::max(best_reaching, c.size());
            if (c.size() >= kMinChainLen) horizon.push_back(c);
        }
    if (horizon.empty()) {
        int need = o.depth + int(kMinChainLen - best_reaching);
        throw std::runtime_error(
            "no divergence certificate at depth " + std::to_string(o.depth) +
            "; retry with depth >= " + std::to_string(need));
    }

    // chains are equivalent when neither tail is transverse to the other
    auto tail = [&](const std::vector<HalfId>& c) {
        size_t t = std::min(c.size(), size_t(4));
        return std::vector<HalfId>(c.end() - t, c.end());
    };
    auto trans_to = [&](const std::vector<HalfId>& c1, const std::vector<HalfId>& c2) {
        auto t1 = tail(c1), t2 = tail(c2);
        size_t cnt = 0;
        for (HalfId a : t1) {
            bool all = true;
            for (HalfId b : t2)
                if (!P.transverse(wall_of(a), wall_of(b))) {
                    all = false;
                    break;
                }
            if (all) ++cnt;
        }
        return cnt + 1 >= t1.size();
    };
    size_t n = horizon.size();
    std::vector<uint32_t> comp(n);
    std::iota(comp.begin(), comp.end(), 0u);
    std::function<uint32_t(uint32_t)> find = [&](uint32_t a) {
        return comp[a] == a ? a : comp[a] = find(comp[a]);
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (!trans_to(horizon[i], horizon[j]) && !trans_to(horizon[j], horizon[i]))
                comp[find(uint32_t(i))] = find(uint32_t(j));

    UBSGraph G;
    std::map<uint32_t, uint32_t> root_to_class;
    std::vector<std::vector<size_t>> class_chains;
    for (size_t i = 0; i < n; ++i) {
        uint32_t r = find(uint32_t(i));
        if (!root_to_class.count(r)) {
            root_to_class[r] = uint32_t(G.classes.size());
            G.classes.emplace_back();
            class_chains.emplace_back();
        }
        class_chains[root_to_class[r]].push_back(i);
    }
    Bits used(P.half_count());
    for (size_t k = 0; k < G.classes.size(); ++k) {
        auto& cls = G.classes[k];
        for (size_t ci : class_chains[k]) cls.chains.push_back(horizon[ci]);
        // closure: everything weakly between some chain's deepest and some
        // chain's shallowest member, kept inside the input set
        for (HalfId j : o.omega) {
            bool above = false, below = false;
            for (const auto& c : cls.chains) {
                if (P.leq(c.back(), j)) above = true;
                if (P.leq(j, c.front())) below = true;
            }
            if (above && below) {
                cls.members.push_back(j);
                used.set(j);
            }
        }
    }
    for (size_t a = 0; a < G.classes.size(); ++a)
        for (size_t b = 0; b < G.classes.size(); ++b) {
            if (a == b) continue;
            bool ab = false, ba = false;
            for (size_t ca : class_chains[a])
                for (size_t cb : class_chains[b]) {
                    ab = ab || trans_to(horizon[ca], horizon[cb]);
                    ba = ba || trans_to(horizon[cb], horizon[ca]);
                }
            if (ab && !ba) G.edges.emplace_back(uint32_t(a), uint32_t(b));
        }
    for (HalfId h : o.omega)
        if (!used.get(h)) G.residual.push_back(h);
    G.residual_max_birth = max_birth(P, G.residual);
    return G;
}

ReduceResult reduce(const UBS& o) {
    const auto& P = o.P();
    auto chains = chain_cover(P, o.omega);
    std::vector<std::vector<HalfId>> horizon;
    for (auto& c : chains)
        if (c.size() >= kMinChainLen && reaches_horizon(P, c, o.depth))
            horizon.push_back(c);
    ReduceResult out;
    std::vector<HalfId> keep;
    for (HalfId h : o.omega) {
        bool bad = false;
        for (const auto& c : horizon) {
            size_t cnt = 0, other = 0;
            for (HalfId e : c)
                if (e != h && wall_of(e) != wall_of(h)) {
                    ++other;
                    if (P.transverse(wall_of(h), wall_of(e))) ++cnt;
                }
            if (other >= kMinChainLen && cnt + 2 >= other) bad = true;
        }
        if (bad)
            out.removed.push_back(h);
        else
            keep.push_back(h);
    }
    out.reduced = o.with(std::move(keep));
    out.removed_max_birth = max_birth(P, out.removed);
    return out;
}

StrongReduction is_strongly_reduced(const UBS& o) {
    const auto& P = o.P();
    StrongReduction out;
    out.chains = chain_cover(P, o.omega);
    out.strongly_reduced = true;
    for (const auto& c : out.chains) {
        if (reaches_horizon(P, c, o.depth)) {
            if (c.size() < kMinChainLen)
                throw std::runtime_error(
                    "depth too small: a chain reaches the horizon with only " +
                    std::to_string(c.size()) + " members at depth " +
                    std::to_string(o.depth));
        } else {
            out.strongly_reduced = false;
            out.offending.insert(out.offending.end(), c.begin(), c.end());
        }
    }
    std::sort(out.offending.begin(), out.offending.end());
    return out;
}

Rat alpha(const UBS& o, HalfId h) {
    if (!o.contains(h)) throw std::invalid_argument("alpha: halfspace not in the set");
    const auto& P = o.P();
    Rat s = 0;
    for (HalfId j : o.omega)
        if (j != h && P.lt(h, j)) s += P.weight_of(j);
    return s;
}

std::vector<Rat> alpha_all(const UBS& o) {
    const auto& P = o.P();
    auto chains = chain_cover(P, o.omega);
    // each chain is decreasing under inclusion, so within a chain the strict
    // supersets of any halfspace form a prefix; one binary search per
    // (member, chain) pair replaces the quadratic scan
    std::vector<std::vector<Rat>> pref;
    for (const auto& c : chains) {
        std::vector<Rat> p(c.size() + 1);
        for (size_t i = 0; i < c.size(); ++i) p[i + 1] = p[i] + P.weight_of(c[i]);
        pref.push_back(std::move(p));
    }
    std::vector<Rat> out;
    out.reserve(o.omega.size());
    for (HalfId h : o.omega) {
        Rat s = 0;
        for (size_t ci = 0; ci < chains.size(); ++ci) {
            const auto& c = chains[ci];
            size_t lo = 0, hi = c.size();
            while (lo < hi) {
                size_t mid = (lo + hi) / 2;
                if (P.lt(h, c[mid]))
                    lo = mid + 1;
                else
                    hi = mid;
            }
            s += pref[ci][lo];
        }
        out.push_back(std::move(s));
    }
    return out;
}

UBS omega_c(const UBS& o, const Rat& c) {
    const auto& P = o.P();
    auto a = alpha_all(o);
    std::vector<HalfId> keep;
    for (size_t i = 0; i < o.omega.size(); ++i)
        if (a[i] + P.weight_of(o.omega[i]) <= c) keep.push_back(o.omega[i]);
    return o.with(std::move(keep));
}

OmegaCReport check_omega_c_bound(const UBS& o, const Rat& c) {
    const auto& P = o.P();
    OmegaCReport rep;
    UBS shallow = omega_c(o, c);
    rep.measure = shallow.weight();
    rep.bound = Rat(o.X->declared_rank()) * c;
    rep.within_bound = rep.measure <= rep.bound;
    std::vector<HalfId> rest;
    for (HalfId h : o.omega)
        if (!shallow.contains(h)) rest.push_back(h);
    rep.rest_inseparable = is_inseparable(P, rest);
    rep.rest_has_horizon_chain = false;
    for (const auto& ch : chain_cover(P, rest))
        if (ch.size() >= kMinChainLen && reaches_horizon(P, ch, o.depth))
            rep.rest_has_horizon_chain = true;
    return rep;
}

Rat transfer_character(const Aut& g, const UBS& o) {
    const auto& P = o.P();
    int margin = std::max(1, g.shrink());
    Rat gain = 0, loss = 0;
    uint32_t contrib = 0;
    for (HalfId h : o.omega) {
        uint32_t hb = P.birth(wall_of(h));
        auto f = g.fwd(o.depth, h);
        if (f) {
            if (!o.contains(*f)) {
                loss += P.weight_of(h);
                contrib = std::max(contrib, hb);
            }
        } else if (classify_undefined(P, h, o.depth, margin) == Fate::kLeaves) {
            loss += P.weight_of(h);
            contrib = std::max(contrib, hb);
        }
        auto b = g.bwd(o.depth, h);
        if (b) {
            if (!o.contains(*b)) {
                gain += P.weight_of(h);
                contrib = std::max(contrib, hb);
            }
        } else if (classify_undefined(P, h, o.depth, margin) == Fate::kLeaves) {
            gain += P.weight_of(h);
            contrib = std::max(contrib, hb);
        }
    }
    if (int(contrib) * 2 > o.depth + margin)
        throw std::runtime_error(
            "transfer character: exchanged walls reach depth " +
            std::to_string(contrib) + " of " + std::to_string(o.depth) +
            "; the map does not fix this class");
    return gain - loss;
}

Ultrafilter ubs_to_vertex(const UBS& o) {
    const auto& P = o.P();
    Ultrafilter y = o.xi;
    for (HalfId h : o.omega) {
        if (!o.xi.contains(h))
            throw std::invalid_argument("ubs_to_vertex: halfspace not on the xi side");
        y.choose(mate(h));
    }
    // full pairwise consistency is quadratic in the wall count; at very large
    // truncations fall back to a deterministic sample of wall pairs
    uint64_t W = P.wall_count();
    if (W * W <= uint64_t(4) << 26) {
        if (!is_ultrafilter(P, y))
            throw std::runtime_error("ubs_to_vertex: flipped selection is inconsistent");
    } else {
        auto bad_pair = [&](uint32_t a, uint32_t b) {
            return a != b && P.leq(y.at(a), mate(y.at(b)));
        };
        for (uint32_t w = 0; w + 1 < W; ++w)
            if (bad_pair(w, w + 1))
                throw std::runtime_error(
                    "ubs_to_vertex: flipped selection is inconsistent");
        std::mt19937_64 rng(0x5eedULL);
        for (int t = 0; t < 1000000; ++t)
            if (bad_pair(uint32_t(rng() % W), uint32_t(rng() % W)))
                throw std::runtime_error(
                    "ubs_to_vertex: flipped selection is inconsistent");
    }
    std::vector<HalfId> back;
    for (uint32_t w = 0; w < y.walls(); ++w)
        if (y.side.get(w) != o.xi.side.get(w)) back.push_back(o.xi.at(w));
    std::sort(back.begin(), back.end());
    if (back != o.omega)
        throw std::runtime_error("ubs_to_vertex: recovered difference disagrees");
    return y;
}

namespace {

// forward (or backward) image set of `set`, defined images only
std::vector<HalfId> image_of(const Aut& g, int depth, const std::vector<HalfId>& set,
                             bool forward) {
    std::vector<HalfId> out;
    for (HalfId h : set) {
        auto i = forward ? g.fwd(depth, h) : g.bwd(depth, h);
        if (i) out.push_back(*i);
    }
    return sorted_unique(std::move(out));
}

bool cut_level_ok(const UBS& piece, const std::vector<HalfId>& kept,
                  const std::vector<HalfId>& dropped, const Aut& g, bool chi_nonneg,
                  int margin) {
    const auto& P = piece.P();
    int depth = piece.depth;
    auto in = [](const std::vector<HalfId>& v, HalfId h) {
        return std::binary_search(v.begin(), v.end(), h);
    };
    // (a) the kept part maps into itself under the contracting direction
    for (HalfId h : kept) {
        auto i = chi_nonneg ? g.fwd(depth, h) : g.bwd(depth, h);
        if (i) {
            if (!in(kept, *i)) return false;
        } else if (classify_undefined(P, h, depth, margin) == Fate::kLeaves) {
            return false;
        }
    }
    // (b) away from the horizon, the walls with no preimage inside the set
    // are the same whether computed on the whole piece or on the dropped part
    auto fresh = [&](const std::vector<HalfId>& set) {
        auto img = image_of(g, depth, set, true);
        std::vector<HalfId> out;
        for (HalfId h : set)
            if (!in(img, h) && int(P.birth(wall_of(h))) + margin < depth)
                out.push_back(h);
        return out;
    };
    return fresh(piece.omega) == fresh(dropped);
}

}  // namespace

XKResult construct_xK(ComplexPtr X, const std::string& xi_name,
                      const std::vector<Aut>& gens, int depth) {
    UBS full = sigma_difference(X, xi_name, depth);
    UBSGraph G = minimal_decomposition(full);
    int margin = 1;
    for (const auto& g : gens) margin = std::max(margin, g.shrink() + 1);

    XKResult out;
    std::vector<HalfId> keep_all;
    for (const auto& cls : G.classes) {
        UBS piece = full.with(cls.members);
        std::vector<bool> nonneg;
        for (const auto& g : gens) nonneg.push_back(transfer_character(g, piece) >= 0);
        std::optional<Rat> level;
        for (int c = 0; c <= depth && !level; ++c) {
            UBS shallow = omega_c(piece, Rat(c));
            std::vector<HalfId> kept;
            for (HalfId h : piece.omega)
                if (!shallow.contains(h)) kept.push_back(h);
            bool ok = true;
            for (size_t gi = 0; gi < gens.size() && ok; ++gi)
                ok = cut_level_ok(piece, kept, shallow.omega, gens[gi], nonneg[gi],
                                  margin);
            if (ok) {
                level = Rat(c);
                out.pieces.push_back(piece.with(kept));
                keep_all.insert(keep_all.end(), kept.begin(), kept.end());
            }
        }
        if (!level)
            throw std::runtime_error(
                "construct_xK: no generator-stable cut level up to " +
                std::to_string(depth) + "; deeper truncation needed");
        out.thresholds.push_back(*level);
    }

    for (const auto& p : out.pieces) {
        auto sr = is_strongly_reduced(p);
        if (!sr.strongly_reduced)
            throw std::runtime_error("construct_xK: piece not strongly reduced");
    }
    // pieces stay pairwise disjoint even after moving one of them
    for (size_t i = 0; i < out.pieces.size(); ++i)
        for (size_t j = 0; j < out.pieces.size(); ++j) {
            if (i == j) continue;
            for (const auto& g : gens)
                for (HalfId h : image_of(g, depth, out.pieces[j].omega, true))
                    if (out.pieces[i].contains(h))
                        throw std::runtime_error(
                            "construct_xK: moved pieces are not disjoint");
        }
    out.xK = ubs_to_vertex(full.with(keep_all));
    return out;
}

PowerStabilization power_stabilization_check(const Aut& g, const UBS& o, uint32_t r) {
    const auto& P = o.P();
    int depth = o.depth;
    PowerStabilization rep;
    rep.chi = transfer_character(g, o);
    rep.power = 1;
    for (uint32_t i = 2; i <= r; ++i) rep.power *= i;

    // membership of h in g^-i(omega): push h forward i times
    auto member = [&](HalfId h, uint32_t i) -> bool {
        HalfId cur = h;
        for (uint32_t s = 0; s < i; ++s) {
            auto n = g.fwd(depth, cur);
            if (!n)
                return classify_undefined(P, cur, depth, g.shrink() * int(i) + 1) ==
                       Fate::kStays;
            cur = *n;
        }
        return o.contains(cur);
    };
    for (HalfId h : o.omega) {
        bool all = true, any = false;
        for (uint32_t i = 0; i <= r; ++i) {
            bool m = member(h, i);
            all = all && m;
            any = any || m;
        }
        if (all) rep.omega1.push_back(h);
        if (any) rep.omega2.push_back(h);
    }

    int margin = g.shrink() * int(rep.power) + 1;
    auto pow_img = [&](HalfId h, bool forward) -> std::optional<HalfId> {
        HalfId cur = h;
        for (uint64_t s = 0; s < rep.power; ++s) {
            auto n = forward ? g.fwd(depth, cur) : g.bwd(depth, cur);
            if (!n) return std::nullopt;
            cur = *n;
        }
        return cur;
    };
    auto stable_under = [&](const std::vector<HalfId>& set) {
        bool fwd_in = true, bwd_in = true;
        auto in = [&](HalfId h) {
            return std::binary_search(set.begin(), set.end(), h);
        };
        for (HalfId h : set) {
            auto fi = pow_img(h, true);
            if (fi) {
                if (!in(*fi)) fwd_in = false;
            } else if (classify_undefined(P, h, depth, margin) == Fate::kLeaves) {
                fwd_in = false;
            }
            auto bi = pow_img(h, false);
            if (bi) {
                if (!in(*bi)) bwd_in = false;
            } else if (classify_undefined(P, h, depth, margin) == Fate::kLeaves) {
                bwd_in = false;
            }
        }
        // g^{r!} S inside S means every member's forward image is a member
        // or beyond the margin; chi < 0 contracts the other way
        return std::pair(fwd_in, bwd_in);
    };
    auto [o1_pos, o1_neg] = stable_under(rep.omega1);
    auto [o2_pos, o2_neg] = stable_under(rep.omega2);
    if (rep.chi > 0) {
        rep.omega1_stable = o1_pos;
        rep.omega2_stable = o2_pos;
    } else if (rep.chi < 0) {
        rep.omega1_stable = o1_neg;
        rep.omega2_stable = o2_neg;
    } else {
        rep.omega1_stable = o1_pos && o1_neg;
        rep.omega2_stable = o2_pos && o2_neg;
        rep.equality = rep.omega1_stable;
    }
    rep.wallwise = true;
    for (HalfId h : o.omega) {
        auto fi = pow_img(h, true);
        if (!fi) continue;
        if (rep.chi > 0 && !P.leq(*fi, h)) rep.wallwise = false;
        if (rep.chi < 0 && !P.leq(h, *fi)) rep.wallwise = false;
        if (rep.chi == 0 && *fi != h) rep.wallwise = false;
    }
    return rep;
}

}  // namespace msp
