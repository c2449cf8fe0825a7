#include "mspace/convexity.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>

namespace msp {

ConvexSet ConvexSet::of(const MedianRealization& R, std::vector<uint32_t> verts) {
    if (verts.empty()) throw std::invalid_argument("convex set: empty vertex set");
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    uint32_t W = R.P().wall_count();
    ConvexSet C;
    C.R = &R;
    C.member = Bits(uint32_t(R.vertices.size()));
    for (uint32_t v : verts) C.member.set(v);
    C.crossing = Bits(W);
    const Ultrafilter& first = R.vertices[verts[0]];
    for (uint32_t w = 0; w < W; ++w) {
        bool side = first.side.get(w), split = false;
        for (uint32_t v : verts)
            if (R.vertices[v].side.get(w) != side) {
                split = true;
                break;
            }
        if (split)
            C.crossing.set(w);
        else
            C.sigma.push_back(2 * w + (side ? 1 : 0));
    }
    C.verts = std::move(verts);
    return C;
}

ConvexSet convex_hull(const MedianRealization& R, const std::vector<uint32_t>& S) {
    if (S.empty()) throw std::invalid_argument("convex_hull: empty input");
    Bits in(uint32_t(R.vertices.size()));
    std::vector<uint32_t> cur(S);
    std::sort(cur.begin(), cur.end());
    cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
    for (uint32_t v : cur) in.set(v);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<uint32_t> add;
        for (size_t i = 0; i < cur.size(); ++i)
            for (size_t j = i + 1; j < cur.size(); ++j)
                for (uint32_t v : interval(R, cur[i], cur[j]))
                    if (!in.get(v)) {
                        in.set(v);
                        add.push_back(v);
                    }
        if (!add.empty()) {
            grew = true;
            cur.insert(cur.end(), add.begin(), add.end());
            std::sort(cur.begin(), cur.end());
        }
    }
    return ConvexSet::of(R, cur);
}

bool is_convex(const ConvexSet& C) {
    const auto& R = *C.R;
    // convex iff it is the set of vertices on the sigma side of every
    // non-crossing wall
    for (uint32_t v = 0; v < R.vertices.size(); ++v) {
        bool inside = true;
        for (HalfId h : C.sigma)
            if (!R.vertices[v].contains(h)) {
                inside = false;
                break;
            }
        if (inside != C.contains(v)) return false;
    }
    return true;
}

std::vector<uint32_t> walls_between(const ConvexSet& C, uint32_t x) {
    const Ultrafilter& sx = C.R->vertices[x];
    std::vector<uint32_t> out;
    for (HalfId h : C.sigma)
        if (!sx.contains(h)) out.push_back(wall_of(h));
    std::sort(out.begin(), out.end());
    return out;
}

uint32_t gate(const ConvexSet& C, uint32_t x) {
    const auto& R = *C.R;
    if (C.contains(x)) return x;
    std::optional<uint32_t> best;
    std::optional<Rat> bestd;
    bool tie = false;
    for (uint32_t v : C.verts) {
        Rat d = distance(R.P(), R.vertices[x], R.vertices[v]);
        if (!bestd || d < *bestd) {
            bestd = d;
            best = v;
            tie = false;
        } else if (d == *bestd) {
            tie = true;
        }
    }
    if (tie) throw std::logic_error("gate: nearest point not unique (set not convex?)");
    // cross-check: the walls from x to its gate are exactly the walls from x
    // to the set
    std::vector<uint32_t> sep = walls_between(C, x);
    std::vector<uint32_t> d = diff_walls(R.vertices[x], R.vertices[*best]);
    if (sep != d) throw std::logic_error("gate: separating-wall identity failed");
    return *best;
}

namespace {

// walls separating C1 from C2 (non-crossing in both, opposite sides)
std::vector<uint32_t> set_separators(const ConvexSet& C1, const ConvexSet& C2) {
    std::vector<uint32_t> sep;
    for (HalfId h : C1.sigma) {
        uint32_t w = wall_of(h);
        if (!C2.crossing.get(w) &&
            std::find(C2.sigma.begin(), C2.sigma.end(), mate(h)) != C2.sigma.end())
            sep.push_back(w);
    }
    std::sort(sep.begin(), sep.end());
    return sep;
}

}  // namespace

std::pair<uint32_t, uint32_t> pair_of_gates(const ConvexSet& C1, const ConvexSet& C2) {
    const auto& R = *C1.R;
    uint32_t x1 = C1.verts[0], x2 = gate(C2, x1);
    for (int it = 0; it < 1 + int(R.vertices.size()); ++it) {
        uint32_t n1 = gate(C1, x2);
        uint32_t n2 = gate(C2, n1);
        if (n1 == x1 && n2 == x2) break;
        x1 = n1;
        x2 = n2;
    }
    if (gate(C1, x2) != x1 || gate(C2, x1) != x2)
        throw std::logic_error("pair_of_gates: projection iteration did not settle");
    // the walls between the two points are the walls between the two sets
    if (diff_walls(R.vertices[x1], R.vertices[x2]) != set_separators(C1, C2))
        throw std::logic_error("pair_of_gates: wall identity failed");
    return {x1, x2};
}

BridgeResult shores_and_bridge(const ConvexSet& C1, const ConvexSet& C2) {
    const auto& R = *C1.R;
    BridgeResult out;
    std::vector<uint32_t> s1, s2;
    for (uint32_t v : C2.verts) s1.push_back(gate(C1, v));
    for (uint32_t v : C1.verts) s2.push_back(gate(C2, v));
    out.S1 = ConvexSet::of(R, s1);
    out.S2 = ConvexSet::of(R, s2);
    std::tie(out.x1, out.x2) = pair_of_gates(C1, C2);
    out.interval_factor = interval(R, out.x1, out.x2);

    std::vector<uint32_t> bverts;
    for (uint32_t b : out.S1.verts) {
        uint32_t b2 = gate(out.S2, b);
        for (uint32_t v : interval(R, b, b2)) bverts.push_back(v);
    }
    out.B = ConvexSet::of(R, bverts);

    // product witness b -> (projection to S1, median with the gate pair)
    std::map<uint32_t, uint32_t> s1idx, iidx;
    for (uint32_t i = 0; i < out.S1.verts.size(); ++i) s1idx[out.S1.verts[i]] = i;
    for (uint32_t i = 0; i < out.interval_factor.size(); ++i)
        iidx[out.interval_factor[i]] = i;
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> seen;
    for (uint32_t b : out.B.verts) {
        uint32_t p = gate(out.S1, b);
        Ultrafilter m = median(R.P(), R.vertices[b], R.vertices[out.x1],
                               R.vertices[out.x2]);
        auto mi = R.find(m);
        if (!mi || !s1idx.count(p) || !iidx.count(*mi))
            throw std::logic_error("bridge: witness fell outside the factors");
        auto key = std::pair(s1idx[p], iidx[*mi]);
        if (seen.count(key)) throw std::logic_error("bridge: witness not injective");
        seen[key] = b;
        out.witness.emplace_back(key.first, key.second);
    }
    if (out.B.verts.size() != out.S1.verts.size() * out.interval_factor.size())
        throw std::logic_error("bridge: witness not onto the product");
    // weighted isometry, vertex by vertex
    for (size_t i = 0; i < out.B.verts.size(); ++i)
        for (size_t j = i + 1; j < out.B.verts.size(); ++j) {
            auto [pa, qa] = out.witness[i];
            auto [pb, qb] = out.witness[j];
            Rat lhs = distance(R.P(), R.vertices[out.B.verts[i]],
                               R.vertices[out.B.verts[j]]);
            Rat rhs = distance(R.P(), R.vertices[out.S1.verts[pa]],
                               R.vertices[out.S1.verts[pb]]) +
                      distance(R.P(), R.vertices[out.interval_factor[qa]],
                               R.vertices[out.interval_factor[qb]]);
            if (lhs != rhs) throw std::logic_error("bridge: product metric mismatch");
        }
    // walls crossing the bridge = common crossing walls + separating walls
    std::vector<uint32_t> expect;
    for (uint32_t w = 0; w < R.P().wall_count(); ++w)
        if (C1.crossing.get(w) && C2.crossing.get(w)) expect.push_back(w);
    auto sep = set_separators(C1, C2);
    expect.insert(expect.end(), sep.begin(), sep.end());
    std::sort(expect.begin(), expect.end());
    std::vector<uint32_t> got;
    for (uint32_t w = 0; w < R.P().wall_count(); ++w)
        if (out.B.crossing.get(w)) got.push_back(w);
    if (got != expect) throw std::logic_error("bridge: crossing-wall identity failed");
    return out;
}

bool is_strongly_separated(const WeightedPocset& P, HalfId h, HalfId k) {
    if (wall_of(h) == wall_of(k)) return false;
    if (!P.leq(h, mate(k))) return false;  // not disjoint
    for (uint32_t j = 0; j < P.wall_count(); ++j)
        if (P.transverse(j, wall_of(h)) && P.transverse(j, wall_of(k))) return false;
    return true;
}

bool is_strongly_separated_sets(const ConvexSet& C1, const ConvexSet& C2) {
    for (uint32_t v : C1.verts)
        if (C2.contains(v)) return false;
    Bits common = C1.crossing;
    size_t nw = common.w.size();
    for (size_t i = 0; i < nw; ++i) common.w[i] &= C2.crossing.w[i];
    for (size_t i = 0; i < nw; ++i)
        if (common.w[i]) return false;
    return true;
}

namespace {
bool facing_extend(const WeightedPocset& P, std::vector<HalfId>& acc, uint32_t n,
                   HalfId from) {
    if (acc.size() == n) return true;
    for (HalfId h = from; h < P.half_count(); ++h) {
        bool ok = true;
        for (HalfId g : acc)
            if (wall_of(g) == wall_of(h) || !P.leq(h, mate(g))) {
                ok = false;
                break;
            }
        if (!ok) continue;
        acc.push_back(h);
        if (facing_extend(P, acc, n, h + 1)) return true;
        acc.pop_back();
    }
    return false;
}
}  // namespace

std::optional<std::vector<HalfId>> find_facing_tuple(const WeightedPocset& P,
                                                     uint32_t n) {
    if (n < 2) throw std::invalid_argument("find_facing_tuple: need n >= 2");
    std::vector<HalfId> acc;
    if (facing_extend(P, acc, n, 0)) return acc;
    return std::nullopt;
}

std::optional<Aut> skewering_search(ComplexPtr X, const std::vector<Aut>& gens,
                                    int depth, HalfId h, HalfId k, uint32_t max_len) {
    const auto& P = *X->at(depth).P;
    if (!P.leq(h, k)) throw std::invalid_argument("skewering_search: need h <= k");
    std::vector<Aut> steps;
    for (const auto& g : gens) {
        steps.push_back(g);
        Aut gi = g.inverse();
        if (gi.name() != g.name()) steps.push_back(gi);
    }
    std::deque<std::pair<Aut, HalfId>> frontier;
    std::vector<bool> seen(P.half_count(), false);
    frontier.emplace_back(Aut::identity(X), k);
    seen[k] = true;
    bool truncated = false;
    while (!frontier.empty()) {
        auto [word, img] = frontier.front();
        frontier.pop_front();
        if (word.word.size() >= max_len) continue;
        for (const auto& s : steps) {
            auto next = s.fwd(depth, img);
            if (!next) {
                truncated = true;
                continue;
            }
            if (seen[*next]) continue;
            seen[*next] = true;
            Aut w = s.then_after(word);
            if (P.lt(*next, h)) {
                // positive gap: some wall lies weakly between image and h
                Rat gap = 0;
                for (HalfId j = 0; j < P.half_count(); ++j)
                    if (P.leq(*next, j) && P.leq(j, h)) gap += P.weight_of(j);
                if (gap > 0) return w;
            }
            frontier.emplace_back(std::move(w), *next);
        }
    }
    if (truncated)
        throw std::runtime_error(
            "skewering_search: generator images fell off the truncation at depth " +
            std::to_string(depth) + "; retry with a deeper slice");
    return std::nullopt;
}

uint32_t strong_separation_center(const std::array<HalfId, 3>& h,
                                  const std::array<ConvexSet, 3>& k, uint64_t seed) {
    const auto& R = *k[0].R;
    const auto& P = R.P();
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (!P.leq(h[i], mate(h[j])))
                throw std::invalid_argument("strong_separation_center: not a facing triple");
    for (int i = 0; i < 3; ++i) {
        // each k_i must avoid the complement side of h_i entirely
        std::vector<uint32_t> comp;
        for (uint32_t v = 0; v < R.vertices.size(); ++v)
            if (R.vertices[v].contains(mate(h[i]))) comp.push_back(v);
        if (!comp.empty() &&
            !is_strongly_separated_sets(k[i], ConvexSet::of(R, comp)))
            throw std::invalid_argument(
                "strong_separation_center: k_i not strongly separated from the "
                "far side of h_i");
    }
    uint64_t total = uint64_t(k[0].size()) * k[1].size() * k[2].size();
    std::optional<Ultrafilter> z;
    auto probe = [&](uint32_t a, uint32_t b, uint32_t c) {
        Ultrafilter m = median(P, R.vertices[a], R.vertices[b], R.vertices[c]);
        if (!z)
            z = m;
        else if (!(*z == m))
            throw std::runtime_error(
                "strong_separation_center: median moved between sampled triples");
    };
    if (total <= 10000) {
        for (uint32_t a : k[0].verts)
            for (uint32_t b : k[1].verts)
                for (uint32_t c : k[2].verts) probe(a, b, c);
    } else {
        std::mt19937_64 rng(seed);
        for (int t = 0; t < 10000; ++t)
            probe(k[0].verts[rng() % k[0].size()], k[1].verts[rng() % k[1].size()],
                  k[2].verts[rng() % k[2].size()]);
    }
    auto idx = R.find(*z);
    if (!idx) throw std::logic_error("strong_separation_center: center not a vertex");
    return *idx;
}

}  // namespace msp
