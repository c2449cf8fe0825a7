#include "mspace/pocset.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace msp {

Rat WeightedPocset::total_weight() const {
    Rat s = 0;
    for (const Rat& w : weight_) s += w;
    return s;
}

WeightedPocset WeightedPocset::from_relations(
    uint32_t walls, std::vector<Rat> weights,
    const std::vector<std::pair<HalfId, HalfId>>& rel, std::vector<uint32_t> birth) {
    WeightedPocset P;
    P.walls_ = walls;
    P.weight_ = std::move(weights);
    P.birth_ = std::move(birth);
    P.dense_ = true;
    uint32_t n = 2 * walls;
    P.up_.assign(n, Bits(n));
    for (HalfId a = 0; a < n; ++a) P.up_[a].set(a);
    for (auto [a, b] : rel) {
        if (a >= n || b >= n) throw std::invalid_argument("leq pair out of range");
        P.up_[a].set(b);
        P.up_[mate(b)].set(mate(a));
    }
    // Warshall transitive closure on the bit matrix.
    for (HalfId k = 0; k < n; ++k)
        for (HalfId a = 0; a < n; ++a)
            if (P.up_[a].get(k) && a != k)
                for (size_t wi = 0; wi < P.up_[a].words(); ++wi)
                    P.up_[a].w[wi] |= P.up_[k].w[wi];
    P.down_.assign(n, Bits(n));
    for (HalfId a = 0; a < n; ++a)
        P.up_[a].for_each_set([&](size_t b) { P.down_[b].set(a); });
    return P;
}

WeightedPocset WeightedPocset::from_comparator(uint32_t walls, std::vector<Rat> weights,
                                               std::function<bool(HalfId, HalfId)> cmp,
                                               std::vector<uint32_t> birth) {
    WeightedPocset P;
    P.walls_ = walls;
    P.weight_ = std::move(weights);
    P.birth_ = std::move(birth);
    P.dense_ = false;
    P.cmp_ = std::move(cmp);
    return P;
}

std::vector<std::string> WeightedPocset::validate() const {
    std::vector<std::string> bad;
    if (!dense_) {
        bad.push_back("validate requires the dense backend");
        return bad;
    }
    uint32_t n = 2 * walls_;
    for (uint32_t w = 0; w < walls_; ++w)
        if (weight_[w] <= 0)
            bad.push_back("wall " + std::to_string(w) + ": weight not positive");
    for (HalfId a = 0; a < n; ++a) {
        if (!up_[a].get(a)) bad.push_back("id " + std::to_string(a) + ": not reflexive");
        if (up_[a].get(mate(a)))
            bad.push_back("wall " + std::to_string(wall_of(a)) + ": degenerate wall (h <= h*)");
    }
    for (HalfId a = 0; a < n; ++a)
        for (HalfId b = 0; b < n; ++b) {
            if (!up_[a].get(b)) continue;
            if (b != a && up_[b].get(a))
                bad.push_back("ids " + std::to_string(a) + "," + std::to_string(b) +
                              ": antisymmetry violated");
            if (!up_[mate(b)].get(mate(a)))
                bad.push_back("ids " + std::to_string(a) + "," + std::to_string(b) +
                              ": duality violated");
            if (!bits_subset(up_[b], up_[a]))
                bad.push_back("ids " + std::to_string(a) + "," + std::to_string(b) +
                              ": transitivity violated");
        }
    return bad;
}

bool is_ultrafilter(const WeightedPocset& P, const Ultrafilter& s) {
    if (s.walls() != P.wall_count()) return false;
    uint32_t W = P.wall_count();
    if (P.has_dense()) {
        Bits chosen(2 * W);
        for (uint32_t w = 0; w < W; ++w) chosen.set(s.at(w));
        for (uint32_t w = 0; w < W; ++w)
            if (!bits_subset(P.up_row(s.at(w)), chosen)) return false;
        return true;
    }
    for (uint32_t u = 0; u < W; ++u) {
        HalfId h = s.at(u);
        for (uint32_t v = u + 1; v < W; ++v) {
            HalfId k = s.at(v);
            // chosen sides must intersect: forbidden is h <= k* (disjointness)
            if (P.leq(h, mate(k)) || P.leq(k, mate(h))) return false;
        }
    }
    return true;
}

bool is_consistent_at(const WeightedPocset& P, const Ultrafilter& s,
                      const std::vector<uint32_t>& touched) {
    uint32_t W = P.wall_count();
    for (uint32_t u : touched) {
        HalfId h = s.at(u);
        for (uint32_t v = 0; v < W; ++v) {
            if (v == u) continue;
            HalfId k = s.at(v);
            if (P.leq(h, mate(k)) || P.leq(k, mate(h))) return false;
        }
    }
    return true;
}

void median(const WeightedPocset& P, const Ultrafilter& a, const Ultrafilter& b,
            const Ultrafilter& c, Ultrafilter& out, bool check) {
    out.side = Bits(a.walls());
    bits_maj3(a.side, b.side, c.side, out.side);
    if (check && P.has_dense() && !is_ultrafilter(P, out))
        throw std::logic_error("median output failed the ultrafilter axioms");
}

Ultrafilter median(const WeightedPocset& P, const Ultrafilter& a,
                   const Ultrafilter& b, const Ultrafilter& c, bool check) {
    Ultrafilter m(a.walls());
    median(P, a, b, c, m, check);
    return m;
}

std::vector<uint32_t> diff_walls(const Ultrafilter& a, const Ultrafilter& b) {
    std::vector<uint32_t> out;
    Bits x(a.walls());
    bits_xor(a.side, b.side, x);
    x.for_each_set([&](size_t w) { out.push_back(uint32_t(w)); });
    return out;
}

Rat distance(const WeightedPocset& P, const Ultrafilter& a, const Ultrafilter& b) {
    Rat d = 0;
    Bits x(a.walls());
    bits_xor(a.side, b.side, x);
    x.for_each_set([&](size_t w) { d += P.wall_weight(uint32_t(w)); });
    return d;
}

MedianRealization realize(PocsetPtr Pp, const Ultrafilter& seed, uint64_t vertex_cap) {
    const WeightedPocset& P = *Pp;
    if (!is_ultrafilter(P, seed)) throw std::invalid_argument("seed is not an ultrafilter");
    MedianRealization R;
    R.pocset = std::move(Pp);
    uint32_t W = P.wall_count();
    R.vertices.push_back(seed);
    R.index.emplace(seed.side, 0);
    std::deque<uint32_t> q{0};
    Bits chosen(2 * W);
    while (!q.empty()) {
        uint32_t vi = q.front();
        q.pop_front();
        Ultrafilter v = R.vertices[vi];  // copy: vector may reallocate
        for (uint32_t wi = 0; wi < 2 * W; ++wi) chosen.assign(wi, false);
        for (uint32_t w = 0; w < W; ++w) chosen.set(v.at(w));
        for (uint32_t w = 0; w < W; ++w) {
            HalfId h = v.at(w);
            // h flippable iff minimal among chosen sides
            bool minimal;
            if (P.has_dense()) {
                // down(h) ∩ chosen must be exactly {h}
                uint64_t inter = 0;
                P.down_row(h).for_each_set([&](size_t b) { inter += chosen.get(b); });
                minimal = (inter == 1);
            } else {
                minimal = true;
                for (uint32_t u = 0; u < W && minimal; ++u)
                    if (u != w && P.lt(v.at(u), h)) minimal = false;
            }
            if (!minimal) continue;
            Ultrafilter nb = v;
            nb.side.flip(w);
            auto [it, fresh] = R.index.emplace(nb.side, uint32_t(R.vertices.size()));
            if (fresh) {
                if (R.vertices.size() + 1 > vertex_cap)
                    throw std::runtime_error("vertex budget exceeded in realize");
                R.vertices.push_back(nb);
                q.push_back(it->second);
            }
            if (vi < it->second) R.edges.emplace_back(vi, it->second);
        }
    }
    std::sort(R.edges.begin(), R.edges.end());
    R.edges.erase(std::unique(R.edges.begin(), R.edges.end()), R.edges.end());
    return R;
}

std::vector<uint32_t> interval(const MedianRealization& R, uint32_t a, uint32_t b) {
    std::vector<uint32_t> out;
    Ultrafilter m(R.vertices[a].walls());
    for (uint32_t v = 0; v < R.vertices.size(); ++v) {
        median(R.P(), R.vertices[a], R.vertices[v], R.vertices[b], m, false);
        if (m == R.vertices[v]) out.push_back(v);
    }
    return out;
}

std::vector<HalfId> halfspace_interval(const MedianRealization& R,
                                       const std::vector<uint32_t>& A,
                                       const std::vector<uint32_t>& B) {
    std::vector<HalfId> out;
    uint32_t W = R.P().wall_count();
    for (uint32_t w = 0; w < W; ++w) {
        for (HalfId h : {HalfId(2 * w), HalfId(2 * w + 1)}) {
            bool ok = true;
            for (uint32_t b : B)
                if (!R.vertices[b].contains(h)) { ok = false; break; }
            for (uint32_t a : A)
                if (ok && !R.vertices[a].contains(mate(h))) { ok = false; break; }
            if (ok) out.push_back(h);
        }
    }
    return out;
}

namespace {

// Max clique on the transversality graph, branch and bound.
struct CliqueSolver {
    const std::vector<Bits>& adj;
    uint32_t n, best = 0;

    void run(Bits cand, uint32_t size) {
        uint32_t remaining = 0;
        cand.for_each_set([&](size_t) { ++remaining; });
        if (size + remaining <= best) return;
        if (remaining == 0) {
            best = std::max(best, size);
            return;
        }
        std::vector<uint32_t> order;
        cand.for_each_set([&](size_t v) { order.push_back(uint32_t(v)); });
        for (uint32_t v : order) {
            if (size + remaining <= best) return;
            --remaining;
            cand.clear(v);
            Bits next(n);
            for (size_t wi = 0; wi < next.words(); ++wi)
                next.w[wi] = cand.w[wi] & adj[v].w[wi];
            run(next, size + 1);
        }
    }
};

}  // namespace

uint32_t rank(const WeightedPocset& P) {
    uint32_t W = P.wall_count();
    if (W == 0) return 0;
    std::vector<Bits> adj(W, Bits(W));
    for (uint32_t u = 0; u < W; ++u)
        for (uint32_t v = u + 1; v < W; ++v)
            if (P.transverse(u, v)) { adj[u].set(v); adj[v].set(u); }
    CliqueSolver cs{adj, W};
    Bits all(W);
    for (uint32_t v = 0; v < W; ++v) all.set(v);
    cs.best = 1;
    cs.run(all, 0);
    return cs.best;
}

std::vector<std::vector<HalfId>> chain_decomposition(const WeightedPocset& P,
                                                     const Ultrafilter& a,
                                                     const Ultrafilter& b) {
    std::vector<HalfId> el;
    for (uint32_t w : diff_walls(a, b)) el.push_back(a.at(w));
    size_t n = el.size();
    if (n == 0) return {};
    // Kuhn matching on the strict-containment DAG: edge i -> j iff el[i] < el[j].
    std::vector<std::vector<uint32_t>> succ(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j && P.lt(el[i], el[j])) succ[i].push_back(uint32_t(j));
    std::vector<int> match_to(n, -1), match_from(n, -1);
    std::vector<char> used;
    std::function<bool(uint32_t)> try_kuhn = [&](uint32_t i) -> bool {
        for (uint32_t j : succ[i]) {
            if (used[j]) continue;
            used[j] = 1;
            if (match_to[j] < 0 || try_kuhn(uint32_t(match_to[j]))) {
                match_to[j] = int(i);
                match_from[i] = int(j);
                return true;
            }
        }
        return false;
    };
    for (size_t i = 0; i < n; ++i) {
        used.assign(n, 0);
        try_kuhn(uint32_t(i));
    }
    // Chains: start at elements that are nobody's successor in the matching.
    std::vector<std::vector<HalfId>> chains;
    for (size_t j = 0; j < n; ++j) {
        if (match_to[j] >= 0) continue;
        std::vector<HalfId> chain;
        int cur = int(j);
        while (cur >= 0) {
            chain.push_back(el[cur]);
            cur = match_from[cur];
        }
        // match edges go small -> large; list from the largest down
        std::sort(chain.begin(), chain.end(),
                  [&](HalfId x, HalfId y) { return x != y && P.leq(y, x); });
        chains.push_back(std::move(chain));
    }
    std::sort(chains.begin(), chains.end());
    return chains;
}

std::vector<HalfId> inseparable_closure(const WeightedPocset& P,
                                        const std::vector<HalfId>& A) {
    uint32_t n = P.half_count();
    std::vector<HalfId> out;
    if (P.has_dense()) {
        Bits above(n), below(n);
        for (HalfId h : A) {
            for (size_t wi = 0; wi < above.words(); ++wi) {
                above.w[wi] |= P.up_row(h).w[wi];
                below.w[wi] |= P.down_row(h).w[wi];
            }
        }
        for (HalfId j = 0; j < n; ++j)
            if (above.get(j) && below.get(j)) out.push_back(j);
        return out;
    }
    for (HalfId j = 0; j < n; ++j) {
        bool lo = false, hi = false;
        for (HalfId h : A) {
            lo = lo || P.leq(h, j);
            hi = hi || P.leq(j, h);
            if (lo && hi) break;
        }
        if (lo && hi) out.push_back(j);
    }
    return out;
}

bool is_inseparable(const WeightedPocset& P, const std::vector<HalfId>& A) {
    auto cl = inseparable_closure(P, A);
    std::vector<HalfId> a = A;
    std::sort(a.begin(), a.end());
    return cl == a;
}

}  // namespace msp
