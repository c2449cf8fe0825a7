#include "mspace/spaces.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace msp {

namespace {

constexpr uint32_t kDenseWallLimit = 700;

Rat cyc(const std::vector<Rat>& ws, size_t i) {
    if (ws.empty()) return Rat(1);
    return ws[i % ws.size()];
}

PocsetPtr build_pocset(uint32_t walls, std::vector<Rat> weights,
                       std::function<bool(HalfId, HalfId)> cmp,
                       std::vector<uint32_t> birth) {
    if (walls <= kDenseWallLimit) {
        std::vector<std::pair<HalfId, HalfId>> rel;
        uint32_t n = 2 * walls;
        for (HalfId a = 0; a < n; ++a)
            for (HalfId b = 0; b < n; ++b)
                if (a != b && cmp(a, b)) rel.emplace_back(a, b);
        return std::make_shared<WeightedPocset>(WeightedPocset::from_relations(
            walls, std::move(weights), rel, std::move(birth)));
    }
    return std::make_shared<WeightedPocset>(WeightedPocset::from_comparator(
        walls, std::move(weights), std::move(cmp), std::move(birth)));
}

std::vector<uint32_t> iota_inject(uint32_t prev_walls) {
    std::vector<uint32_t> v(prev_walls);
    for (uint32_t i = 0; i < prev_walls; ++i) v[i] = i;
    return v;
}

Ultrafilter all_ones(uint32_t walls) {
    Ultrafilter u(walls);
    for (uint32_t w = 0; w < walls; ++w) u.side.set(w);
    return u;
}

// Vertex image through the inverse halfspace map; needs every wall covered.
std::optional<Ultrafilter> transport_vert(
    int depth, uint32_t walls,
    const std::function<std::optional<HalfId>(int, HalfId)>& half_inv,
    const Ultrafilter& u) {
    Ultrafilter out(walls);
    for (uint32_t w = 0; w < walls; ++w) {
        auto pre = half_inv(depth, 2 * w);
        if (!pre) return std::nullopt;
        out.side.assign(w, !u.contains(*pre));
    }
    return out;
}

}  // namespace

const Slice& GrowingComplex::at(int depth) const {
    if (depth < min_depth)
        throw std::invalid_argument(spec + ": depth below minimum " +
                                    std::to_string(min_depth));
    int key = finite ? 0 : depth;
    {
        std::lock_guard<std::mutex> lk(cache_mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    Slice s = make_slice(depth);
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, std::move(s)).first;
    return it->second;
}

const GenAuto& GrowingComplex::gen(const std::string& name) const {
    for (const auto& g : gens)
        if (g.name == name) return g;
    throw std::invalid_argument(spec + ": no generator named '" + name + "'");
}

const BoundaryDir& GrowingComplex::xi(const std::string& name) const {
    for (const auto& b : boundary)
        if (b.name == name) return b;
    throw std::invalid_argument(spec + ": no boundary direction named '" + name + "'");
}

// line ----------------------------------------------------------------------

ComplexPtr line(int n, std::vector<Rat> weights) {
    if (n < 1) throw std::invalid_argument("line: n must be >= 1");
    auto X = std::make_shared<GrowingComplex>();
    X->spec = "line:n=" + std::to_string(n);
    X->default_depth = n;
    X->rank_ = 1;
    auto wt = std::make_shared<std::vector<Rat>>(std::move(weights));

    // wall w is {x >= w+1}; id 2w its positive side
    auto cmp = [](HalfId a, HalfId b) {
        if (a == b) return true;
        uint32_t wa = wall_of(a), wb = wall_of(b);
        bool sa = a & 1, sb = b & 1;
        if (sa != sb) return false;
        return sa ? wa <= wb : wa >= wb;
    };
    X->make_slice = [wt, cmp](int d) {
        uint32_t W = uint32_t(d);
        std::vector<Rat> ws(W);
        std::vector<uint32_t> birth(W);
        for (uint32_t w = 0; w < W; ++w) { ws[w] = cyc(*wt, w); birth[w] = w + 1; }
        Slice s;
        s.P = build_pocset(W, ws, cmp, birth);
        s.base = all_ones(W);
        s.inject = iota_inject(W >= 1 ? W - 1 : 0);
        return s;
    };
    X->boundary.push_back({"end", [](int d) { return Ultrafilter(uint32_t(d)); }});

    auto coord = [](const Ultrafilter& u) {
        uint32_t ones = 0;
        for (uint64_t w : u.side.w) ones += uint32_t(__builtin_popcountll(w));
        return int(u.walls() - ones);
    };
    GenAuto shift;
    shift.name = "shift";
    shift.shrink = 1;
    shift.half = [](int d, HalfId h) -> std::optional<HalfId> {
        uint32_t w = wall_of(h);
        if (w + 1 >= uint32_t(d)) return std::nullopt;
        return HalfId(h + 2);
    };
    shift.half_inv = [](int, HalfId h) -> std::optional<HalfId> {
        if (wall_of(h) == 0) return std::nullopt;
        return HalfId(h - 2);
    };
    auto place = [](int d, int x) -> std::optional<Ultrafilter> {
        if (x < 0 || x > d) return std::nullopt;
        Ultrafilter u{uint32_t(d)};
        for (int w = 0; w < d; ++w) u.side.assign(size_t(w), w + 1 > x);
        return u;
    };
    shift.vert = [coord, place](int d, const Ultrafilter& u) {
        return place(d, coord(u) + 1);
    };
    shift.vert_inv = [coord, place](int d, const Ultrafilter& u) {
        return place(d, coord(u) - 1);
    };
    X->gens.push_back(shift);

    GenAuto flip;  // x -> d - x; total but depends on the truncation depth
    flip.name = "flip";
    flip.total = true;
    flip.depth_coherent = false;
    flip.half = [](int d, HalfId h) -> std::optional<HalfId> {
        uint32_t w = wall_of(h);
        return HalfId(2 * (uint32_t(d) - 1 - w) + ((h & 1) ^ 1));
    };
    flip.half_inv = flip.half;
    flip.vert = [coord, place](int d, const Ultrafilter& u) {
        return place(d, d - coord(u));
    };
    flip.vert_inv = flip.vert;
    X->gens.push_back(flip);
    return X;
}

// grid ----------------------------------------------------------------------

ComplexPtr grid(std::vector<int> dims, std::vector<Rat> axis_weights) {
    if (dims.empty()) throw std::invalid_argument("grid: no dims");
    for (int d : dims)
        if (d < 1) throw std::invalid_argument("grid: dims must be >= 1");
    auto X = std::make_shared<GrowingComplex>();
    std::string ds;
    for (size_t i = 0; i < dims.size(); ++i)
        ds += (i ? "x" : "") + std::to_string(dims[i]);
    X->spec = "grid:dims=" + ds;
    X->finite = true;
    X->default_depth = 1;
    X->rank_ = uint32_t(dims.size());
    auto dv = std::make_shared<std::vector<int>>(dims);
    auto off = std::make_shared<std::vector<uint32_t>>();
    uint32_t W = 0;
    for (int d : dims) { off->push_back(W); W += uint32_t(d); }
    auto axis_of = [dv, off](uint32_t w) {
        size_t a = 0;
        while (a + 1 < dv->size() && w >= (*off)[a + 1]) ++a;
        return a;
    };
    auto cmp = [axis_of, off](HalfId x, HalfId y) {
        if (x == y) return true;
        uint32_t wx = wall_of(x), wy = wall_of(y);
        size_t ax = axis_of(wx), ay = axis_of(wy);
        if (ax != ay) return false;
        bool sx = x & 1, sy = y & 1;
        if (sx != sy) return false;
        return sx ? wx <= wy : wx >= wy;
    };
    auto wt = std::make_shared<std::vector<Rat>>(std::move(axis_weights));
    X->make_slice = [W, cmp, axis_of, wt](int) {
        std::vector<Rat> ws(W);
        for (uint32_t w = 0; w < W; ++w) ws[w] = cyc(*wt, axis_of(w));
        Slice s;
        s.P = build_pocset(W, ws, cmp, std::vector<uint32_t>(W, 0));
        s.base = all_ones(W);
        s.inject = iota_inject(W);
        return s;
    };

    GenAuto rot;  // x_a -> dims[a] - x_a on every axis
    rot.name = "rot180";
    rot.total = true;
    rot.half = [dv, off, axis_of](int, HalfId h) -> std::optional<HalfId> {
        uint32_t w = wall_of(h);
        size_t a = axis_of(w);
        uint32_t k = w - (*off)[a];
        uint32_t w2 = (*off)[a] + uint32_t((*dv)[a]) - 1 - k;
        return HalfId(2 * w2 + ((h & 1) ^ 1));
    };
    rot.half_inv = rot.half;
    X->gens.push_back(rot);
    return X;
}

// regular tree ----------------------------------------------------------------

namespace {

// Edge-indexed shape of the truncated q-regular rooted tree.
struct TreeShape {
    std::vector<int> parent;      // parent edge index or -1
    std::vector<int> level;       // 1-based level of each edge
    std::vector<uint32_t> level_start;
    uint32_t leftmost_at(int lvl) const { return level_start[size_t(lvl) - 1]; }
};

std::shared_ptr<TreeShape> tree_shape(int q, int depth) {
    auto S = std::make_shared<TreeShape>();
    std::vector<uint32_t> prev;  // edge indices at the previous level
    for (int l = 1; l <= depth; ++l) {
        S->level_start.push_back(uint32_t(S->parent.size()));
        std::vector<uint32_t> cur;
        if (l == 1) {
            for (int c = 0; c < q; ++c) {
                cur.push_back(uint32_t(S->parent.size()));
                S->parent.push_back(-1);
                S->level.push_back(l);
            }
        } else {
            for (uint32_t p : prev)
                for (int c = 0; c < q - 1; ++c) {
                    cur.push_back(uint32_t(S->parent.size()));
                    S->parent.push_back(int(p));
                    S->level.push_back(l);
                }
        }
        prev = std::move(cur);
    }
    return S;
}

// is `anc` an ancestor of (or equal to) `e`
bool tree_anc(const TreeShape& S, uint32_t anc, uint32_t e) {
    int cur = int(e);
    while (cur >= 0) {
        if (uint32_t(cur) == anc) return true;
        cur = S.parent[cur];
    }
    return false;
}

}  // namespace

ComplexPtr regular_tree(int q, int depth) {
    if (q < 2 || depth < 1) throw std::invalid_argument("tree: need q >= 2, depth >= 1");
    auto X = std::make_shared<GrowingComplex>();
    X->spec = "tree:q=" + std::to_string(q) + ",d=" + std::to_string(depth);
    X->default_depth = depth;
    X->rank_ = 1;
    auto shapes = std::make_shared<std::map<int, std::shared_ptr<TreeShape>>>();
    auto shape = [shapes, q](int d) {
        auto it = shapes->find(d);
        if (it == shapes->end()) it = shapes->emplace(d, tree_shape(q, d)).first;
        return it->second;
    };
    X->make_slice = [shape](int d) {
        auto S = shape(d);
        uint32_t W = uint32_t(S->parent.size());
        auto cmp = [S](HalfId a, HalfId b) {
            if (a == b) return true;
            uint32_t ta = wall_of(a), tb = wall_of(b);
            bool sa = a & 1, sb = b & 1;  // 0 = subtree (away from root) side
            if (ta == tb) return false;
            if (!sa && !sb) return tree_anc(*S, tb, ta);
            if (sa && sb) return tree_anc(*S, ta, tb);
            if (!sa && sb) return !tree_anc(*S, ta, tb) && !tree_anc(*S, tb, ta);
            return false;
        };
        std::vector<uint32_t> birth(W);
        for (uint32_t w = 0; w < W; ++w) birth[w] = uint32_t(S->level[w]);
        Slice s;
        s.P = build_pocset(W, std::vector<Rat>(W, Rat(1)), cmp, birth);
        s.base = all_ones(W);
        auto Sprev = (d > 1) ? shape(d - 1) : nullptr;
        s.inject = iota_inject(Sprev ? uint32_t(Sprev->parent.size()) : 0);
        return s;
    };
    X->boundary.push_back({"ray", [shape](int d) {
        auto S = shape(d);
        Ultrafilter u = all_ones(uint32_t(S->parent.size()));
        for (int l = 1; l <= d; ++l) u.side.clear(S->leftmost_at(l));
        return u;
    }});

    // Automorphisms from a permutation of the root's child slots, identity on
    // deeper slot choices.
    auto perm_gen = [shape, q, X](const std::string& name,
                                  std::function<int(int)> proot,
                                  std::function<int(int)> proot_inv) {
        auto edge_map = [shape, q](int d, std::function<int(int)> pr, uint32_t e) {
            auto S = shape(d);
            // path of slots from root to e
            std::vector<int> slots;
            int cur = int(e);
            while (cur >= 0) {
                int par = S->parent[cur];
                uint32_t first = (par < 0) ? S->leftmost_at(1)
                                           : uint32_t(0);
                int slot;
                if (par < 0) {
                    slot = int(uint32_t(cur) - first);
                } else {
                    // children of `par` are contiguous; locate the first one
                    uint32_t lvl = uint32_t(S->level[cur]);
                    uint32_t base = S->leftmost_at(int(lvl));
                    // index of par within its level
                    uint32_t par_base = S->leftmost_at(S->level[par]);
                    uint32_t par_idx = uint32_t(par) - par_base;
                    slot = int(uint32_t(cur) - (base + par_idx * uint32_t(q - 1)));
                }
                slots.push_back(slot);
                cur = par;
            }
            std::reverse(slots.begin(), slots.end());
            slots[0] = pr(slots[0]);
            // rebuild the edge index from the new slot path
            uint32_t idx = S->leftmost_at(1) + uint32_t(slots[0]);
            for (size_t i = 1; i < slots.size(); ++i) {
                uint32_t lvl_base = S->leftmost_at(int(i) + 1);
                uint32_t par_base = S->leftmost_at(int(i));
                uint32_t par_idx = idx - par_base;
                idx = lvl_base + par_idx * uint32_t(q - 1) + uint32_t(slots[i]);
            }
            return idx;
        };
        GenAuto g;
        g.name = name;
        g.total = true;
        g.half = [edge_map, proot](int d, HalfId h) -> std::optional<HalfId> {
            return HalfId(2 * edge_map(d, proot, wall_of(h)) + (h & 1));
        };
        g.half_inv = [edge_map, proot_inv](int d, HalfId h) -> std::optional<HalfId> {
            return HalfId(2 * edge_map(d, proot_inv, wall_of(h)) + (h & 1));
        };
        X->gens.push_back(std::move(g));
    };
    perm_gen("rot", [q](int s) { return (s + 1) % q; },
             [q](int s) { return (s + q - 1) % q; });
    if (q >= 3)
        perm_gen("rotfix",  // fixes child 0 (and hence the "ray" end)
                 [q](int s) { return s == 0 ? 0 : 1 + (s % (q - 1)); },
                 [q](int s) { return s == 0 ? 0 : 1 + ((s + q - 3) % (q - 1)); });
    return X;
}

// strip -----------------------------------------------------------------------

ComplexPtr strip(int n, int width, std::vector<Rat> weights) {
    if (n < 1 || width < 1) throw std::invalid_argument("strip: need n, width >= 1");
    auto X = std::make_shared<GrowingComplex>();
    X->spec = "strip:n=" + std::to_string(n) + ",w=" + std::to_string(width);
    X->default_depth = n;
    X->rank_ = width >= 2 ? 2 : 1;
    auto wt = std::make_shared<std::vector<Rat>>(std::move(weights));
    // wall 2c = V_c = {i >= c+1}, wall 2c+1 = H_c = {j >= c+1}; 0 <= j-i <= width
    uint32_t ww = uint32_t(width);
    auto cmp = [ww](HalfId a, HalfId b) {
        if (a == b) return true;
        uint32_t wa = wall_of(a), wb = wall_of(b);
        bool ha = wa & 1, hb = wb & 1;  // horizontal?
        uint32_t ca = wa >> 1, cb = wb >> 1;
        bool sa = a & 1, sb = b & 1;    // 1 = negative side
        if (sa != sb) return false;
        if (!sa) {  // positive sides
            if (ha == hb) return ca >= cb;
            if (!ha) return cb <= ca;          // V_a+ in H_b+
            return cb + ww <= ca;              // H_a+ in V_b+
        }
        if (ha == hb) return ca <= cb;
        if (ha) return ca <= cb;               // H_a- in V_b-  (dual of V+ in H+)
        return ca + ww <= cb;                  // V_a- in H_b-
    };
    X->make_slice = [wt, cmp](int d) {
        uint32_t W = 2 * uint32_t(d);
        std::vector<Rat> ws(W);
        std::vector<uint32_t> birth(W);
        for (uint32_t w = 0; w < W; ++w) { ws[w] = cyc(*wt, w & 1); birth[w] = (w >> 1) + 1; }
        Slice s;
        s.P = build_pocset(W, ws, cmp, birth);
        s.base = all_ones(W);
        s.inject = iota_inject(W >= 2 ? W - 2 : 0);
        return s;
    };
    X->boundary.push_back({"diag", [](int d) { return Ultrafilter(2 * uint32_t(d)); }});

    auto coords = [](const Ultrafilter& u) {
        int i = 0, j = 0;
        for (uint32_t w = 0; w < u.walls(); ++w)
            if (!u.side.get(w)) ((w & 1) ? j : i) += 1;
        return std::pair<int, int>(i, j);
    };
    auto place = [ww](int d, int i, int j) -> std::optional<Ultrafilter> {
        if (i < 0 || j < 0 || i > d || j > d || j - i < 0 || uint32_t(j - i) > ww)
            return std::nullopt;
        Ultrafilter u(2 * uint32_t(d));
        for (int c = 0; c < d; ++c) {
            u.side.assign(size_t(2 * c), c + 1 > i);
            u.side.assign(size_t(2 * c + 1), c + 1 > j);
        }
        return u;
    };
    GenAuto g;
    g.name = "dshift";  // (i, j) -> (i+1, j+1)
    g.shrink = 1;
    g.half = [](int d, HalfId h) -> std::optional<HalfId> {
        uint32_t w = wall_of(h);
        if ((w >> 1) + 1 >= uint32_t(d)) return std::nullopt;
        return HalfId(h + 4);
    };
    g.half_inv = [](int, HalfId h) -> std::optional<HalfId> {
        if ((wall_of(h) >> 1) == 0) return std::nullopt;
        return HalfId(h - 4);
    };
    g.vert = [coords, place](int d, const Ultrafilter& u) {
        auto [i, j] = coords(u);
        return place(d, i + 1, j + 1);
    };
    g.vert_inv = [coords, place](int d, const Ultrafilter& u) {
        auto [i, j] = coords(u);
        return place(d, i - 1, j - 1);
    };
    X->gens.push_back(std::move(g));
    return X;
}

// tree of squares --------------------------------------------------------------

ComplexPtr tree_of_squares(ComplexPtr T) {
    if (T->declared_rank() != 1)
        throw std::invalid_argument("tree_of_squares: input must have rank 1");
    auto X = std::make_shared<GrowingComplex>();
    X->spec = "tos:" + T->spec;
    X->default_depth = T->default_depth;
    X->min_depth = T->min_depth;
    X->finite = T->finite;
    X->rank_ = 2;
    X->make_slice = [T](int d) {
        const Slice& ts = T->at(d);
        PocsetPtr TP = ts.P;
        uint32_t Wt = TP->wall_count(), W = 2 * Wt;
        auto cmp = [TP](HalfId a, HalfId b) {
            if (a == b) return true;
            uint32_t wa = wall_of(a), wb = wall_of(b);
            uint32_t ta = wa >> 1, tb = wb >> 1;
            if (ta == tb) return false;  // copies of one edge are transverse
            return TP->leq(2 * ta + (a & 1), 2 * tb + (b & 1));
        };
        std::vector<Rat> ws(W);
        std::vector<uint32_t> birth(W);
        for (uint32_t w = 0; w < W; ++w) {
            ws[w] = TP->wall_weight(w >> 1);
            birth[w] = TP->birth(w >> 1);
        }
        Slice s;
        s.P = build_pocset(W, ws, cmp, birth);
        s.base = Ultrafilter(W);
        for (uint32_t w = 0; w < W; ++w)
            s.base.side.assign(w, ts.base.side.get(w >> 1));
        s.inject.resize(ts.inject.size() * 2);
        for (size_t t = 0; t < ts.inject.size(); ++t) {
            s.inject[2 * t] = 2 * ts.inject[t];
            s.inject[2 * t + 1] = 2 * ts.inject[t] + 1;
        }
        return s;
    };
    for (const auto& b : T->boundary) {
        auto inner = b.sigma;
        X->boundary.push_back({b.name, [inner](int d) {
            Ultrafilter tu = inner(d);
            Ultrafilter u(2 * tu.walls());
            for (uint32_t w = 0; w < u.walls(); ++w)
                u.side.assign(w, tu.side.get(w >> 1));
            return u;
        }});
    }
    for (const auto& tg : T->gens) {
        GenAuto g;
        g.name = tg.name;
        g.shrink = tg.shrink;
        g.total = tg.total;
        g.depth_coherent = tg.depth_coherent;
        auto lift = [](const std::function<std::optional<HalfId>(int, HalfId)>& f) {
            return [f](int d, HalfId a) -> std::optional<HalfId> {
                uint32_t w = wall_of(a);
                auto img = f(d, 2 * (w >> 1) + (a & 1));
                if (!img) return std::nullopt;
                return HalfId(2 * (2 * wall_of(*img) + (w & 1)) + (*img & 1));
            };
        };
        g.half = lift(tg.half);
        g.half_inv = lift(tg.half_inv);
        X->gens.push_back(std::move(g));
    }
    return X;
}

// product -----------------------------------------------------------------------

ComplexPtr product(ComplexPtr X1, ComplexPtr X2) {
    auto X = std::make_shared<GrowingComplex>();
    X->spec = "product:" + X1->spec + "|" + X2->spec;
    X->default_depth = std::max(X1->default_depth, X2->default_depth);
    X->min_depth = std::max(X1->min_depth, X2->min_depth);
    X->finite = X1->finite && X2->finite;
    X->rank_ = X1->declared_rank() + X2->declared_rank();
    X->make_slice = [X1, X2](int d) {
        const Slice& s1 = X1->at(d);
        const Slice& s2 = X2->at(d);
        uint32_t W1 = s1.P->wall_count(), W2 = s2.P->wall_count(), W = W1 + W2;
        PocsetPtr P1 = s1.P, P2 = s2.P;
        auto cmp = [P1, P2, W1](HalfId a, HalfId b) {
            if (a == b) return true;
            uint32_t wa = wall_of(a), wb = wall_of(b);
            bool fa = wa >= W1, fb = wb >= W1;
            if (fa != fb) return false;
            if (!fa) return P1->leq(a, b);
            return P2->leq(2 * (wa - W1) + (a & 1), 2 * (wb - W1) + (b & 1));
        };
        std::vector<Rat> ws(W);
        std::vector<uint32_t> birth(W);
        Slice s;
        s.base = Ultrafilter(W);
        for (uint32_t w = 0; w < W; ++w) {
            if (w < W1) {
                ws[w] = P1->wall_weight(w);
                birth[w] = P1->birth(w);
                s.base.side.assign(w, s1.base.side.get(w));
            } else {
                ws[w] = P2->wall_weight(w - W1);
                birth[w] = P2->birth(w - W1);
                s.base.side.assign(w, s2.base.side.get(w - W1));
            }
        }
        s.P = build_pocset(W, ws, cmp, birth);
        uint32_t pW1 = uint32_t(s1.inject.size()), pW2 = uint32_t(s2.inject.size());
        s.inject.resize(pW1 + pW2);
        for (uint32_t w = 0; w < pW1; ++w) s.inject[w] = s1.inject[w];
        for (uint32_t w = 0; w < pW2; ++w) s.inject[pW1 + w] = W1 + s2.inject[w];
        return s;
    };
    for (const auto& b1 : X1->boundary)
        for (const auto& b2 : X2->boundary) {
            auto f1 = b1.sigma, f2 = b2.sigma;
            X->boundary.push_back({b1.name + "|" + b2.name, [f1, f2](int d) {
                Ultrafilter u1 = f1(d), u2 = f2(d);
                Ultrafilter u(u1.walls() + u2.walls());
                for (uint32_t w = 0; w < u1.walls(); ++w)
                    u.side.assign(w, u1.side.get(w));
                for (uint32_t w = 0; w < u2.walls(); ++w)
                    u.side.assign(u1.walls() + w, u2.side.get(w));
                return u;
            }});
        }

    // generator pairs g1|g2, including identity in one factor
    auto add_pair = [&](const GenAuto* g1, const GenAuto* g2) {
        GenAuto g;
        g.name = std::string(g1 ? g1->name : "id") + "|" + (g2 ? g2->name : "id");
        g.shrink = std::max(g1 ? g1->shrink : 0, g2 ? g2->shrink : 0);
        g.total = (!g1 || g1->total) && (!g2 || g2->total);
        g.depth_coherent = (!g1 || g1->depth_coherent) && (!g2 || g2->depth_coherent);
        auto lift = [X1, X2](const GenAuto* a, const GenAuto* b, bool inv) {
            return [X1, X2, a, b, inv](int d, HalfId h) -> std::optional<HalfId> {
                uint32_t W1 = X1->at(d).P->wall_count();
                uint32_t w = wall_of(h);
                if (w < W1) {
                    if (!a) return h;
                    auto r = (inv ? a->half_inv : a->half)(d, h);
                    return r;
                }
                if (!b) return h;
                auto r = (inv ? b->half_inv : b->half)(d, 2 * (w - W1) + (h & 1));
                if (!r) return std::nullopt;
                return HalfId(2 * (wall_of(*r) + W1) + (*r & 1));
            };
        };
        g.half = lift(g1, g2, false);
        g.half_inv = lift(g1, g2, true);
        auto vlift = [X1, X2](const GenAuto* a, const GenAuto* b, bool inv) {
            return [X1, X2, a, b,
                    inv](int d, const Ultrafilter& u) -> std::optional<Ultrafilter> {
                uint32_t W1 = X1->at(d).P->wall_count();
                uint32_t W2 = X2->at(d).P->wall_count();
                Ultrafilter u1(W1), u2(W2);
                for (uint32_t w = 0; w < W1; ++w) u1.side.assign(w, u.side.get(w));
                for (uint32_t w = 0; w < W2; ++w) u2.side.assign(w, u.side.get(W1 + w));
                std::optional<Ultrafilter> r1 = u1, r2 = u2;
                if (a) {
                    auto& f = inv ? a->vert_inv : a->vert;
                    if (f) r1 = f(d, u1);
                    else if (a->total)
                        r1 = transport_vert(d, W1, inv ? a->half : a->half_inv, u1);
                    else return std::nullopt;
                }
                if (b) {
                    auto& f = inv ? b->vert_inv : b->vert;
                    if (f) r2 = f(d, u2);
                    else if (b->total)
                        r2 = transport_vert(d, W2, inv ? b->half : b->half_inv, u2);
                    else return std::nullopt;
                }
                if (!r1 || !r2) return std::nullopt;
                Ultrafilter out(W1 + W2);
                for (uint32_t w = 0; w < W1; ++w) out.side.assign(w, r1->side.get(w));
                for (uint32_t w = 0; w < W2; ++w)
                    out.side.assign(W1 + w, r2->side.get(w));
                return out;
            };
        };
        g.vert = vlift(g1, g2, false);
        g.vert_inv = vlift(g1, g2, true);
        X->gens.push_back(std::move(g));
    };
    for (const auto& g1 : X1->gens) add_pair(&g1, nullptr);
    for (const auto& g2 : X2->gens) add_pair(nullptr, &g2);
    for (const auto& g1 : X1->gens)
        for (const auto& g2 : X2->gens) add_pair(&g1, &g2);
    return X;
}

// barycentric subdivision --------------------------------------------------------

ComplexPtr barycentric_subdivision(ComplexPtr X0) {
    auto X = std::make_shared<GrowingComplex>();
    X->spec = "subdiv:" + X0->spec;
    X->default_depth = X0->default_depth;
    X->min_depth = X0->min_depth;
    X->finite = X0->finite;
    X->rank_ = X0->declared_rank();
    // orig wall u -> new walls 2u (A, inner hemiatom) and 2u+1 (B);
    // A+ inside B+.
    X->make_slice = [X0](int d) {
        const Slice& s0 = X0->at(d);
        PocsetPtr P0 = s0.P;
        uint32_t W0 = P0->wall_count(), W = 2 * W0;
        auto cmp = [P0](HalfId a, HalfId b) {
            if (a == b) return true;
            uint32_t nwa = wall_of(a), nwb = wall_of(b);
            uint32_t u = nwa >> 1, v = nwb >> 1;
            bool pa = nwa & 1, pb = nwb & 1;
            bool sa = a & 1, sb = b & 1;
            if (u == v) {
                if (sa != sb) return false;
                if (!sa) return !pa && pb;  // A+ in B+
                return pa && !pb;           // B- in A-
            }
            return P0->leq(2 * u + sa, 2 * v + sb);
        };
        std::vector<Rat> ws(W);
        std::vector<uint32_t> birth(W);
        Slice s;
        s.base = Ultrafilter(W);
        for (uint32_t w = 0; w < W; ++w) {
            ws[w] = P0->wall_weight(w >> 1) / 2;
            birth[w] = P0->birth(w >> 1);
            s.base.side.assign(w, s0.base.side.get(w >> 1));
        }
        s.P = build_pocset(W, ws, cmp, birth);
        s.inject.resize(s0.inject.size() * 2);
        for (size_t u = 0; u < s0.inject.size(); ++u) {
            s.inject[2 * u] = 2 * s0.inject[u];
            s.inject[2 * u + 1] = 2 * s0.inject[u] + 1;
        }
        return s;
    };
    for (const auto& b : X0->boundary) {
        auto inner = b.sigma;
        X->boundary.push_back({b.name, [inner](int d) {
            Ultrafilter tu = inner(d);
            Ultrafilter u(2 * tu.walls());
            for (uint32_t w = 0; w < u.walls(); ++w)
                u.side.assign(w, tu.side.get(w >> 1));
            return u;
        }});
    }
    for (const auto& g0 : X0->gens) {
        GenAuto g;
        g.name = g0.name;
        g.shrink = g0.shrink;
        g.total = g0.total;
        g.depth_coherent = g0.depth_coherent;
        auto lift = [](const std::function<std::optional<HalfId>(int, HalfId)>& f) {
            return [f](int d, HalfId a) -> std::optional<HalfId> {
                uint32_t nw = wall_of(a);
                uint32_t u = nw >> 1;
                bool p = nw & 1, s = a & 1;
                auto img = f(d, 2 * u + s);
                if (!img) return std::nullopt;
                uint32_t v = wall_of(*img);
                bool sout = *img & 1;
                bool flip = sout != s;
                return HalfId(2 * (2 * v + (p ^ flip)) + sout);
            };
        };
        g.half = lift(g0.half);
        g.half_inv = lift(g0.half_inv);
        X->gens.push_back(std::move(g));
    }
    return X;
}

// spec parsing --------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int paren = 0;
    for (char c : s) {
        if (c == '(') ++paren;
        if (c == ')') --paren;
        if (c == sep && paren == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip_parens(std::string s) {
    while (s.size() >= 2 && s.front() == '(' && s.back() == ')')
        s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<Rat> parse_weights(const std::string& s) {
    std::vector<Rat> out;
    for (const auto& t : split(s, ';')) out.push_back(parse_rat(t));
    return out;
}

// "k=v,k=v" or positional; returns (named, positional)
struct Args {
    std::map<std::string, std::string> named;
    std::vector<std::string> pos;

    std::string get(const std::string& key, size_t pidx, const std::string& dflt) const {
        auto it = named.find(key);
        if (it != named.end()) return it->second;
        if (pidx < pos.size()) return pos[pidx];
        return dflt;
    }
};

Args parse_args(const std::string& s) {
    Args a;
    if (s.empty()) return a;
    for (const auto& part : split(s, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos)
            a.pos.push_back(part);
        else
            a.named[part.substr(0, eq)] = part.substr(eq + 1);
    }
    return a;
}

int to_int(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("bad integer for ") + what + ": '" + s + "'");
    }
}

}  // namespace

ComplexPtr parse_space(const std::string& spec_in) {
    std::string spec = strip_parens(spec_in);
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "line") {
        Args a = parse_args(rest);
        std::vector<Rat> ws;
        if (a.named.count("weights")) ws = parse_weights(a.named.at("weights"));
        return line(to_int(a.get("n", 0, "8"), "line n"), ws);
    }
    if (name == "grid") {
        Args a = parse_args(rest);
        std::vector<int> dims;
        for (const auto& t : split(a.get("dims", 0, "2x2"), 'x'))
            dims.push_back(to_int(t, "grid dims"));
        std::vector<Rat> ws;
        if (a.named.count("weights")) ws = parse_weights(a.named.at("weights"));
        return grid(dims, ws);
    }
    if (name == "tree") {
        Args a = parse_args(rest);
        // accept "tree:3:4" (colon positional) as well
        if (rest.find(':') != std::string::npos && a.pos.size() == 1) {
            auto parts = split(rest, ':');
            return regular_tree(to_int(parts[0], "tree q"), to_int(parts[1], "tree d"));
        }
        return regular_tree(to_int(a.get("q", 0, "3"), "tree q"),
                            to_int(a.get("d", 1, "3"), "tree d"));
    }
    if (name == "strip") {
        Args a = parse_args(rest);
        std::vector<Rat> ws;
        if (a.named.count("weights")) ws = parse_weights(a.named.at("weights"));
        return strip(to_int(a.get("n", 0, "8"), "strip n"),
                     to_int(a.get("w", 1, "2"), "strip w"), ws);
    }
    if (name == "tos" || name == "tree_of_squares") return tree_of_squares(parse_space(rest));
    if (name == "subdiv") return barycentric_subdivision(parse_space(rest));
    if (name == "product") {
        auto parts = split(rest, '|');
        if (parts.size() < 2) throw std::invalid_argument("product: need two factors");
        ComplexPtr X = parse_space(parts[0]);
        for (size_t i = 1; i < parts.size(); ++i) X = product(X, parse_space(parts[i]));
        return X;
    }
    if (name == "quadrant") {
        Args a = parse_args(rest);
        int n = to_int(a.get("n", 0, "8"), "quadrant n");
        auto X1 = line(n), X2 = line(n);
        auto P = product(X1, X2);
        auto Q = std::make_shared<GrowingComplex>();
        Q->default_depth = P->default_depth;
        Q->min_depth = P->min_depth;
        Q->stable_rank_depth = P->stable_rank_depth;
        Q->rank_ = P->rank_;
        Q->finite = P->finite;
        Q->boundary = P->boundary;
        Q->gens = P->gens;
        Q->make_slice = P->make_slice;
        Q->spec = "quadrant:n=" + std::to_string(n);
        Q->boundary.push_back({"corner", Q->xi("end|end").sigma});
        GenAuto d = Q->gen("shift|shift");
        d.name = "dshift";
        Q->gens.push_back(std::move(d));
        return Q;
    }
    throw std::invalid_argument("unknown space generator: '" + name + "'");
}

// Aut ------------------------------------------------------------------------------

Aut Aut::of(ComplexPtr X, const std::string& gen_name) {
    if (gen_name == "id") return identity(std::move(X));
    const auto& gs = X->gens;
    for (uint32_t i = 0; i < gs.size(); ++i)
        if (gs[i].name == gen_name) return Aut{std::move(X), {{i, false}}};
    throw std::invalid_argument("no generator named '" + gen_name + "'");
}

Aut Aut::inverse() const {
    Aut r{X, {}};
    for (auto it = word.rbegin(); it != word.rend(); ++it)
        r.word.emplace_back(it->first, !it->second);
    return r;
}

Aut Aut::then_after(const Aut& inner) const {
    Aut r{X, word};
    r.word.insert(r.word.end(), inner.word.begin(), inner.word.end());
    return r;
}

int Aut::shrink() const {
    int s = 0;
    for (auto [i, inv] : word) s += X->gens[i].shrink;
    return s;
}

bool Aut::total() const {
    for (auto [i, inv] : word)
        if (!X->gens[i].total) return false;
    return true;
}

std::string Aut::name() const {
    if (word.empty()) return "id";
    std::string s;
    for (auto [i, inv] : word) {
        if (!s.empty()) s += ".";
        s += X->gens[i].name;
        if (inv) s += "^-1";
    }
    return s;
}

std::optional<HalfId> Aut::fwd(int depth, HalfId h) const {
    std::optional<HalfId> cur = h;
    for (auto it = word.rbegin(); it != word.rend() && cur; ++it) {
        const GenAuto& g = X->gens[it->first];
        cur = (it->second ? g.half_inv : g.half)(depth, *cur);
    }
    return cur;
}

std::optional<HalfId> Aut::bwd(int depth, HalfId h) const {
    std::optional<HalfId> cur = h;
    for (auto it = word.begin(); it != word.end() && cur; ++it) {
        const GenAuto& g = X->gens[it->first];
        cur = (it->second ? g.half : g.half_inv)(depth, *cur);
    }
    return cur;
}

namespace {
std::optional<Ultrafilter> apply_vert(const GrowingComplex& X, const GenAuto& g,
                                      bool inv, int depth, const Ultrafilter& u) {
    const auto& f = inv ? g.vert_inv : g.vert;
    if (f) return f(depth, u);
    if (g.total)
        return transport_vert(depth, X.at(depth).P->wall_count(),
                              inv ? g.half : g.half_inv, u);
    return std::nullopt;
}
}  // namespace

std::optional<Ultrafilter> Aut::vfwd(int depth, const Ultrafilter& u) const {
    std::optional<Ultrafilter> cur = u;
    for (auto it = word.rbegin(); it != word.rend() && cur; ++it)
        cur = apply_vert(*X, X->gens[it->first], it->second, depth, *cur);
    return cur;
}

std::optional<Ultrafilter> Aut::vbwd(int depth, const Ultrafilter& u) const {
    std::optional<Ultrafilter> cur = u;
    for (auto it = word.begin(); it != word.end() && cur; ++it)
        cur = apply_vert(*X, X->gens[it->first], !it->second, depth, *cur);
    return cur;
}

std::vector<Aut> select_gens(ComplexPtr X, const std::string& which) {
    std::vector<Aut> out;
    if (which.empty() || which == "all") {
        for (uint32_t i = 0; i < X->gens.size(); ++i) out.push_back(Aut{X, {{i, false}}});
        return out;
    }
    for (const auto& name : split(which, ',')) out.push_back(Aut::of(X, name));
    return out;
}

}  // namespace msp
