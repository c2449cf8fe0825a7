#include <doctest.h>

#include <algorithm>

#include "mspace/pocset.hpp"
#include "mspace/spaces.hpp"

using namespace msp;

namespace {

MedianRealization realize_at(const ComplexPtr& X, int depth) {
    const Slice& s = X->at(depth);
    return realize(s.P, s.base);
}

// Restricts the depth-d slice along the injection chain down to depth d0.
bool coherent_step(const ComplexPtr& X, int d) {
    const Slice& lo = X->at(d - 1);
    const Slice& hi = X->at(d);
    const auto& inj = hi.inject;
    if (inj.size() != lo.P->wall_count()) return false;
    for (uint32_t w = 0; w < lo.P->wall_count(); ++w) {
        if (lo.P->wall_weight(w) != hi.P->wall_weight(inj[w])) return false;
        if (lo.base.side.get(w) != hi.base.side.get(inj[w])) return false;
    }
    for (uint32_t u = 0; u < lo.P->wall_count(); ++u)
        for (uint32_t v = 0; v < lo.P->wall_count(); ++v)
            for (int su = 0; su < 2; ++su)
                for (int sv = 0; sv < 2; ++sv) {
                    HalfId a = 2 * u + su, b = 2 * v + sv;
                    HalfId ia = 2 * inj[u] + su, ib = 2 * inj[v] + sv;
                    if (lo.P->leq(a, b) != hi.P->leq(ia, ib)) return false;
                }
    return true;
}

bool preserves_structure(const ComplexPtr& X, const GenAuto& g, int d) {
    const auto& P = *X->at(d).P;
    uint32_t n = P.half_count();
    for (HalfId a = 0; a < n; ++a) {
        auto ia = g.half(d, a);
        if (!ia) continue;
        auto im = g.half(d, mate(a));
        if (!im || *im != mate(*ia)) return false;
        if (P.weight_of(a) != P.weight_of(*ia)) return false;
        // inverse really inverts
        auto back = g.half_inv(d, *ia);
        if (!back || *back != a) return false;
        for (HalfId b = 0; b < n; ++b) {
            auto ib = g.half(d, b);
            if (!ib) continue;
            if (P.leq(a, b) != P.leq(*ia, *ib)) return false;
        }
    }
    return true;
}

bool has_wall_inversion(const ComplexPtr& X, const GenAuto& g, int d) {
    uint32_t n = X->at(d).P->half_count();
    for (HalfId a = 0; a < n; ++a) {
        auto ia = g.half(d, a);
        if (ia && *ia == mate(a)) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("line: counts and rank") {
    auto X = parse_space("line:n=3");
    auto R = realize_at(X, 3);
    CHECK(R.vertices.size() == 4);
    CHECK(R.P().wall_count() == 3);
    CHECK(rank(R.P()) == 1);
}

TEST_CASE("grid: counts and rank") {
    auto X = parse_space("grid:dims=2x2");
    auto R = realize_at(X, 1);
    CHECK(R.vertices.size() == 9);
    CHECK(rank(R.P()) == 2);
}

TEST_CASE("strip: vertex count fixed by the inequalities, rank 2") {
    auto X = parse_space("strip:n=4,w=2");
    auto R = realize_at(X, 4);
    // |{0<=i,j<=4, 0<=j-i<=2}| = 12
    CHECK(R.vertices.size() == 12);
    CHECK(rank(R.P()) == 2);
    CHECK(X->at(4).P->validate().empty());
}

TEST_CASE("strip requires square width for rank 2") {
    auto X = parse_space("strip:n=4,w=1");
    CHECK(rank(*X->at(4).P) == 1);
}

TEST_CASE("bad generator parameters are rejected") {
    CHECK_THROWS(parse_space("line:n=0"));
    CHECK_THROWS(parse_space("strip:n=-2"));
    CHECK_THROWS(parse_space("tree:q=1,d=2"));
    CHECK_THROWS(parse_space("grid:dims=0x2"));
    CHECK_THROWS(parse_space("nosuch:n=1"));
    CHECK_THROWS(parse_space("line:n=abc"));
}

TEST_CASE("tree of squares: single edge becomes one square") {
    auto X = parse_space("tos:line:1");
    auto R = realize_at(X, 1);
    CHECK(R.vertices.size() == 4);
    CHECK(rank(R.P()) == 2);
}

TEST_CASE("tree of squares: tripod becomes 3 squares sharing the center") {
    auto X = parse_space("tos:tree:3:1");
    auto R = realize_at(X, 1);
    CHECK(R.vertices.size() == 10);
}

TEST_CASE("tree of squares: 2-edge path gives 7 vertices") {
    auto X = parse_space("tos:line:2");
    auto R = realize_at(X, 2);
    CHECK(R.vertices.size() == 7);
}

TEST_CASE("tree of squares rejects non-tree input") {
    CHECK_THROWS(parse_space("tos:grid:dims=2x2"));
}

TEST_CASE("tree of squares: the tree sits inside as a median subalgebra at doubled scale") {
    auto T = parse_space("tree:q=3,d=2");
    auto X = parse_space("tos:tree:3:2");
    auto RT = realize_at(T, 2);
    auto RX = realize_at(X, 2);
    // embed: both copies of a tree wall take the tree side
    auto embed = [&](const Ultrafilter& tu) {
        Ultrafilter u(2 * tu.walls());
        for (uint32_t w = 0; w < u.walls(); ++w) u.side.assign(w, tu.side.get(w >> 1));
        return u;
    };
    std::vector<uint32_t> img;
    for (const auto& tv : RT.vertices) {
        auto idx = RX.find(embed(tv));
        REQUIRE(idx.has_value());
        img.push_back(*idx);
    }
    for (uint32_t a = 0; a < RT.vertices.size(); ++a)
        for (uint32_t b = 0; b < RT.vertices.size(); ++b) {
            CHECK(distance(RX.P(), RX.vertices[img[a]], RX.vertices[img[b]]) ==
                  2 * distance(RT.P(), RT.vertices[a], RT.vertices[b]));
            for (uint32_t c = 0; c < RT.vertices.size(); ++c) {
                auto m = median(RX.P(), RX.vertices[img[a]], RX.vertices[img[b]],
                                RX.vertices[img[c]]);
                auto tm = median(RT.P(), RT.vertices[a], RT.vertices[b], RT.vertices[c]);
                CHECK(m == embed(tm));
            }
        }
}

TEST_CASE("product: square, l1 metric, additive rank") {
    auto X = parse_space("product:line:1|line:1");
    auto R = realize_at(X, 1);
    CHECK(R.vertices.size() == 4);
    CHECK(rank(R.P()) == 2);

    auto Y = parse_space("product:tree:3:2|line:3");
    auto RY = realize_at(Y, 3);
    auto T = parse_space("tree:q=3,d=3");
    auto L = parse_space("line:n=3");
    auto RT = realize_at(T, 3);
    auto RL = realize_at(L, 3);
    uint32_t WT = RT.P().wall_count();
    auto split = [&](const Ultrafilter& u) {
        Ultrafilter u1(WT), u2(u.walls() - WT);
        for (uint32_t w = 0; w < WT; ++w) u1.side.assign(w, u.side.get(w));
        for (uint32_t w = WT; w < u.walls(); ++w) u2.side.assign(w - WT, u.side.get(w));
        return std::pair(u1, u2);
    };
    for (uint32_t a = 0; a < RY.vertices.size(); a += 7)
        for (uint32_t b = 0; b < RY.vertices.size(); b += 5) {
            auto [a1, a2] = split(RY.vertices[a]);
            auto [b1, b2] = split(RY.vertices[b]);
            CHECK(distance(RY.P(), RY.vertices[a], RY.vertices[b]) ==
                  distance(RT.P(), a1, b1) + distance(RL.P(), a2, b2));
        }
    CHECK(rank(RY.P()) == 2);
}

TEST_CASE("product of trees has transverse cross-factor walls") {
    auto X = parse_space("product:tree:3:2|tree:3:2");
    const auto& P = *X->at(2).P;
    auto T = parse_space("tree:q=3,d=2");
    uint32_t WT = T->at(2).P->wall_count();
    for (uint32_t u = 0; u < WT; ++u)
        for (uint32_t v = WT; v < P.wall_count(); ++v) CHECK(P.transverse(u, v));
}

TEST_CASE("barycentric subdivision: hemiatom walls, weights, counts") {
    auto X = parse_space("subdiv:line:1");
    auto R = realize_at(X, 1);
    CHECK(R.P().wall_count() == 2);
    CHECK(R.P().wall_weight(0) == Rat(1, 2));
    CHECK(R.P().wall_weight(1) == Rat(1, 2));
    CHECK(R.vertices.size() == 3);

    auto S = parse_space("subdiv:grid:dims=1x1");
    auto RS = realize_at(S, 1);
    CHECK(RS.vertices.size() == 9);
}

TEST_CASE("barycentric subdivision: original vertices embed isometrically") {
    auto X0 = parse_space("grid:dims=2x2");
    auto X = parse_space("subdiv:grid:dims=2x2");
    auto R0 = realize_at(X0, 1);
    auto R = realize_at(X, 1);
    auto embed = [&](const Ultrafilter& u0) {
        Ultrafilter u(2 * u0.walls());
        for (uint32_t w = 0; w < u.walls(); ++w) u.side.assign(w, u0.side.get(w >> 1));
        return u;
    };
    for (uint32_t a = 0; a < R0.vertices.size(); ++a) {
        REQUIRE(R.find(embed(R0.vertices[a])).has_value());
        for (uint32_t b = 0; b < R0.vertices.size(); ++b)
            CHECK(distance(R.P(), embed(R0.vertices[a]), embed(R0.vertices[b])) ==
                  distance(R0.P(), R0.vertices[a], R0.vertices[b]));
    }
}

TEST_CASE("subdivision turns a wall-inverting map into a non-inverting one") {
    auto X0 = parse_space("line:n=1");
    auto X = parse_space("subdiv:line:1");
    CHECK(has_wall_inversion(X0, X0->gen("flip"), 1));
    CHECK(!has_wall_inversion(X, X->gen("flip"), 1));
    CHECK(preserves_structure(X, X->gen("flip"), 1));
}

TEST_CASE("depth coherence for every growing generator") {
    for (const char* spec : {"line:n=6", "strip:n=6,w=2", "tree:q=3,d=4",
                             "tos:tree:3:4", "quadrant:n=6",
                             "product:tree:3:3|line:6", "subdiv:strip:n=6,w=2"}) {
        ComplexPtr X = parse_space(spec);
        for (int d = 2; d <= 4; ++d) {
            INFO(spec, " depth ", d);
            CHECK(coherent_step(X, d));
        }
    }
}

TEST_CASE("rank is stable in depth") {
    for (const char* spec : {"line:n=6", "strip:n=6,w=2", "tree:q=3,d=4", "quadrant:n=6",
                             "tos:tree:3:4"}) {
        ComplexPtr X = parse_space(spec);
        for (int d = 2; d <= 4; ++d) CHECK(rank(*X->at(d).P) == X->declared_rank());
    }
}

TEST_CASE("boundary points are ultrafilters with fresh separating walls at every depth") {
    for (const char* spec : {"line:n=6", "strip:n=6,w=2", "tree:q=3,d=4",
                             "quadrant:n=6", "tos:tree:3:4"}) {
        ComplexPtr X = parse_space(spec);
        for (const auto& b : X->boundary) {
            for (int d = 2; d <= 5; ++d) {
                const Slice& s = X->at(d);
                Ultrafilter sx = b.sigma(d);
                INFO(spec, " xi=", b.name, " depth ", d);
                CHECK(is_ultrafilter(*s.P, sx));
                // some wall born at this depth separates the basepoint from xi
                bool fresh = false;
                for (uint32_t w = 0; w < s.P->wall_count(); ++w)
                    if (s.P->birth(w) == uint32_t(d) &&
                        sx.side.get(w) != s.base.side.get(w))
                        fresh = true;
                CHECK(fresh);
            }
        }
    }
}

TEST_CASE("automorphisms preserve order, complement, weights at working depths") {
    for (const char* spec : {"line:n=5", "grid:dims=2x2", "strip:n=5,w=2", "tree:q=3,d=3",
                             "tos:tree:3:3", "quadrant:n=5", "subdiv:strip:n=5,w=2",
                             "grid:dims=2x3,weights=1/2;3"}) {
        ComplexPtr X = parse_space(spec);
        int d = X->finite ? 1 : 5;
        for (const auto& g : X->gens) {
            INFO(spec, " gen=", g.name);
            CHECK(preserves_structure(X, g, d));
        }
    }
}

TEST_CASE("shift acts by translation on the line") {
    auto X = parse_space("line:n=6");
    const Slice& s = X->at(6);
    Aut g = Aut::of(X, "shift");
    Ultrafilter v = s.base;
    for (int step = 0; step < 6; ++step) {
        auto w = g.vfwd(6, v);
        REQUIRE(w.has_value());
        CHECK(distance(*s.P, v, *w) == Rat(1));
        v = *w;
    }
    CHECK(!g.vfwd(6, v).has_value());  // fell off the truncation
}

TEST_CASE("strip diagonal shift maps V_c to V_{c+1} and H_c to H_{c+1}") {
    auto X = parse_space("strip:n=6,w=2");
    Aut g = Aut::of(X, "dshift");
    for (uint32_t c = 0; c + 1 < 6; ++c) {
        CHECK(g.fwd(6, 2 * (2 * c)) == HalfId(2 * (2 * (c + 1))));
        CHECK(g.fwd(6, 2 * (2 * c + 1)) == HalfId(2 * (2 * (c + 1) + 1)));
    }
    CHECK(!g.fwd(6, 2 * (2 * 5)).has_value());
    // identity: word of g then g^-1
    Aut gi = g.then_after(g.inverse());
    CHECK(gi.fwd(6, 2 * 2 * 2) == HalfId(2 * 2 * 2));
}

TEST_CASE("identity automorphism has shrink 0 and fixes everything") {
    auto X = parse_space("strip:n=6,w=2");
    Aut e = Aut::identity(X);
    CHECK(e.shrink() == 0);
    const Slice& s = X->at(6);
    for (HalfId h = 0; h < s.P->half_count(); ++h) CHECK(e.fwd(6, h) == h);
    CHECK(e.vfwd(6, s.base) == s.base);
}

TEST_CASE("vertex maps agree with halfspace transport where both exist") {
    for (const char* spec : {"line:n=5", "strip:n=5,w=2", "quadrant:n=5"}) {
        ComplexPtr X = parse_space(spec);
        const Slice& s = X->at(5);
        auto R = realize(s.P, s.base, 100000);
        for (const auto& ga : X->gens) {
            Aut g = Aut::of(X, ga.name);
            for (const auto& v : R.vertices) {
                auto img = g.vfwd(5, v);
                if (!img) continue;
                CHECK(is_ultrafilter(*s.P, *img));
                // halfspace map and vertex map tell the same story
                for (HalfId h = 0; h < s.P->half_count(); ++h) {
                    auto ih = g.fwd(5, h);
                    if (!ih) continue;
                    CHECK(v.contains(h) == img->contains(*ih));
                }
            }
        }
    }
}
