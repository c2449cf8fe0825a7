#include <doctest.h>

#include <algorithm>

#include "mspace/pocset.hpp"
#include "mspace/spaces.hpp"
#include "oracles.hpp"

using namespace msp;

namespace {

PocsetPtr cube3() {
    // 3 pairwise transverse unit walls
    return std::make_shared<WeightedPocset>(
        WeightedPocset::from_relations(3, {1, 1, 1}, {}));
}

PocsetPtr nested3() {
    // h0 <= h1 <= h2 (positive sides nested)
    return std::make_shared<WeightedPocset>(
        WeightedPocset::from_relations(3, {1, 1, 1}, {{0, 2}, {2, 4}}));
}

std::vector<PocsetPtr> corpus() {
    std::vector<PocsetPtr> out{cube3(), nested3()};
    for (const char* spec :
         {"line:n=5", "grid:dims=2x2", "grid:dims=2x3,weights=1/2;3", "tree:q=3,d=2",
          "strip:n=4,w=2", "strip:n=6,w=2", "tos:tree:3:2", "product:line:2|line:2",
          "product:tree:3:2|line:3", "subdiv:grid:dims=2x2", "quadrant:n=3"}) {
        auto X = parse_space(spec);
        out.push_back(X->at(X->default_depth).P);
    }
    return out;
}

MedianRealization realize_base(PocsetPtr P) {
    Ultrafilter seed(P->wall_count());
    for (uint32_t w = 0; w < P->wall_count(); ++w) seed.side.set(w);
    return realize(P, seed);
}

}  // namespace

TEST_CASE("validate: smallest pocset is valid") {
    auto P = WeightedPocset::from_relations(1, {1}, {});
    CHECK(P.validate().empty());
}

TEST_CASE("validate: degenerate wall reported") {
    auto P = WeightedPocset::from_relations(1, {1}, {{0, 1}});
    auto bad = P.validate();
    REQUIRE(!bad.empty());
    bool mentioned = false;
    for (const auto& m : bad) mentioned = mentioned || m.find("degenerate") != std::string::npos;
    CHECK(mentioned);
}

TEST_CASE("validate: 3-cube valid, nonpositive weight reported") {
    CHECK(cube3()->validate().empty());
    auto P = WeightedPocset::from_relations(1, {0}, {});
    CHECK(!P.validate().empty());
}

TEST_CASE("realize: transverse walls give the cube") {
    auto R = realize_base(cube3());
    CHECK(R.vertices.size() == 8);
    CHECK(R.edges.size() == 12);
}

TEST_CASE("realize: nested walls give a path") {
    auto R = realize_base(nested3());
    CHECK(R.vertices.size() == 4);
    CHECK(R.edges.size() == 3);
}

TEST_CASE("realize: two transverse walls give a square") {
    auto P = std::make_shared<WeightedPocset>(WeightedPocset::from_relations(2, {1, 1}, {}));
    auto R = realize_base(P);
    CHECK(R.vertices.size() == 4);
    CHECK(R.edges.size() == 4);
}

TEST_CASE("realize rejects a bad seed") {
    auto P = nested3();
    Ultrafilter seed(3);
    seed.side.set(1);  // inner positive side but middle complement: inconsistent
    CHECK(!is_ultrafilter(*P, seed));
    CHECK_THROWS(realize(P, seed));
}

TEST_CASE("median absorbs equal arguments") {
    auto R = realize_base(cube3());
    for (uint32_t a = 0; a < 8; ++a)
        for (uint32_t b = 0; b < 8; ++b)
            CHECK(median(R.P(), R.vertices[a], R.vertices[a], R.vertices[b]) ==
                  R.vertices[a]);
}

TEST_CASE("median of tripod leaves is the center") {
    auto X = parse_space("tree:q=3,d=1");
    auto R = realize_base(X->at(1).P);
    REQUIRE(R.vertices.size() == 4);
    // center = all walls on root side = the seed (index 0)
    std::vector<uint32_t> leaves;
    for (uint32_t v = 1; v < 4; ++v) leaves.push_back(v);
    auto m = median(R.P(), R.vertices[leaves[0]], R.vertices[leaves[1]],
                    R.vertices[leaves[2]]);
    CHECK(m == R.vertices[0]);
}

TEST_CASE("median matches betweenness on grid corners") {
    auto X = parse_space("grid:dims=2x2");
    auto R = realize_base(X->at(1).P);
    REQUIRE(R.vertices.size() == 9);
    // corners (0,0), (2,0), (0,2): medians by majority and by betweenness agree
    for (uint32_t a = 0; a < 9; ++a)
        for (uint32_t b = 0; b < 9; ++b)
            for (uint32_t c = 0; c < 9; ++c) {
                auto m = median(R.P(), R.vertices[a], R.vertices[b], R.vertices[c]);
                auto idx = R.find(m);
                REQUIRE(idx.has_value());
                auto om = oracle::betweenness_median(R, a, b, c);
                REQUIRE(om.has_value());
                CHECK(*idx == *om);
            }
}

TEST_CASE("median equals betweenness median on the whole corpus") {
    for (auto& P : corpus()) {
        auto R = realize_base(P);
        REQUIRE(R.vertices.size() <= 200);
        uint32_t n = uint32_t(R.vertices.size());
        for (uint32_t a = 0; a < n; ++a)
            for (uint32_t b = a; b < n; ++b)
                for (uint32_t c = b; c < n; ++c) {
                    auto m = median(R.P(), R.vertices[a], R.vertices[b], R.vertices[c]);
                    auto idx = R.find(m);
                    REQUIRE(idx.has_value());
                    auto om = oracle::betweenness_median(R, a, b, c);
                    REQUIRE(om.has_value());
                    CHECK(*idx == *om);
                }
    }
}

TEST_CASE("distance: exact values") {
    auto R = realize_base(cube3());
    Ultrafilter zero(3);  // all positive sides
    auto far = R.find(zero);
    REQUIRE(far.has_value());
    CHECK(distance(R.P(), R.vertices[0], R.vertices[*far]) == Rat(3));
    CHECK(distance(R.P(), R.vertices[0], R.vertices[0]) == Rat(0));
}

TEST_CASE("distance: weighted grid cell diagonal is 7/2") {
    auto X = parse_space("grid:dims=2x3,weights=1/2;3");
    auto R = realize_base(X->at(1).P);
    // one cell: step one wall on each axis from the basepoint corner
    Ultrafilter a = R.vertices[0];
    Ultrafilter b = a;
    b.side.clear(0);  // first wall of axis 0 (weight 1/2)
    b.side.clear(2);  // first wall of axis 1 (weight 3)
    REQUIRE(R.find(b).has_value());
    CHECK(distance(R.P(), a, b) == Rat(7, 2));
}

TEST_CASE("distance is a metric on a sample complex") {
    auto X = parse_space("strip:n=4,w=2");
    auto R = realize_base(X->at(4).P);
    uint32_t n = uint32_t(R.vertices.size());
    for (uint32_t a = 0; a < n; ++a)
        for (uint32_t b = 0; b < n; ++b) {
            Rat dab = distance(R.P(), R.vertices[a], R.vertices[b]);
            CHECK((dab == 0) == (a == b));
            CHECK(dab == distance(R.P(), R.vertices[b], R.vertices[a]));
            for (uint32_t c = 0; c < n; ++c)
                CHECK(dab <= distance(R.P(), R.vertices[a], R.vertices[c]) +
                                 distance(R.P(), R.vertices[c], R.vertices[b]));
        }
}

TEST_CASE("interval examples") {
    auto R = realize_base(cube3());
    CHECK(interval(R, 0, 0) == std::vector<uint32_t>{0});
    Ultrafilter zero(3);
    auto far = R.find(zero);
    REQUIRE(far.has_value());
    CHECK(interval(R, 0, *far).size() == 8);
}

TEST_CASE("halfspace interval of adjacent vertices is the crossing wall") {
    auto X = parse_space("grid:dims=2x2");
    auto R = realize_base(X->at(1).P);
    auto [u, v] = R.edges[0];
    auto hs = halfspace_interval(R, {u}, {v});
    REQUIRE(hs.size() == 1);
    CHECK(R.vertices[v].contains(hs[0]));
    CHECK(R.vertices[u].contains(mate(hs[0])));
}

TEST_CASE("rank examples") {
    auto T = parse_space("tree:q=3,d=3");
    CHECK(rank(*T->at(3).P) == 1);
    auto TT = parse_space("product:tree:3:2|tree:3:2");
    CHECK(rank(*TT->at(2).P) == 2);
    auto TTT = parse_space("product:tree:3:2|tree:3:2|tree:3:2");
    CHECK(rank(*TTT->at(2).P) == 3);
    auto S = parse_space("strip:n=8,w=2");
    CHECK(rank(*S->at(8).P) == 2);
}

TEST_CASE("chain decomposition: trivial and path cases") {
    auto X = parse_space("line:n=4");
    auto R = realize_base(X->at(4).P);
    CHECK(chain_decomposition(R.P(), R.vertices[0], R.vertices[0]).empty());
    // endpoints of the path: one chain
    Ultrafilter end(4);
    auto e = R.find(end);
    REQUIRE(e.has_value());
    auto ch = chain_decomposition(R.P(), R.vertices[*e], R.vertices[0]);
    CHECK(ch.size() == 1);
    CHECK(ch[0].size() == 4);
}

TEST_CASE("chain decomposition: 2x3 grid corners give 2 chains") {
    auto X = parse_space("grid:dims=2x3");
    auto R = realize_base(X->at(1).P);
    Ultrafilter far(5);
    auto f = R.find(far);
    REQUIRE(f.has_value());
    auto ch = chain_decomposition(R.P(), R.vertices[*f], R.vertices[0]);
    CHECK(ch.size() == 2);
    size_t total = 0;
    for (auto& c : ch) {
        CHECK(oracle::is_chain(R.P(), c));
        total += c.size();
    }
    CHECK(total == 5);
}

TEST_CASE("chain count is bounded by rank on all corpus vertex pairs") {
    for (auto& P : corpus()) {
        auto R = realize_base(P);
        uint32_t r = rank(*P);
        uint32_t n = uint32_t(R.vertices.size());
        for (uint32_t a = 0; a < n; ++a)
            for (uint32_t b = 0; b < n; ++b) {
                auto ch = chain_decomposition(R.P(), R.vertices[a], R.vertices[b]);
                CHECK(ch.size() <= r);
                size_t total = 0;
                for (auto& c : ch) {
                    CHECK(oracle::is_chain(R.P(), c));
                    // listed from the largest halfspace down
                    for (size_t i = 0; i + 1 < c.size(); ++i) CHECK(R.P().lt(c[i + 1], c[i]));
                    total += c.size();
                }
                CHECK(total == diff_walls(R.vertices[a], R.vertices[b]).size());
            }
    }
}

TEST_CASE("inseparable closure: basics") {
    auto P = nested3();
    CHECK(inseparable_closure(*P, {0}) == std::vector<HalfId>{0});
    // h0 <= h1 <= h2: closure of outer pair contains the middle
    auto cl = inseparable_closure(*P, {0, 4});
    CHECK(cl == std::vector<HalfId>({0, 2, 4}));
    CHECK(is_inseparable(*P, cl));
}

TEST_CASE("inseparable closure: strip verticals") {
    auto X = parse_space("strip:n=8,w=2");
    const auto& P = *X->at(8).P;
    // walls: 2c = V_c, 2c+1 = H_c; positive side id 2*wall
    HalfId v0 = 2 * (2 * 0), v4 = 2 * (2 * 4);
    auto cl = inseparable_closure(P, {v4, v0});
    // between V_4+ and V_0+: V_0..V_4 and those H_c with V_4+ <= H_c+ <= V_0+
    std::vector<HalfId> expect;
    for (int c = 0; c <= 4; ++c) expect.push_back(2 * (2 * c));
    for (int c = 2; c <= 4; ++c) expect.push_back(2 * (2 * c + 1));
    std::sort(expect.begin(), expect.end());
    CHECK(cl == expect);
    SUBCASE("idempotent and monotone") {
        CHECK(inseparable_closure(P, cl) == cl);
        auto smaller = inseparable_closure(P, {v4, 2 * (2 * 1)});
        for (HalfId h : smaller) CHECK(std::count(cl.begin(), cl.end(), h) == 1);
    }
}

TEST_CASE("ultrafilter median stays an ultrafilter on every corpus triple") {
    for (auto& P : corpus()) {
        auto R = realize_base(P);
        uint32_t n = uint32_t(R.vertices.size());
        uint32_t step = std::max<uint32_t>(1, n / 12);
        for (uint32_t a = 0; a < n; a += step)
            for (uint32_t b = 0; b < n; b += step)
                for (uint32_t c = 0; c < n; c += step) {
                    auto m = median(R.P(), R.vertices[a], R.vertices[b], R.vertices[c]);
                    CHECK(is_ultrafilter(R.P(), m));
                }
    }
}
