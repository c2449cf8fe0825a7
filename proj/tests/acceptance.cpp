// Acceptance gate: one pass/fail line per criterion; exit code is the number
// of failed criteria.
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mspace/cli.hpp"
#include "mspace/convexity.hpp"
#include "mspace/haagerup.hpp"
#include "mspace/ubs.hpp"
#include "oracles.hpp"

using namespace msp;

namespace {

int g_failures = 0;
int g_only = 0;  // 0: run everything; otherwise a single criterion

void criterion(int num, const std::string& what, const std::function<void()>& body) {
    if (g_only != 0 && g_only != num) return;
    try {
        body();
        std::cout << "PASS criterion " << num << ": " << what << "\n";
    } catch (const std::exception& e) {
        ++g_failures;
        std::cout << "FAIL criterion " << num << ": " << what << " -- " << e.what()
                  << "\n";
    }
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error(msg);
}

const std::vector<std::string> kCorpus = {
    "line:n=6",
    "line:n=6,weights=1/2;3",
    "grid:dims=2x3",
    "tree:q=3,d=3",
    "strip:n=6,w=2",
    "strip:n=6,w=2,weights=2/3;5",
    "tos:line:3",
    "product:line:3|line:3",
    "subdiv:line:4",
};

std::vector<int> depths_for(const ComplexPtr& X) {
    if (X->finite) return {X->min_depth};
    // trees (and spaces built from them) grow exponentially in depth; stop
    // raising the depth once a slice passes a few thousand walls
    std::vector<int> ds;
    for (int d : {4, 8, 16, 64}) {
        if (d < X->min_depth) continue;
        if (X->at(d).P->wall_count() > 4000) break;
        ds.push_back(d);
    }
    return ds;
}

HVec vertex_indicator_diff(PocsetPtr P, const Ultrafilter& x, const Ultrafilter& y) {
    HVec d(std::move(P));
    for (uint32_t w : diff_walls(x, y)) {
        d.add(x.at(w), 1);
        d.add(y.at(w), -1);
    }
    return d;
}

void crit1_norm_identity() {
    int cases = 0;
    for (const auto& spec : kCorpus) {
        auto X = parse_space(spec);
        for (int depth : depths_for(X)) {
            const Ultrafilter& x = X->at(depth).base;
            for (const Aut& g : select_gens(X, "all")) {
                auto gx = g.vfwd(depth, x);
                if (!gx) continue;
                HVec b = haagerup_cocycle(X, g, depth, x);
                Rat d = distance(*X->at(depth).P, x, *gx);
                require(b.norm2() == 2 * d,
                        spec + " gen " + g.name() + " at depth " +
                            std::to_string(depth));
                ++cases;
            }
        }
    }
    require(cases >= 20, "too few norm-identity cases: " + std::to_string(cases));
}

void crit2_cocycle_law() {
    int cases = 0;
    for (const auto& spec :
         {"line:n=8", "strip:n=6,w=2", "grid:dims=3x3", "tree:q=3,d=3",
          "product:line:3|line:3"}) {
        auto X = parse_space(spec);
        int depth = X->finite ? X->min_depth : std::max(X->min_depth, 6);
        auto P = X->at(depth).P;
        std::vector<Aut> auts;
        for (const Aut& g : select_gens(X, "all")) {
            auts.push_back(g);
            auts.push_back(g.inverse());
        }
        auto R = realize(P, X->at(depth).base, 100000);
        size_t stride = std::max<size_t>(1, R.vertices.size() / 5);
        for (size_t xi = 0; xi < R.vertices.size(); xi += stride)
            for (size_t yi = 0; yi < R.vertices.size(); yi += stride)
                for (const Aut& g : auts)
                    for (const Aut& h : auts) {
                        const Ultrafilter& x = R.vertices[xi];
                        const Ultrafilter& y = R.vertices[yi];
                        auto hx = h.vfwd(depth, x);
                        if (!hx || !g.vfwd(depth, *hx) || !g.vfwd(depth, y))
                            continue;
                        try {
                            HVec lhs = haagerup_cocycle(X, g.then_after(h), depth, x);
                            HVec rhs =
                                act(g, depth, haagerup_cocycle(X, h, depth, x)) +
                                haagerup_cocycle(X, g, depth, x);
                            require((lhs - rhs).is_zero(),
                                    std::string(spec) + " cocycle law");
                            HVec diff = vertex_indicator_diff(P, x, y);
                            HVec co_lhs = haagerup_cocycle(X, g, depth, x) -
                                          haagerup_cocycle(X, g, depth, y);
                            HVec co_rhs = act(g, depth, diff) - diff;
                            require((co_lhs - co_rhs).is_zero(),
                                    std::string(spec) + " basepoint coboundary");
                            ++cases;
                        } catch (const std::runtime_error&) {
                            continue;  // clipped by the truncation
                        }
                        if (cases > 2000) return;
                    }
    }
    require(cases >= 100, "too few cases: " + std::to_string(cases));
}

void crit3_median_oracle() {
    for (const auto& spec : kCorpus) {
        auto X = parse_space(spec);
        int depth = X->finite ? X->min_depth : std::max(X->min_depth, 5);
        auto P = X->at(depth).P;
        auto R = realize(P, X->at(depth).base, 100000);
        if (R.vertices.size() > 200) continue;
        size_t n = R.vertices.size();
        size_t stride = std::max<size_t>(1, n / 9);
        for (size_t a = 0; a < n; a += stride)
            for (size_t b = a; b < n; b += stride)
                for (size_t c = b; c < n; c += stride) {
                    Ultrafilter m = median(*P, R.vertices[a], R.vertices[b],
                                           R.vertices[c]);
                    auto om = oracle::betweenness_median(R, uint32_t(a), uint32_t(b),
                                                         uint32_t(c));
                    require(om && R.vertices[*om] == m,
                            spec + ": majority median disagrees with betweenness");
                }
    }
}

void crit4_dilworth() {
    for (const auto& spec : kCorpus) {
        auto X = parse_space(spec);
        int depth = X->finite ? X->min_depth : std::max(X->min_depth, 5);
        auto P = X->at(depth).P;
        auto R = realize(P, X->at(depth).base, 100000);
        uint32_t rk = P->wall_count() <= 64 ? rank(*P) : X->declared_rank();
        for (size_t a = 0; a < R.vertices.size(); ++a)
            for (size_t b = 0; b < R.vertices.size(); ++b) {
                auto ch = chain_decomposition(*P, R.vertices[a], R.vertices[b]);
                require(ch.size() <= rk, spec + ": chain count exceeds rank");
                for (const auto& c : ch)
                    require(oracle::is_chain(*P, c), spec + ": not a chain");
            }
    }
}

void crit5_bridge() {
    for (const auto& spec : {"grid:dims=3x3", "tree:q=3,d=3", "strip:n=6,w=2",
                             "product:line:3|line:3"}) {
        auto X = parse_space(spec);
        int depth = X->finite ? X->min_depth : std::max(X->min_depth, 6);
        auto R = realize(X->at(depth).P, X->at(depth).base, 100000);
        std::mt19937_64 rng(12345);
        for (int t = 0; t < 50; ++t) {
            auto pick = [&] {
                std::vector<uint32_t> pts;
                size_t k = 1 + rng() % 3;
                for (size_t i = 0; i < k; ++i)
                    pts.push_back(uint32_t(rng() % R.vertices.size()));
                return convex_hull(R, pts);
            };
            ConvexSet C1 = pick(), C2 = pick();
            // shores_and_bridge verifies the wall decomposition and the
            // product isometry internally and throws on any mismatch
            shores_and_bridge(C1, C2);
        }
    }
}

void crit6_ubs_structure() {
    auto Q = parse_space("quadrant:n=8");
    auto GQ = minimal_decomposition(sigma_difference(Q, "corner", 6));
    require(GQ.classes.size() == 2 && GQ.edges.empty(),
            "quadrant class graph is not 2 vertices / 0 edges");
    for (int n : {8, 16, 32}) {
        auto S = parse_space("strip:n=" + std::to_string(n) + ",w=2");
        UBS O = sigma_difference(S, "diag", n);
        auto G = minimal_decomposition(O);
        require(G.classes.size() == 1, "strip class count != 1 at n=" +
                                           std::to_string(n));
        auto sr = is_strongly_reduced(O);
        require(sr.strongly_reduced && sr.chains.size() == 2,
                "strip not certified by a 2-chain decomposition at n=" +
                    std::to_string(n));
    }
}

void crit7_omega_c_bound() {
    for (const char* sp : {"line:n=8", "strip:n=8,w=2", "quadrant:n=8"}) {
        auto X = parse_space(sp);
        UBS O = sigma_difference(X, X->boundary.back().name, 8);
        for (int c : {1, 2, 4, 8}) {
            auto rep = check_omega_c_bound(O, c);
            require(rep.within_bound, std::string(sp) + " at c=" +
                                          std::to_string(c) + ": measure " +
                                          rat_str(rep.measure) + " > bound " +
                                          rat_str(rep.bound));
        }
    }
}

void crit8_convergence() {
    auto S = parse_space("strip:n=8,w=2");
    auto rep = ubs_convergence_experiment(Aut::of(S, "dshift"), "diag",
                                          {4, 16, 64}, {256});
    require(rep.rows.size() == 3, "wrong row count");
    require(rep.rows[0].residual2 > rep.rows[1].residual2 &&
                rep.rows[1].residual2 > rep.rows[2].residual2,
            "residuals not strictly decreasing");
    require(rep.beta >= 0.4 && rep.beta <= 0.6,
            "fitted exponent " + std::to_string(rep.beta) + " outside [0.4, 0.6]");
}

void crit9_witness() {
    auto L = parse_space("line:n=8");
    auto wl = elementarity_witness(L, {Aut::of(L, "shift")}, "end", Rat(1, 100));
    require(wl.success, "line witness did not reach the tolerance");
    require(wl.best_residual2 < Rat(1, 10000), "line residual too large");

    auto S = parse_space("strip:n=8,w=2");
    auto ws = elementarity_witness(S, {Aut::of(S, "dshift")}, "diag", Rat(1, 100));
    require(ws.success, "strip witness did not reach the tolerance");
    require(ws.best_residual2 < Rat(1, 10000), "strip residual too large");

    auto G = parse_space("grid:dims=2x2");
    auto wg = elementarity_witness(G, {Aut::of(G, "rot180")}, "", Rat(1, 100));
    require(wg.success && wg.bounded_orbit && wg.best_residual2 == 0,
            "bounded-orbit witness residual not exactly 0");
}

void crit10_character() {
    auto L = parse_space("line:n=8");
    auto S = parse_space("strip:n=8,w=2");
    UBS ol = sigma_difference(L, "end", 24);
    UBS os = sigma_difference(S, "diag", 24);
    Aut ls = Aut::of(L, "shift"), ss = Aut::of(S, "dshift");
    require(transfer_character(ls, ol) == 1, "line shift character != 1");
    require(transfer_character(ss, os) == 2, "strip shift character != 2");

    // additivity over words of length <= 6 in a generator and its inverse
    for (auto [X, g, O] : {std::tuple{L, ls, ol}, std::tuple{S, ss, os}}) {
        std::vector<Aut> words = {Aut::identity(X)};
        Rat chi_g = transfer_character(g, O);
        for (int a = -3; a <= 3; ++a) {
            Aut w = Aut::identity(X);
            for (int i = 0; i < std::abs(a); ++i)
                w = (a > 0 ? g : g.inverse()).then_after(w);
            require(transfer_character(w, O) == a * chi_g,
                    "character not additive on power " + std::to_string(a));
            for (int b = -3; b <= 3; ++b) {
                if (std::abs(a) + std::abs(b) > 6) continue;
                Aut w2 = w;
                for (int i = 0; i < std::abs(b); ++i)
                    w2 = (b > 0 ? g : g.inverse()).then_after(w2);
                require(transfer_character(w2, O) ==
                            transfer_character(w, O) + b * chi_g,
                        "character not additive on composition");
            }
        }
    }
}

void crit11_determinism() {
    auto run = [](std::vector<std::string> args) {
        std::ostringstream o, e;
        int code = run_cli(args, o, e);
        require(code == 0, "selftest exit code " + std::to_string(code));
        return o.str();
    };
    std::string a = run({"selftest"});
    std::string b = run({"selftest"});
    std::string c = run({"selftest", "--threads", "4"});
    std::string d = run({"selftest", "--threads", "2"});
    require(a == b, "two sequential runs differ");
    require(a == c && a == d, "parallel runs differ from sequential");
    require(a.find("FAIL") == std::string::npos, "selftest reported failures");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_only = std::atoi(argv[1]);
    criterion(1, "Haagerup norm identity, exact at depths <= 64 incl. weights",
              crit1_norm_identity);
    criterion(2, "cocycle law and basepoint coboundary on >= 100 cases",
              crit2_cocycle_law);
    criterion(3, "majority median equals betweenness median (<= 200 vertices)",
              crit3_median_oracle);
    criterion(4, "chain decompositions never exceed the rank", crit4_dilworth);
    criterion(5, "bridge decomposition and product witness on 50 pairs per space",
              crit5_bridge);
    criterion(6, "class graphs: quadrant 2/0, strip single class with 2 chains",
              crit6_ubs_structure);
    criterion(7, "shallow-part measure bounded by rank * c", crit7_omega_c_bound);
    criterion(8, "strip residuals decrease with exponent ~ 1/2", crit8_convergence);
    criterion(9, "elementarity witnesses reach the tolerance", crit9_witness);
    criterion(10, "transfer character values and additivity", crit10_character);
    criterion(11, "selftest byte-identical across runs and thread counts",
              crit11_determinism);
    if (g_failures == 0)
        std::cout << "all 11 criteria passed\n";
    else
        std::cout << g_failures << " criteria failed\n";
    return g_failures;
}
