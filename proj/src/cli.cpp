#include "mspace/cli.hpp"

#include <algorithm>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "mspace/convexity.hpp"
#include "mspace/haagerup.hpp"
#include "mspace/json_io.hpp"
#include "mspace/ubs.hpp"

namespace msp {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string space;
    std::string gens = "all";
    std::string xi;
    std::string format = "text";
    std::string emit = "graph";
    std::string c_schedule;
    std::string epsilon = "1/100";
    int depth = 0;  // 0: use the space default
    uint64_t seed = 1;
    uint64_t budget_vertices = 100000;
    uint32_t budget_words = 8;
    uint32_t n = 3;
    uint32_t h = 0, k = 0;
    int threads = 1;
};

int resolve_depth(const ComplexPtr& X, int depth) {
    if (depth == 0) return X->finite ? X->min_depth : X->default_depth;
    if (depth < X->min_depth)
        throw UsageError("depth " + std::to_string(depth) + " below the minimum " +
                         std::to_string(X->min_depth));
    return depth;
}

MedianRealization realize_checked(PocsetPtr P, const Ultrafilter& seed,
                                  uint64_t cap) {
    try {
        return realize(std::move(P), seed, cap);
    } catch (const std::runtime_error& e) {
        throw BudgetError(std::string(e.what()) + " (--budget-vertices " +
                          std::to_string(cap) + ")");
    }
}

// every JSON report must survive its own parser unchanged
void emit_json(std::ostream& out, const Json& j) {
    std::string text = j.dump(2);
    if (Json::parse(text) != j)
        throw std::runtime_error("JSON round-trip failed");
    out << text << "\n";
}

Rat dist_to_half(const WeightedPocset& P, const Ultrafilter& x, HalfId h) {
    Rat s = 0;
    for (HalfId j = 0; j < P.half_count(); ++j)
        if (j != h && P.lt(h, j) && !x.contains(j)) s += P.weight_of(j);
    return s;
}

// build ---------------------------------------------------------------------

void cmd_build(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    int depth = resolve_depth(X, cfg.depth);
    auto P = X->at(depth).P;
    Json j = pocset_to_json(*P);
    if (P->wall_count() <= 512) {
        // reconstruct through the parser and compare canonical forms
        WeightedPocset back = pocset_from_json(j);
        if (pocset_to_json(back) != j)
            throw std::runtime_error("pocset JSON round-trip disagrees");
    }
    emit_json(out, j);
}

// analyze -------------------------------------------------------------------

void cmd_analyze(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    int depth = resolve_depth(X, cfg.depth);
    auto P = X->at(depth).P;
    auto R = realize_checked(P, X->at(depth).base, cfg.budget_vertices);

    Json j;
    j["space"] = X->spec;
    j["depth"] = depth;
    j["walls"] = P->wall_count();
    j["rank"] = P->wall_count() <= 64 ? rank(*P) : X->declared_rank();
    j["vertices"] = R.vertices.size();
    j["edges"] = R.edges.size();

    Json facing = Json::array();
    for (uint32_t n = 2; n <= 4; ++n) {
        Json f;
        f["n"] = n;
        auto t = find_facing_tuple(*P, n);
        f["found"] = bool(t);
        if (t) f["tuple"] = *t;
        facing.push_back(std::move(f));
    }
    j["facing_tuples"] = std::move(facing);

    if (P->half_count() <= 256) {
        uint64_t count = 0;
        Json sample = Json::array();
        for (HalfId a = 0; a < P->half_count(); ++a)
            for (HalfId b = HalfId(a + 1); b < P->half_count(); ++b)
                if (wall_of(a) != wall_of(b) && is_strongly_separated(*P, a, b)) {
                    if (sample.size() < 10) sample.push_back(Json::array({a, b}));
                    ++count;
                }
        j["strongly_separated_pairs"] = count;
        j["strongly_separated_sample"] = std::move(sample);
    }

    if (cfg.format == "json") {
        emit_json(out, j);
    } else {
        out << "space " << j["space"].get<std::string>() << "\n"
            << "depth " << depth << "\n"
            << "walls " << j["walls"] << "\n"
            << "rank " << j["rank"] << "\n"
            << "vertices " << j["vertices"] << "\n"
            << "edges " << j["edges"] << "\n";
        for (const auto& f : j["facing_tuples"]) {
            out << "facing n=" << f["n"] << " " << (f["found"].get<bool>() ? "yes" : "no");
            if (f["found"].get<bool>()) out << " " << f["tuple"].dump();
            out << "\n";
        }
        if (j.contains("strongly_separated_pairs"))
            out << "strongly-separated pairs " << j["strongly_separated_pairs"]
                << "\n";
    }
}

// ubs -----------------------------------------------------------------------

void cmd_ubs(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    if (cfg.xi.empty()) throw UsageError("ubs requires --xi");
    int depth = resolve_depth(X, cfg.depth);
    UBS O = sigma_difference(X, cfg.xi, depth);

    if (cfg.emit == "graph") {
        UBSGraph G = minimal_decomposition(O);
        Json j;
        j["space"] = X->spec;
        j["xi"] = cfg.xi;
        j["depth"] = depth;
        Json classes = Json::array();
        for (const auto& cls : G.classes) {
            Json c;
            c["size"] = cls.members.size();
            if (cls.members.size() <= 1000) c["members"] = cls.members;
            Json chains = Json::array();
            for (const auto& ch : cls.chains) chains.push_back(ch);
            c["chains"] = std::move(chains);
            classes.push_back(std::move(c));
        }
        j["classes"] = std::move(classes);
        Json edges = Json::array();
        for (auto [a, b] : G.edges) edges.push_back(Json::array({a, b}));
        j["edges"] = std::move(edges);
        j["residual_size"] = G.residual.size();
        emit_json(out, j);
    } else if (cfg.emit == "chains") {
        auto sr = is_strongly_reduced(O);
        Json j;
        j["space"] = X->spec;
        j["xi"] = cfg.xi;
        j["depth"] = depth;
        j["strongly_reduced"] = sr.strongly_reduced;
        Json chains = Json::array();
        for (const auto& ch : sr.chains) chains.push_back(ch);
        j["chains"] = std::move(chains);
        j["offending"] = sr.offending;
        emit_json(out, j);
    } else if (cfg.emit == "alpha-table") {
        auto sr = is_strongly_reduced(O);
        auto a = alpha_all(O);
        out << "halfspace,dist,alpha,chain\n";
        for (size_t i = 0; i < O.omega.size(); ++i) {
            HalfId h = O.omega[i];
            uint32_t chain = 0;
            for (size_t ci = 0; ci < sr.chains.size(); ++ci)
                if (std::find(sr.chains[ci].begin(), sr.chains[ci].end(), h) !=
                    sr.chains[ci].end())
                    chain = uint32_t(ci);
            out << h << "," << rat_str(dist_to_half(O.P(), O.x, h)) << ","
                << rat_str(a[i]) << "," << chain << "\n";
        }
    } else {
        throw UsageError("unknown --emit '" + cfg.emit + "'");
    }
}

// cocycle -------------------------------------------------------------------

void cmd_cocycle(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    int depth = resolve_depth(X, cfg.depth);
    auto P = X->at(depth).P;
    const Ultrafilter& x = X->at(depth).base;
    auto gens = select_gens(X, cfg.gens);
    if (gens.empty()) throw UsageError("no generators selected");

    struct Row {
        std::string gen;
        Rat dist, norm2;
        bool ok;
    };
    std::vector<Row> rows;
    for (const auto& g : gens) {
        auto gx = g.vfwd(depth, x);
        if (!gx)
            throw std::runtime_error("generator " + g.name() +
                                     " undefined at the basepoint");
        HVec b = haagerup_cocycle(X, g, depth, x);
        Row r;
        r.gen = g.name();
        r.dist = distance(*P, x, *gx);
        r.norm2 = b.norm2();
        r.ok = r.norm2 == 2 * r.dist;
        rows.push_back(std::move(r));
    }
    uint64_t law_checked = 0;
    bool law_ok = true;
    for (const auto& g : gens)
        for (const auto& h : gens) {
            auto hx = h.vfwd(depth, x);
            if (!hx || !g.vfwd(depth, *hx)) continue;
            try {
                HVec lhs = haagerup_cocycle(X, g.then_after(h), depth, x);
                HVec rhs = act(g, depth, haagerup_cocycle(X, h, depth, x)) +
                           haagerup_cocycle(X, g, depth, x);
                if (!(lhs - rhs).is_zero()) law_ok = false;
                ++law_checked;
            } catch (const std::runtime_error&) {
                continue;  // clipped by the truncation
            }
        }

    if (cfg.format == "json") {
        Json j;
        j["space"] = X->spec;
        j["depth"] = depth;
        Json jr = Json::array();
        for (const auto& r : rows) {
            Json e;
            e["gen"] = r.gen;
            e["distance"] = rat_str(r.dist);
            e["norm2"] = rat_str(r.norm2);
            e["norm2_float"] = rat_double(r.norm2);
            e["identity_ok"] = r.ok;
            jr.push_back(std::move(e));
        }
        j["rows"] = std::move(jr);
        j["law_checked"] = law_checked;
        j["law_ok"] = law_ok;
        emit_json(out, j);
    } else {
        out << "gen,distance,norm2,norm2_float,identity_ok\n";
        for (const auto& r : rows)
            out << r.gen << "," << rat_str(r.dist) << "," << rat_str(r.norm2) << ","
                << rat_double(r.norm2) << "," << (r.ok ? 1 : 0) << "\n";
        out << "# cocycle law: " << (law_ok ? "ok" : "FAIL") << " on " << law_checked
            << " pairs\n";
    }
    for (const auto& r : rows)
        if (!r.ok)
            throw std::runtime_error("norm identity failed for generator " + r.gen);
    if (!law_ok) throw std::runtime_error("cocycle law failed");
}

// witness -------------------------------------------------------------------

int schedule_exponent(const std::string& schedule) {
    if (schedule.empty()) return 9;
    int best = 0;
    std::stringstream ss(schedule);
    std::string item;
    while (std::getline(ss, item, ',')) {
        uint64_t v = std::stoull(item);
        int k = 0;
        uint64_t c = 1;
        while (c < v) {
            c *= 4;
            ++k;
        }
        if (c != v) throw UsageError("--c-schedule entries must be powers of 4");
        best = std::max(best, k);
    }
    if (best == 0) throw UsageError("--c-schedule must contain a value > 1");
    return best;
}

void cmd_witness(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    auto gens = select_gens(X, cfg.gens);
    if (gens.empty()) throw UsageError("no generators selected");
    Rat eps = parse_rat(cfg.epsilon);
    int max_exp = schedule_exponent(cfg.c_schedule);

    WitnessReport rep = elementarity_witness(X, gens, cfg.xi, eps, max_exp);

    Json j;
    j["space"] = X->spec;
    j["epsilon"] = rat_str(eps);
    j["mode"] = rep.bounded_orbit ? "bounded-orbit" : "recipe";
    j["success"] = rep.success;
    j["c"] = rat_str(rep.c);
    j["depth"] = rep.depth;
    j["best_residual2"] = rat_str(rep.best_residual2);
    j["best_residual_float"] = rep.best_residual;
    Json psi;
    psi["support_size"] = rep.psi.coef.size();
    Json entries = Json::array();
    size_t cap = 4096;
    for (const auto& [h, v] : rep.psi.coef) {
        if (entries.size() >= cap) break;
        entries.push_back(Json::array({h, rat_str(v)}));
    }
    psi["entries"] = std::move(entries);
    psi["truncated"] = rep.psi.coef.size() > cap;
    j["psi"] = std::move(psi);

    if (cfg.format == "json") {
        Json rows = Json::array();
        for (const auto& r : rep.rows) {
            Json e;
            e["gen"] = r.gen;
            e["c"] = rat_str(r.c);
            e["depth"] = r.depth;
            e["residual2"] = rat_str(r.residual2);
            e["residual_float"] = r.residual;
            rows.push_back(std::move(e));
        }
        j["rows"] = std::move(rows);
        emit_json(out, j);
    } else {
        out << "gen,c,depth,residual2_exact,residual_float\n";
        for (const auto& r : rep.rows)
            out << r.gen << "," << rat_str(r.c) << "," << r.depth << ","
                << rat_str(r.residual2) << "," << r.residual << "\n";
        out << "# " << (rep.success ? "success" : "budget exhausted") << " at c="
            << rat_str(rep.c) << " depth=" << rep.depth << "\n";
    }
    if (!rep.success)
        throw BudgetError("witness budget exhausted (best residual " +
                          std::to_string(rep.best_residual) + ")");
}

// bridge --------------------------------------------------------------------

void cmd_bridge(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    int depth = resolve_depth(X, cfg.depth);
    auto R = realize_checked(X->at(depth).P, X->at(depth).base, cfg.budget_vertices);

    std::mt19937_64 rng(cfg.seed);
    auto random_hull = [&] {
        std::vector<uint32_t> pts;
        size_t n = 1 + rng() % 3;
        for (size_t i = 0; i < n; ++i)
            pts.push_back(uint32_t(rng() % R.vertices.size()));
        return convex_hull(R, pts);
    };
    ConvexSet C1 = random_hull(), C2 = random_hull();
    BridgeResult B = shores_and_bridge(C1, C2);

    Json j;
    j["space"] = X->spec;
    j["depth"] = depth;
    j["seed"] = cfg.seed;
    j["c1"] = C1.verts;
    j["c2"] = C2.verts;
    j["shore1"] = B.S1.verts;
    j["shore2"] = B.S2.verts;
    j["bridge"] = B.B.verts;
    j["gates"] = Json::array({B.x1, B.x2});
    j["interval"] = B.interval_factor;
    Json w = Json::array();
    for (size_t i = 0; i < B.witness.size(); ++i)
        w.push_back(Json::array(
            {B.B.verts[i], B.witness[i].first, B.witness[i].second}));
    j["witness"] = std::move(w);
    emit_json(out, j);
}

// facing / skewer -----------------------------------------------------------

void cmd_facing(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    int depth = resolve_depth(X, cfg.depth);
    auto t = find_facing_tuple(*X->at(depth).P, cfg.n);
    Json j;
    j["space"] = X->spec;
    j["depth"] = depth;
    j["n"] = cfg.n;
    j["found"] = bool(t);
    if (t) j["tuple"] = *t;
    emit_json(out, j);
}

void cmd_skewer(const Config& cfg, std::ostream& out) {
    auto X = parse_space(cfg.space);
    int depth = resolve_depth(X, cfg.depth);
    auto gens = select_gens(X, cfg.gens);
    auto g = skewering_search(X, gens, depth, cfg.h, cfg.k, cfg.budget_words);
    Json j;
    j["space"] = X->spec;
    j["depth"] = depth;
    j["h"] = cfg.h;
    j["k"] = cfg.k;
    j["found"] = bool(g);
    if (g) j["word"] = g->name();
    emit_json(out, j);
}

// selftest ------------------------------------------------------------------

std::string check(bool ok, const std::string& name, const std::string& detail = "") {
    if (ok) return "ok " + name + "\n";
    return "FAIL " + name + (detail.empty() ? "" : ": " + detail) + "\n";
}

std::string selftest_space(const std::string& spec) {
    std::ostringstream o;
    auto X = parse_space(spec);
    int depth = X->finite ? X->min_depth : std::max(X->min_depth, 5);
    auto P = X->at(depth).P;
    if (P->has_dense()) o << check(P->validate().empty(), spec + " validate");
    auto R = realize(P, X->at(depth).base, 100000);
    o << check(!R.vertices.empty(), spec + " realize");

    uint32_t rk = P->wall_count() <= 64 ? rank(*P) : X->declared_rank();
    bool dil = true;
    size_t stride = std::max<size_t>(1, R.vertices.size() / 8);
    for (size_t i = 0; i < R.vertices.size(); i += stride)
        for (size_t jv = 0; jv < R.vertices.size(); jv += stride) {
            auto ch = chain_decomposition(*P, R.vertices[i], R.vertices[jv]);
            if (ch.size() > rk) dil = false;
        }
    o << check(dil, spec + " dilworth");

    const Ultrafilter& x = X->at(depth).base;
    bool norms = true;
    int norm_cases = 0;
    for (const Aut& g : select_gens(X, "all")) {
        auto gx = g.vfwd(depth, x);
        if (!gx) continue;
        HVec b = haagerup_cocycle(X, g, depth, x);
        if (b.norm2() != 2 * distance(*P, x, *gx)) norms = false;
        ++norm_cases;
    }
    o << check(norms && norm_cases > 0, spec + " cocycle-norm");
    return o.str();
}

std::string selftest_ubs() {
    std::ostringstream o;
    auto Q = parse_space("quadrant:n=8");
    auto GQ = minimal_decomposition(sigma_difference(Q, "corner", 6));
    o << check(GQ.classes.size() == 2 && GQ.edges.empty(), "quadrant graph 2/0");
    auto S = parse_space("strip:n=8,w=2");
    UBS os = sigma_difference(S, "diag", 8);
    auto GS = minimal_decomposition(os);
    o << check(GS.classes.size() == 1, "strip graph single class");
    auto sr = is_strongly_reduced(os);
    o << check(sr.strongly_reduced && sr.chains.size() == 2, "strip 2-chain");

    for (const char* sp : {"line:n=8", "strip:n=8,w=2", "quadrant:n=8"}) {
        auto X = parse_space(sp);
        const std::string xi = X->boundary.front().name;
        UBS O = sigma_difference(X, xi, 8);
        bool ok = true;
        for (int c : {1, 2, 4, 8})
            if (!check_omega_c_bound(O, c).within_bound) ok = false;
        o << check(ok, std::string(sp) + " omega_c bound");
    }

    auto L = parse_space("line:n=8");
    o << check(transfer_character(Aut::of(L, "shift"),
                                  sigma_difference(L, "end", 12)) == 1,
               "character line shift");
    o << check(transfer_character(Aut::of(S, "dshift"),
                                  sigma_difference(S, "diag", 12)) == 2,
               "character strip shift");
    return o.str();
}

std::string selftest_witness() {
    std::ostringstream o;
    auto G = parse_space("grid:dims=2x2");
    auto w = elementarity_witness(G, {Aut::of(G, "rot180")}, "", Rat(1, 100));
    o << check(w.success && w.best_residual2 == 0, "bounded-orbit witness");

    auto S = parse_space("strip:n=8,w=2");
    auto conv = ubs_convergence_experiment(Aut::of(S, "dshift"), "diag", {4, 16},
                                           {128});
    o << check(conv.monotone, "strip residual decreasing");
    return o.str();
}

int cmd_selftest(const Config& cfg, std::ostream& out) {
    std::vector<std::function<std::string()>> jobs;
    for (const char* sp :
         {"line:n=6", "line:n=6,weights=1/2;3", "grid:dims=2x3", "tree:q=3,d=3",
          "strip:n=6,w=2", "tos:line:3", "subdiv:line:4", "product:line:3|line:3"})
        jobs.emplace_back([sp] { return selftest_space(sp); });
    jobs.emplace_back(selftest_ubs);
    jobs.emplace_back(selftest_witness);

    std::vector<std::string> results(jobs.size());
    if (cfg.threads > 1) {
        std::vector<std::future<std::string>> futs;
        for (auto& job : jobs)
            futs.push_back(std::async(std::launch::async, job));
        for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
    } else {
        for (size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i]();
    }

    int checks = 0, failures = 0;
    for (const auto& r : results) {
        out << r;
        for (size_t pos = 0; pos < r.size();) {
            size_t nl = r.find('\n', pos);
            if (r.compare(pos, 4, "FAIL") == 0) ++failures;
            ++checks;
            pos = (nl == std::string::npos) ? r.size() : nl + 1;
        }
    }
    out << "selftest: " << checks << " checks, " << failures << " failures\n";
    return failures == 0 ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"median-space experiment toolkit"};
    app.require_subcommand(1);
    Config cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--space", cfg.space, "space spec, e.g. strip:n=8,w=2");
        sub->add_option("--depth", cfg.depth, "truncation depth (0: default)");
        sub->add_option("--gens", cfg.gens, "generator list or 'all'");
        sub->add_option("--xi", cfg.xi, "boundary direction name");
        sub->add_option("--c-schedule", cfg.c_schedule, "comma list of c values");
        sub->add_option("--epsilon", cfg.epsilon, "tolerance as a rational");
        sub->add_option("--format", cfg.format, "json|csv|text");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--budget-vertices", cfg.budget_vertices, "vertex cap");
        sub->add_option("--budget-words", cfg.budget_words, "word-length bound");
        return sub;
    };
    auto* build = add_common(app.add_subcommand("build", "emit the pocset JSON"));
    auto* analyze = add_common(
        app.add_subcommand("analyze", "rank, counts, facing tuples, separation"));
    auto* ubs = add_common(app.add_subcommand("ubs", "boundary halfspace analysis"));
    ubs->add_option("--emit", cfg.emit, "graph|chains|alpha-table");
    auto* cocycle =
        add_common(app.add_subcommand("cocycle", "cocycle norms and identities"));
    auto* witness =
        add_common(app.add_subcommand("witness", "elementarity witness search"));
    auto* bridge =
        add_common(app.add_subcommand("bridge", "shores and bridge of a random pair"));
    auto* facing = add_common(app.add_subcommand("facing", "facing tuple search"));
    facing->add_option("--n", cfg.n, "tuple size");
    auto* skewer = add_common(app.add_subcommand("skewer", "skewering word search"));
    skewer->add_option("--inner", cfg.h, "inner halfspace id");
    skewer->add_option("--outer", cfg.k, "outer halfspace id");
    auto* selftest = app.add_subcommand("selftest", "run the invariant suite");
    selftest->add_option("--threads", cfg.threads, "parallel jobs");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 1;
    }

    try {
        for (auto* sub : {build, analyze, ubs, cocycle, witness, bridge, facing,
                          skewer})
            if (sub->parsed() && sub != selftest && cfg.space.empty() &&
                sub->get_name() != "selftest")
                throw UsageError(sub->get_name() + " requires --space");
        if (build->parsed()) cmd_build(cfg, out);
        else if (analyze->parsed()) cmd_analyze(cfg, out);
        else if (ubs->parsed()) cmd_ubs(cfg, out);
        else if (cocycle->parsed()) cmd_cocycle(cfg, out);
        else if (witness->parsed()) cmd_witness(cfg, out);
        else if (bridge->parsed()) cmd_bridge(cfg, out);
        else if (facing->parsed()) cmd_facing(cfg, out);
        else if (skewer->parsed()) cmd_skewer(cfg, out);
        else if (selftest->parsed()) return cmd_selftest(cfg, out);
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const BudgetError& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace msp
