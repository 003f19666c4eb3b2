#include "cli.hpp"

#include "dyadic/counterexample.hpp"
#include "dyadic/harness.hpp"
#include "dyadic/quasimeasure.hpp"
#include "dyadic/series.hpp"
#include "dyadic/sets.hpp"
#include "dyadic/walsh.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace dyadic {

namespace {

using nlohmann::json;

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Index parse_index(const std::string& text) {
    Index out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(part, &pos);
        if (pos != part.size()) throw std::invalid_argument("bad index literal: " + text);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty index literal");
    return out;
}

SetPtr load_set_arg(const std::string& path, const std::string& inline_json) {
    if (!inline_json.empty()) return set_from_json(json::parse(inline_json));
    if (path.empty()) throw std::invalid_argument("need --set FILE or --json TEXT");
    return load_set(path);
}

void emit(const json& j, const std::string& path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

SetPtr falsifier_set(const std::string& kind, std::size_t d) {
    if (kind == "empty") return make_empty(d);
    if (kind == "whole") return make_whole(d);
    if (kind == "diagonal") return make_diagonal(Partition::with_lower(d, {}));
    throw std::invalid_argument("unknown set kind: " + kind);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dyadic harmonic analysis toolkit: Walsh series, quasimeasures, dyadic planes."};
    app.name("dyadic");
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (sets WALSH_THREADS)");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate Walsh functions, kernels and partial sums");
    eval->require_subcommand(1);
    std::string g_text, n_text, series_path;
    uint64_t n_val = 0, N_val = 0;
    unsigned k_val = 0;
    std::string method = "closed";
    bool approx = false;
    auto* ev_walsh = eval->add_subcommand("walsh", "W_n(g)");
    ev_walsh->add_option("--n", n_val, "Walsh index")->required();
    ev_walsh->add_option("--g", g_text, "Element literal, e.g. 101|0")->required();
    auto* ev_dir = eval->add_subcommand("dirichlet", "D_N(g)");
    ev_dir->add_option("--N", N_val, "Kernel length")->required();
    ev_dir->add_option("--g", g_text, "Element literal")->required();
    ev_dir->add_option("--method", method, "closed or naive")->check(CLI::IsMember({"closed", "naive"}));
    auto* ev_rad = eval->add_subcommand("rademacher", "R_k(g)");
    ev_rad->add_option("--k", k_val, "Digit")->required();
    ev_rad->add_option("--g", g_text, "Element literal")->required();
    auto* ev_ps = eval->add_subcommand("partial-sum", "Rectangular partial sum S_N(g)");
    ev_ps->add_option("--series", series_path, "SeriesSpec JSON")->required();
    ev_ps->add_option("--N", n_text, "N, or N1,...,Nd")->required();
    ev_ps->add_option("--g", g_text, "Point literal, components separated by commas")->required();
    ev_ps->add_flag("--approx", approx, "Print a double instead of the exact rational");

    // render
    auto* render = app.add_subcommand("render", "Rasterize a set to PGM");
    std::string set_path, set_json, out_path, slice_text;
    unsigned render_k = 6;
    render->add_option("--set", set_path, "SetSpec JSON file");
    render->add_option("--json", set_json, "SetSpec JSON text");
    render->add_option("--k", render_k, "Rank (side 2^k)")->check(CLI::Range(0, 12));
    render->add_option("--slice", slice_text, "Point fixing coordinates 3..d");
    render->add_option("--out", out_path, "Output PGM")->required();

    // series
    auto* series = app.add_subcommand("series", "Build or inspect SeriesSpec JSON");
    series->require_subcommand(1);
    auto* s_build = series->add_subcommand("build", "Build a series");
    std::string build_kind = "theorem8";
    unsigned S = 4, bound = 3;
    std::size_t d = 2;
    double density = 1.0;
    uint64_t seed = 1;
    s_build->add_option("kind", build_kind, "theorem8 or random")->check(CLI::IsMember({"theorem8", "random"}));
    s_build->add_option("--S", S, "Number of columns (theorem8)");
    s_build->add_option("--d", d, "Dimension (random)");
    s_build->add_option("--bound", bound, "Bound rank (random)");
    s_build->add_option("--density", density, "Fill probability (random)");
    s_build->add_option("--seed", seed, "Seed");
    s_build->add_option("--out", out_path, "Output JSON (default stdout)");
    auto* s_inspect = series->add_subcommand("inspect", "Summarize a series");
    s_inspect->add_option("--series", series_path, "SeriesSpec JSON")->required();

    // qm
    auto* qm = app.add_subcommand("qm", "Quasimeasure tables");
    qm->require_subcommand(1);
    auto* qm_build = qm->add_subcommand("build", "Quasimeasure of a series as CSV");
    unsigned K = 4;
    bool naive = false;
    qm_build->add_option("--series", series_path, "SeriesSpec JSON")->required();
    qm_build->add_option("--K", K, "Maximal rank");
    qm_build->add_flag("--naive", naive, "Use cubic partial sums instead of the transform");
    qm_build->add_option("--out", out_path, "Output CSV (default stdout)");
    auto* qm_check = qm->add_subcommand("check", "Additivity check of a CSV table");
    std::string csv_path;
    qm_check->add_option("--csv", csv_path, "Quasimeasure CSV")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    std::string suite;
    verify->add_option("suite", suite, "kernels, lemma1, lemma2, lemma4, tk, theorem8, probes, falsify")
        ->required()
        ->check(CLI::IsMember({"kernels", "lemma1", "lemma2", "lemma4", "tk", "theorem8", "probes", "falsify"}));
    uint64_t max_N = 256, vanish_N = 128;
    unsigned rank = 8, rec_k = 6, rec_rank = 7;
    std::vector<std::size_t> dims;
    std::size_t trials = 0, points = 20, instances = 100;
    unsigned max_l = 3, max_k1 = 5, max_k = 4, max_s = 2, s_rank = 0, l_val = 1, holes = 1;
    unsigned point_rank = 8;
    uint64_t N_max = 256;
    std::size_t samples = 1000;
    std::vector<uint64_t> ks_list, probes, walsh_N;
    std::optional<unsigned> probe_bound, rad_k;
    std::string growth_path, set_kind = "diagonal";
    bool explicit_table = false, no_support = false, all_cells = false;
    std::size_t max_basis = 4;
    verify->add_option("--seed", seed, "Seed");
    verify->add_option("--out", out_path, "Report JSON (default stdout)");
    verify->add_flag("--all-cells", all_cells, "List every grid cell in the report");
    verify->add_option("--max-N", max_N, "kernels: largest N");
    verify->add_option("--rank", rank, "kernels: element rank; theorem8: sample rank");
    verify->add_option("--vanish-N", vanish_N, "kernels: largest N for the vanishing check");
    verify->add_option("--recursion-k", rec_k, "kernels: largest k for the recursion");
    verify->add_option("--recursion-rank", rec_rank, "kernels: element rank for the recursion");
    verify->add_option("--d", dims, "Dimensions (repeatable)");
    verify->add_option("--trials", trials, "Random series per grid cell");
    verify->add_option("--points", points, "lemma1: points per series");
    verify->add_option("--max-l", max_l, "lemma1: largest l");
    verify->add_option("--max-k1", max_k1, "lemma1: largest k_1");
    verify->add_option("--max-k", max_k, "tk: largest k");
    verify->add_option("--max-s", max_s, "tk: largest s");
    verify->add_option("--density", density, "tk: coefficient fill probability");
    verify->add_option("--instances", instances, "lemma4: instance count");
    verify->add_option("--K", K, "lemma2, falsify: leaf rank");
    verify->add_option("--s", s_rank, "lemma2: rank of the cube holding E");
    verify->add_option("--l", l_val, "lemma2: number of shifts");
    verify->add_option("--ks", ks_list, "lemma2: decreasing shift digits");
    verify->add_option("--holes", holes, "lemma2: random cells removed from the cube");
    verify->add_option("--S", S, "theorem8, probes: columns");
    verify->add_option("--point-rank", point_rank, "theorem8: exhaustive rank for g^2");
    verify->add_option("--N-max", N_max, "theorem8: largest N");
    verify->add_option("--samples", samples, "theorem8: closed-form samples");
    verify->add_option("--growth-csv", growth_path, "theorem8: write the growth table");
    verify->add_option("--series", series_path, "probes: SeriesSpec JSON (default: theorem8 series)");
    verify->add_option("--probes", probes, "probes: diagonal indices n (default n_s)");
    verify->add_option("--bound", probe_bound, "probes: bound on #n");
    verify->add_option("--set", set_path, "falsify: SetSpec JSON file");
    verify->add_option("--kind", set_kind, "falsify: empty, whole or diagonal when no --set");
    verify->add_option("--rademacher-k", rad_k, "falsify: Rademacher functionals for k up to this");
    verify->add_option("--walsh-N", walsh_N, "falsify: Walsh functionals for these N");
    verify->add_flag("--explicit", explicit_table, "falsify: every rank as unknowns with additivity rows");
    verify->add_flag("--no-support", no_support, "falsify: drop the support constraint");
    verify->add_option("--basis", max_basis, "falsify: basis elements to return");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        // Help for the innermost parsed subcommand.
        const CLI::App* target = &app;
        while (true) {
            auto subs = target->get_subcommands();
            if (subs.empty()) break;
            target = subs.front();
        }
        out << target->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    if (threads > 0) setenv("WALSH_THREADS", std::to_string(threads).c_str(), 1);

    try {
        if (ev_walsh->parsed()) {
            out << walsh_eval(n_val, DyadicElement::parse(g_text)).value() << "\n";
        } else if (ev_dir->parsed()) {
            const DyadicElement g = DyadicElement::parse(g_text);
            out << (method == "naive" ? dirichlet_naive(N_val, g) : dirichlet_closed(N_val, g)).get_str() << "\n";
        } else if (ev_rad->parsed()) {
            out << rademacher(k_val, DyadicElement::parse(g_text)).value() << "\n";
        } else if (ev_ps->parsed()) {
            const SeriesSpec s = load_series(series_path);
            const DyadicPoint g = DyadicPoint::parse(g_text);
            Index N = parse_index(n_text);
            if (N.size() == 1) N.assign(s.dim(), N[0]);
            if (approx) {
                std::ostringstream o;
                o.precision(17);
                o << s.partial_sum_rect_approx(N, g);
                out << o.str() << "\n";
            } else {
                out << to_string(s.partial_sum_rect(N, g)) << "\n";
            }
        } else if (render->parsed()) {
            const SetPtr set = load_set_arg(set_path, set_json);
            std::optional<DyadicPoint> slice;
            if (!slice_text.empty()) slice = DyadicPoint::parse(slice_text);
            const Bitmap bm = rasterize(*set, render_k, slice);
            write_pgm(bm, out_path);
            out << "wrote " << out_path << " " << bm.width << "x" << bm.height << " sha256=" << sha256_hex(to_pgm(bm))
                << "\n";
        } else if (s_build->parsed()) {
            json j;
            if (build_kind == "theorem8") {
                const IndexSequence idx = default_index_sequence(S);
                j = series_to_json(build_theorem8_series(idx, default_schedule(S)));
                j["S"] = S;
            } else {
                std::mt19937_64 rng(seed);
                RandomSeriesOptions ro;
                ro.d = d;
                ro.bound_rank = bound;
                ro.density = density;
                j = series_to_json(random_series(ro, rng));
            }
            j["seed"] = seed;
            emit(j, out_path, out);
        } else if (s_inspect->parsed()) {
            const SeriesSpec s = load_series(series_path);
            emit({{"d", s.dim()},
                  {"bound_rank", s.bound_rank()},
                  {"truncated", s.truncated()},
                  {"terms", s.coefficients().size()},
                  {"denominator", s.denominator().get_str()}},
                 "", out);
        } else if (qm_build->parsed()) {
            const SeriesSpec s = load_series(series_path);
            const Quasimeasure tau = naive ? quasimeasure_from_series_naive(s, K) : quasimeasure_from_series(s, K);
            if (out_path.empty() || out_path == "-") {
                write_quasimeasure_csv(tau, out);
            } else {
                std::ofstream f(out_path);
                if (!f) throw std::runtime_error("cannot write " + out_path);
                write_quasimeasure_csv(tau, f);
                out << "wrote " << out_path << " d=" << tau.dim() << " K=" << K << "\n";
            }
        } else if (qm_check->parsed()) {
            std::ifstream f(csv_path);
            if (!f) throw std::runtime_error("cannot read " + csv_path);
            const Quasimeasure tau = read_quasimeasure_csv(f);
            const AdditivityReport r = check_additivity(tau);
            json j{{"additive", r.ok}, {"d", tau.dim()}, {"K", tau.max_rank()}};
            if (!r.ok) {
                j["parent"] = r.parent->str();
                j["parent_value"] = to_string(r.parent_value);
                j["children_sum"] = to_string(r.children_sum);
            }
            emit(j, "", out);
            if (!r.ok) return 1;
        } else if (verify->parsed()) {
            json j;
            bool ok = true;
            j["suite"] = suite;
            j["seed"] = seed;
            if (suite == "kernels") {
                const IdentityReport a = kernel_equivalence(max_N, rank);
                const IdentityReport b = kernel_recursion(rec_k, rec_rank);
                const IdentityReport c = kernel_vanishing(std::min(max_N, vanish_N), rank);
                j["reports"] = {a.to_json(all_cells), b.to_json(all_cells), c.to_json(all_cells)};
                ok = a.ok() && b.ok() && c.ok();
            } else if (suite == "lemma1") {
                Lemma1GridOptions o;
                if (!dims.empty()) o.dims = dims;
                o.max_l = max_l;
                o.max_k1 = max_k1;
                if (trials) o.series = trials;
                o.points = points;
                o.seed = seed;
                const IdentityReport r = lemma1_grid(o);
                j["report"] = r.to_json(all_cells);
                ok = r.ok();
            } else if (suite == "lemma2") {
                const std::size_t dd = dims.empty() ? 2 : dims.front();
                if (ks_list.empty()) ks_list.push_back(K > 1 ? K - 2 : 0);
                std::vector<unsigned> ks(ks_list.begin(), ks_list.end());
                SupportMask E;
                E.d = dd;
                E.K = K;
                E.cells.assign(std::size_t{1} << (K * dd), 0);
                // The rank-s cube at the origin, minus random cells.
                std::vector<uint64_t> inside;
                for (uint64_t f = 0; f < E.cells.size(); ++f) {
                    bool in = true;
                    for (std::size_t c = 0; c < dd; ++c)
                        if (((f >> (K * (dd - 1 - c))) & ((uint64_t{1} << K) - 1)) >> (K - s_rank)) in = false;
                    if (in) {
                        E.cells[f] = 1;
                        inside.push_back(f);
                    }
                }
                std::mt19937_64 rng(seed);
                std::shuffle(inside.begin(), inside.end(), rng);
                for (unsigned h = 0; h < holes && h < inside.size(); ++h) E.cells[inside[h]] = 0;
                const Lemma2Result r = lemma2_search(E, s_rank, l_val, ks);
                const bool applies = r.k0 && *std::min_element(ks.begin(), ks.end()) >= *r.k0;
                j["d"] = dd;
                j["K"] = K;
                j["s"] = s_rank;
                j["l"] = l_val;
                j["ks"] = ks;
                j["holes"] = holes;
                j["k0"] = r.k0 ? json(*r.k0) : json(nullptr);
                j["dense_cube"] = r.dense_cube ? json(r.dense_cube->str()) : json(nullptr);
                j["found"] = r.point_cell ? json(r.point_cell->str()) : json("NotFound");
                j["hypothesis_holds"] = applies;
                ok = !applies || r.point_cell.has_value();
            } else if (suite == "lemma4") {
                const IdentityReport r = lemma4_suite(instances, seed);
                j["report"] = r.to_json(all_cells);
                ok = r.ok() && r.info["precondition_failures"] == 0;
            } else if (suite == "tk") {
                TkGridOptions o;
                if (!dims.empty()) o.dims = dims;
                o.max_k = max_k;
                o.max_s = max_s;
                if (trials) o.series = trials;
                if (density != 1.0) o.density = density;
                o.seed = seed;
                const IdentityReport r = tk_grid(o);
                j["report"] = r.to_json(all_cells);
                ok = r.ok();
            } else if (suite == "theorem8") {
                const IndexSequence idx = default_index_sequence(S);
                const GrowthSchedule sched = default_schedule(S);
                const SeriesSpec s = build_theorem8_series(idx, sched);
                CounterexampleOptions o;
                o.point_rank = point_rank;
                o.sample_rank = rank;
                o.N_max = N_max;
                o.samples = samples;
                o.seed = seed;
                const CounterexampleReport r = verify_counterexample(s, idx, sched, o);
                j["S"] = S;
                j["report"] = to_json(r);
                if (!growth_path.empty()) write_text(growth_path, growth_csv(r));
                ok = r.ok();
            } else if (suite == "probes") {
                SeriesSpec s = series_path.empty() ? build_theorem8_series(default_index_sequence(S), default_schedule(S))
                                                   : load_series(series_path);
                if (probes.empty()) probes = default_index_sequence(S).n;
                const ProbeReport r = cantor_lebesgue_probe(s, probes, probe_bound);
                j["report"] = to_json(r);
            } else if (suite == "falsify") {
                const std::size_t dd = dims.empty() ? 2 : dims.front();
                const SetPtr E = set_path.empty() ? falsifier_set(set_kind, dd) : load_set(set_path);
                FalsifierConstraints c;
                c.support = !no_support;
                c.rademacher_max_k = rad_k;
                c.walsh_N = walsh_N;
                c.explicit_table = explicit_table;
                const FalsifierResult r = uset_falsify(*E, K, c, max_basis);
                j["report"] = r.to_json();
                const SupportMask mask = set_mask(*E, K);
                json checks = json::array();
                for (const Quasimeasure& b : r.basis) {
                    const bool additive = check_additivity(b).ok;
                    bool inside = true;
                    if (c.support) {
                        const SupportMask sm = support_mask(b);
                        for (std::size_t f = 0; f < sm.cells.size(); ++f)
                            if (sm.cells[f] && !mask.cells[f]) inside = false;
                    }
                    checks.push_back({{"additive", additive}, {"support_inside", inside}});
                    ok = ok && additive && inside;
                }
                j["basis_checks"] = checks;
            }
            j["ok"] = ok;
            emit(j, out_path, out);
            if (!ok) {
                err << "check failed: suite " << suite << "\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace dyadic
