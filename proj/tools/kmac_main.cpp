// kmac: kernel measures of association on Euclidean samples.
//
// Subcommands: compute, test, simulate, qq-null, loglog, power, coeff-curve.
// Exit codes: 0 success, 2 invalid configuration, 3 degenerate data.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "kmac/harness.hpp"
#include "kmac/parallel.hpp"
#include "kmac/simd.hpp"

using nlohmann::json;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 42;
    unsigned threads = 0;
    bool json_out = false;
};

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        const std::string tok = s.substr(start, end - start);
        if (!tok.empty()) out.push_back(std::stod(tok));
        start = end + 1;
        if (end == s.size()) break;
    }
    if (out.empty()) throw kmac::ConfigError("empty grid: " + s);
    return out;
}

kmac::TableFormat parse_format(const std::string& s) {
    if (s == "csv") return kmac::TableFormat::Csv;
    if (s == "json") return kmac::TableFormat::Json;
    throw kmac::ConfigError("unknown format: " + s);
}

void emit_table(const kmac::ExperimentTable& table, const std::string& out_path,
                const std::string& format, bool json_fallback) {
    if (!out_path.empty()) {
        kmac::write_table(table, out_path, parse_format(format));
        std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    } else {
        std::cout << (json_fallback ? table.to_json() : table.to_csv());
    }
}

json report_to_json(const kmac::TestReport& r, double alpha) {
    json j;
    j["statistic"] = r.statistic;
    if (std::isfinite(r.z))
        j["z"] = r.z;
    else
        j["z"] = nullptr;
    j["p_value"] = r.p_value;
    j["method"] = r.method;
    j["estimator_value"] = r.estimator_value;
    if (r.seed) j["seed"] = *r.seed;
    j["B"] = r.B;
    j["runtime_ms"] = r.runtime_ms;
    j["alpha"] = alpha;
    j["reject"] = r.p_value <= alpha;
    return j;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"kernel measures of association between paired samples"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
    app.add_flag("--json", g.json_out, "JSON output on stdout");

    // ---- compute ---------------------------------------------------------
    auto* compute = app.add_subcommand("compute", "estimator value on a dataset");
    std::string cx, cy, ckernel = "gaussian", cgraph = "knn:k=1", cestimator = "standard";
    std::string cgrid_x, cgrid_y, cdump;
    compute->add_option("--x", cx, "X sample CSV")->required();
    compute->add_option("--y", cy, "Y sample CSV")->required();
    compute->add_option("--kernel", ckernel, "kernel spec");
    compute->add_option("--graph", cgraph, "graph spec");
    compute->add_option("--estimator", cestimator, "standard|linear|rank");
    compute->add_option("--grid-x", cgrid_x, "rank grid for X (halton|uniform:seed=..|lattice1d)");
    compute->add_option("--grid-y", cgrid_y, "rank grid for Y");
    compute->add_option("--dump-graph", cdump, "write the graph edge list CSV here");

    // ---- test ------------------------------------------------------------
    auto* test = app.add_subcommand("test", "independence test");
    std::string tx, ty, tkernel = "distance:alpha=1", tgraph = "knn:k=1";
    std::string testimator = "standard", tmethod = "asymptotic";
    std::string tgrid_x, tgrid_y;
    std::size_t tB = 1000, tmc = 100000;
    double talpha = 0.05;
    test->add_option("--x", tx)->required();
    test->add_option("--y", ty)->required();
    test->add_option("--kernel", tkernel, "kernel spec");
    test->add_option("--graph", tgraph, "graph spec");
    test->add_option("--estimator", testimator, "standard|linear|rank|dcor|hsic");
    test->add_option("--method", tmethod, "asymptotic|perm");
    test->add_option("--B", tB, "permutation replicates");
    test->add_option("--alpha", talpha, "test level");
    test->add_option("--grid-x", tgrid_x);
    test->add_option("--grid-y", tgrid_y);
    test->add_option("--mc-nodes", tmc, "nodes for rank variance constants");

    // ---- simulate ----------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset");
    std::string ssetting = "sinusoidal", sout;
    double slambda = 0.0;
    std::size_t sn = 300, sblocks = 2;
    simulate->add_option("--setting", ssetting, "setting name");
    simulate->add_option("--lambda", slambda, "noise level");
    simulate->add_option("--n", sn, "sample size");
    simulate->add_option("--blocks", sblocks, "stacked pair copies (dependence settings)");
    simulate->add_option("--out", sout, "output directory")->required();

    // ---- qq-null -----------------------------------------------------------
    auto* qq = app.add_subcommand("qq-null", "null standardized statistics vs normal");
    std::string qsetting = "null2", qkernel = "gaussian", qgraph = "mst";
    std::string qestimator = "standard", qout, qformat = "csv";
    std::size_t qn = 500, qreps = 500;
    qq->add_option("--setting", qsetting, "null1|null2");
    qq->add_option("--n", qn);
    qq->add_option("--reps", qreps);
    qq->add_option("--estimator", qestimator, "standard|linear");
    qq->add_option("--kernel", qkernel);
    qq->add_option("--graph", qgraph);
    qq->add_option("--out", qout, "output path");
    qq->add_option("--format", qformat, "csv|json");
    bool qfull = false;
    qq->add_flag("--full-scale", qfull, "n=2000 with 1000 replicates");

    // ---- loglog -------------------------------------------------------------
    auto* loglog = app.add_subcommand("loglog", "rate slopes across a dyadic n grid");
    std::size_t lreps = 100;
    std::string lout, lformat = "csv";
    loglog->add_option("--reps", lreps);
    loglog->add_option("--out", lout);
    loglog->add_option("--format", lformat);
    bool lfull = false;
    loglog->add_flag("--full-scale", lfull, "1000 replicates per point");

    // ---- power ---------------------------------------------------------------
    auto* power = app.add_subcommand("power", "permutation-test power across noise levels");
    std::string psetting = "sinusoidal", plambdas, ptests, pout, pformat = "csv";
    std::size_t pn = 300, pB = 1000, preps = 200;
    double palpha = 0.05;
    bool pfull = false;
    power->add_option("--setting", psetting);
    power->add_option("--lambdas", plambdas, "comma-separated noise grid");
    power->add_option("--n", pn);
    power->add_option("--B", pB);
    power->add_option("--reps", preps);
    power->add_option("--alpha", palpha);
    power->add_option("--tests", ptests, "comma-separated labels from the default set");
    power->add_flag("--full-scale", pfull, "1000 replicates per point");
    power->add_option("--out", pout);
    power->add_option("--format", pformat);

    // ---- coeff-curve ------------------------------------------------------------
    auto* coeff = app.add_subcommand("coeff-curve", "mean estimator values across a grid");
    std::string csetting = "sinusoidal", cgrid, cout_path, cformat = "csv";
    std::size_t cn = 2000, creps = 5;
    coeff->add_option("--setting", csetting, "sinusoidal|linear");
    coeff->add_option("--grid", cgrid, "lambda grid (sinusoidal) or rho grid (linear)");
    coeff->add_option("--n", cn);
    coeff->add_option("--reps", creps);
    coeff->add_option("--out", cout_path);
    coeff->add_option("--format", cformat);
    bool cfull = false;
    coeff->add_flag("--full-scale", cfull, "20 replicates per grid point");

    for (auto* sub : {compute, test, simulate, qq, loglog, power, coeff})
        sub->fallthrough();  // accept --seed/--threads/--json after the subcommand

    CLI11_PARSE(app, argc, argv);
    kmac::set_threads(g.threads);

    if (compute->parsed()) {
        const auto x = kmac::load_csv(cx);
        const auto y = kmac::load_csv(cy);
        const auto kernel = kmac::parse_kernel_spec(ckernel);
        const auto graph_spec = kmac::parse_graph_spec(cgraph);
        const auto kind = kmac::parse_estimator_kind(cestimator);
        kmac::AssociationEstimate est;
        if (kind == kmac::EstimatorKind::Rank) {
            kmac::GridSpec gx = cgrid_x.empty()
                                    ? kmac::GridSpec{x.cols() == 1 ? kmac::GridSource::Lattice1d
                                                                   : kmac::GridSource::Halton,
                                                     0}
                                    : kmac::parse_grid_spec(cgrid_x);
            kmac::GridSpec gy = cgrid_y.empty()
                                    ? kmac::GridSpec{y.cols() == 1 ? kmac::GridSource::Lattice1d
                                                                   : kmac::GridSource::Halton,
                                                     0}
                                    : kmac::parse_grid_spec(cgrid_y);
            kmac::GeoGraph graph;
            est = kmac::eta_hat_rank(x, y, kernel, graph_spec,
                                     kmac::make_grid(gx, x.rows(), x.cols()),
                                     kmac::make_grid(gy, y.rows(), y.cols()), &graph);
            if (!cdump.empty()) {
                std::ofstream f(cdump);
                f << kmac::dump_edges_csv(graph);
            }
        } else {
            const kmac::GeoGraph graph = kmac::build_graph(graph_spec, x);
            est = kind == kmac::EstimatorKind::Linear
                      ? kmac::eta_hat_lin(x, y, kernel, graph)
                      : kmac::eta_hat(x, y, kernel, graph);
            if (!cdump.empty()) {
                std::ofstream f(cdump);
                f << kmac::dump_edges_csv(graph);
            }
        }
        json j;
        j["value"] = est.value;
        j["numerator"] = est.numerator;
        j["denominator"] = est.denominator;
        j["graph_term"] = est.graph_term;
        j["cross_term"] = est.cross_term;
        j["n"] = est.n;
        j["kind"] = kmac::kind_name(est.kind);
        if (g.json_out)
            std::cout << j.dump(2) << "\n";
        else
            std::cout << "value " << est.value << "  (numerator " << est.numerator
                      << ", denominator " << est.denominator << ", n " << est.n << ")\n";
        return 0;
    }

    if (test->parsed()) {
        const auto x = kmac::load_csv(tx);
        const auto y = kmac::load_csv(ty);
        const auto kernel = kmac::parse_kernel_spec(tkernel);
        kmac::TestReport rep;
        if (testimator == "dcor" || testimator == "hsic") {
            if (tmethod != "perm")
                throw kmac::ConfigError(testimator + " is a permutation-calibrated baseline; "
                                        "use --method perm");
            rep = testimator == "dcor" ? kmac::dcov_test(x, y, tB, g.seed)
                                       : kmac::hsic_test(x, y, kernel, tB, g.seed);
        } else {
            const auto kind = kmac::parse_estimator_kind(testimator);
            const auto graph_spec = kmac::parse_graph_spec(tgraph);
            kmac::RankGrids grids;
            if (!tgrid_x.empty()) grids.grid_x = kmac::parse_grid_spec(tgrid_x);
            if (!tgrid_y.empty()) grids.grid_y = kmac::parse_grid_spec(tgrid_y);
            grids.mc_nodes = tmc;
            if (tmethod == "asymptotic")
                rep = kmac::asymptotic_test(kind, x, y, kernel, graph_spec, grids);
            else if (tmethod == "perm")
                rep = kmac::permutation_test(kind, x, y, kernel, graph_spec, tB, g.seed, grids);
            else
                throw kmac::ConfigError("unknown method: " + tmethod);
        }
        const json j = report_to_json(rep, talpha);
        if (g.json_out)
            std::cout << j.dump(2) << "\n";
        else
            std::cout << rep.method << ": statistic " << rep.statistic << ", p "
                      << rep.p_value << (rep.p_value <= talpha ? "  [reject]" : "") << "\n";
        return 0;
    }

    if (simulate->parsed()) {
        kmac::SettingSpec sp;
        sp.name = kmac::parse_setting(ssetting);
        sp.lambda = slambda;
        sp.n = sn;
        sp.seed = g.seed;
        sp.blocks = sblocks;
        auto [x, y] = kmac::sample_setting(sp);
        std::filesystem::create_directories(sout);
        kmac::write_matrix_csv(x, sout + "/x.csv");
        kmac::write_matrix_csv(y, sout + "/y.csv");
        std::fprintf(stderr, "wrote %s/x.csv (%zux%zu), %s/y.csv (%zux%zu)\n", sout.c_str(),
                     x.rows(), x.cols(), sout.c_str(), y.rows(), y.cols());
        return 0;
    }

    if (qq->parsed()) {
        kmac::QqNullConfig cfg;
        cfg.setting = kmac::parse_setting(qsetting);
        cfg.n = qfull ? 2000 : qn;
        cfg.reps = qfull ? 1000 : qreps;
        cfg.kind = kmac::parse_estimator_kind(qestimator);
        cfg.kernel = kmac::parse_kernel_spec(qkernel);
        cfg.graph = kmac::parse_graph_spec(qgraph);
        cfg.seed = g.seed;
        const auto table = kmac::run_qq_null(cfg);
        emit_table(table, qout, qformat, g.json_out);
        return 0;
    }

    if (loglog->parsed()) {
        kmac::LogLogConfig cfg = kmac::default_loglog_config();
        cfg.reps = lfull ? 1000 : lreps;
        cfg.seed = g.seed;
        const auto table = kmac::run_loglog_rate(cfg);
        emit_table(table, lout, lformat, g.json_out);
        return 0;
    }

    if (power->parsed()) {
        kmac::PowerCurveConfig cfg;
        cfg.setting = kmac::parse_setting(psetting);
        if (!plambdas.empty()) cfg.lambdas = parse_grid(plambdas);
        cfg.n = pn;
        cfg.B = pB;
        cfg.reps = pfull ? 1000 : preps;
        cfg.alpha = palpha;
        cfg.seed = g.seed;
        if (!ptests.empty()) {
            const auto all = kmac::default_power_tests();
            std::vector<kmac::PowerTestSpec> chosen;
            std::size_t start = 0;
            while (start <= ptests.size()) {
                auto end = ptests.find(',', start);
                if (end == std::string::npos) end = ptests.size();
                const std::string label = ptests.substr(start, end - start);
                bool found = false;
                for (const auto& t : all)
                    if (t.label == label) {
                        chosen.push_back(t);
                        found = true;
                    }
                if (!found) throw kmac::ConfigError("unknown test label: " + label);
                if (end == ptests.size()) break;
                start = end + 1;
            }
            cfg.tests = std::move(chosen);
        }
        const auto table = kmac::run_power_curve(cfg);
        emit_table(table, pout, pformat, g.json_out);
        return 0;
    }

    if (coeff->parsed()) {
        kmac::CoeffCurveConfig cfg;
        cfg.setting = csetting;
        if (!cgrid.empty()) cfg.grid = parse_grid(cgrid);
        cfg.n = cn;
        cfg.reps = cfull ? 20 : creps;
        cfg.seed = g.seed;
        const auto table = kmac::run_coeff_curve(cfg);
        emit_table(table, cout_path, cformat, g.json_out);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const kmac::DegenerateDataError& e) {
        std::fprintf(stderr, "degenerate data: %s\n", e.what());
        return 3;
    } catch (const kmac::ConfigError& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
