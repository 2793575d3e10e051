#include "kmac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kmac/parallel.hpp"
#include "kmac/rng.hpp"
#include "kmac/stats.hpp"

#include "json.hpp"

namespace kmac {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void ExperimentTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw ConfigError("ExperimentTable: row width mismatch");
    rows.push_back(std::move(row));
}

std::string ExperimentTable::to_csv() const {
    std::ostringstream out;
    for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (std::isnan(row[c]))
                out << "NA";
            else
                out << fmt17(row[c]);
            out << (c + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
    return out.str();
}

std::string ExperimentTable::to_json() const {
    nlohmann::json j;
    j["metadata"] = nlohmann::json::object();
    for (const auto& [k, v] : metadata) j["metadata"][k] = v;
    j["columns"] = columns;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json r = nlohmann::json::array();
        for (double v : row) {
            if (std::isnan(v))
                r.push_back(nullptr);
            else
                r.push_back(v);
        }
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

DataMatrix parse_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    std::istringstream in(text);
    std::string line;
    bool first_content = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(',', start);
            cells.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        std::vector<double> vals;
        vals.reserve(cells.size());
        bool numeric = true;
        for (const auto& cell : cells) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() &&
                       (cell[used] == ' ' || cell[used] == '\t'))
                    ++used;
                if (used != cell.size()) {
                    numeric = false;
                    break;
                }
                vals.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first_content) {  // header row
                first_content = false;
                continue;
            }
            throw ConfigError("csv: non-numeric cell at line " + std::to_string(lineno));
        }
        first_content = false;
        if (width == 0) width = vals.size();
        if (vals.size() != width)
            throw ConfigError("csv: ragged row at line " + std::to_string(lineno));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw ConfigError("csv: no data rows");
    DataMatrix m(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m.at(i, j) = rows[i][j];
    return m;
}

DataMatrix load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

void write_table(const ExperimentTable& table, const std::string& path, TableFormat fmt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << (fmt == TableFormat::Csv ? table.to_csv() : table.to_json());
    if (!out) throw ConfigError("write failed: " + path);
}

void write_matrix_csv(const DataMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j)
            out << fmt17(m.at(i, j)) << (j + 1 < m.cols() ? "," : "");
        out << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<EstimatorConfig> default_coeff_configs() {
    return {
        {EstimatorKind::Standard, parse_kernel_spec("distance:alpha=1"),
         parse_graph_spec("knn:k=1"), "eta_dist_1nn"},
        {EstimatorKind::Standard, parse_kernel_spec("gaussian"),
         parse_graph_spec("knn:k=1"), "eta_gauss_1nn"},
        {EstimatorKind::Linear, parse_kernel_spec("distance:alpha=1"),
         parse_graph_spec("knn:k=1"), "etalin_dist_1nn"},
        {EstimatorKind::Linear, parse_kernel_spec("distance:alpha=1"),
         parse_graph_spec("knn:k=20"), "etalin_dist_20nn"},
    };
}

AssociationEstimate run_estimator(const EstimatorConfig& cfg, const DataMatrix& x,
                                  const DataMatrix& y) {
    const GeoGraph graph = build_graph(cfg.graph, x);
    if (cfg.kind == EstimatorKind::Linear) return eta_hat_lin(x, y, cfg.kernel, graph);
    return eta_hat(x, y, cfg.kernel, graph);
}

}  // namespace

ExperimentTable run_coeff_curve(const CoeffCurveConfig& cfg) {
    const bool gauss_linear = cfg.setting == "linear";
    if (!gauss_linear && cfg.setting != "sinusoidal")
        throw ConfigError("coeff-curve supports settings 'sinusoidal' and 'linear'");
    std::vector<double> grid = cfg.grid;
    if (grid.empty()) {
        if (gauss_linear)
            grid = {0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
        else
            grid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
    }
    auto configs = cfg.configs.empty() ? default_coeff_configs() : cfg.configs;

    ExperimentTable table;
    table.columns.push_back(gauss_linear ? "rho" : "lambda");
    for (const auto& c : configs) table.columns.push_back("mean_" + c.label);
    if (cfg.with_dcor) table.columns.push_back("dcor2");

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        std::vector<std::vector<double>> vals(configs.size());
        std::vector<double> dcor_vals;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const std::uint64_t s = mix64(cfg.seed ^ mix64(gi * 1000 + rep));
            DataMatrix x, y;
            if (gauss_linear) {
                GaussianPairSpec gp;
                gp.rho = grid[gi];
                gp.blocks = 2;
                std::tie(x, y) = sample_gaussian_pair(gp, cfg.n, s);
            } else {
                SettingSpec sp;
                sp.name = Setting::Sinusoidal;
                sp.lambda = grid[gi];
                sp.n = cfg.n;
                sp.seed = s;
                std::tie(x, y) = sample_setting(sp);
            }
            for (std::size_t c = 0; c < configs.size(); ++c)
                vals[c].push_back(run_estimator(configs[c], x, y).value);
            if (cfg.with_dcor) dcor_vals.push_back(dcor_squared(x, y));
        }
        std::vector<double> row;
        row.push_back(grid[gi]);
        for (auto& v : vals) row.push_back(mean(v));
        if (cfg.with_dcor) row.push_back(mean(dcor_vals));
        table.add_row(std::move(row));
    }

    table.add_meta("command", "coeff-curve");
    table.add_meta("setting", cfg.setting);
    table.add_meta("n", std::to_string(cfg.n));
    table.add_meta("reps", std::to_string(cfg.reps));
    table.add_meta("seed", std::to_string(cfg.seed));
    for (const auto& c : configs)
        table.add_meta("config_" + c.label,
                       kind_name(c.kind) + "|" + c.kernel.to_string() + "|" +
                           c.graph.to_string());
    return table;
}

ExperimentTable run_qq_null(const QqNullConfig& cfg) {
    if (cfg.setting != Setting::NullSettingI && cfg.setting != Setting::NullSettingII)
        throw ConfigError("qq-null requires an independence setting (null1 or null2)");
    if (cfg.kind == EstimatorKind::Rank)
        throw ConfigError("qq-null covers the standard and linear estimators");
    if (cfg.reps < 200) throw ConfigError("qq-null needs reps >= 200");

    std::vector<double> zvals(cfg.reps);
    std::vector<char> degenerate(cfg.reps, 0);
    parallel_for(cfg.reps, [&](std::size_t rep) {
        SettingSpec sp;
        sp.name = cfg.setting;
        sp.n = cfg.n;
        sp.seed = mix64(cfg.seed ^ mix64(rep + 7));
        auto [x, y] = sample_setting(sp);
        const GeoGraph graph = build_graph(cfg.graph, x);
        const double num = numerator_stat(cfg.kind, x, y, cfg.kernel, graph);
        const CltScaling sc = cfg.kind == EstimatorKind::Linear
                                  ? clt_scaling_linear(y, cfg.kernel, graph)
                                  : clt_scaling_standard(y, cfg.kernel, graph);
        if (!(sc.s2 > 1e-12)) {
            degenerate[rep] = 1;
            zvals[rep] = 0.0;
            return;
        }
        zvals[rep] = num / std::sqrt(sc.s2);
    });
    std::size_t bad = 0;
    for (char c : degenerate) bad += c;
    if (100 * bad > cfg.reps)
        throw DegenerateDataError("qq-null: variance estimate degenerate in >1% of replicates (" +
                                  std::to_string(bad) + "/" + std::to_string(cfg.reps) + ")");

    std::sort(zvals.begin(), zvals.end());
    const double ks = ks_distance_normal(zvals);
    const double ksp = ks_pvalue(ks, cfg.reps);

    ExperimentTable table;
    table.columns = {"z_sorted", "normal_quantile"};
    for (std::size_t i = 0; i < zvals.size(); ++i) {
        const double q = normal_quantile((static_cast<double>(i) + 0.5) / cfg.reps);
        table.add_row({zvals[i], q});
    }
    table.add_meta("command", "qq-null");
    table.add_meta("setting", setting_name(cfg.setting));
    table.add_meta("n", std::to_string(cfg.n));
    table.add_meta("reps", std::to_string(cfg.reps));
    table.add_meta("estimator", kind_name(cfg.kind));
    table.add_meta("kernel", cfg.kernel.to_string());
    table.add_meta("graph", cfg.graph.to_string());
    table.add_meta("seed", std::to_string(cfg.seed));
    table.add_meta("ks_distance", fmt17(ks));
    table.add_meta("ks_pvalue", fmt17(ksp));
    return table;
}

LogLogConfig default_loglog_config() {
    LogLogConfig cfg;
    cfg.entries = {
        {Setting::NullSettingI, EstimatorKind::Standard, parse_kernel_spec("gaussian"),
         parse_graph_spec("mst"), "eta_gauss_mst_null1"},
        {Setting::NullSettingI, EstimatorKind::Standard, parse_kernel_spec("gaussian"),
         parse_graph_spec("knn:k=1"), "eta_gauss_1nn_null1"},
        {Setting::NullSettingII, EstimatorKind::Linear, parse_kernel_spec("distance:alpha=1"),
         parse_graph_spec("knn:k=1"), "etalin_dist_1nn_null2"},
        {Setting::NullSettingII, EstimatorKind::Linear, parse_kernel_spec("distance:alpha=1"),
         parse_graph_spec("knn:k=20"), "etalin_dist_20nn_null2"},
    };
    return cfg;
}

ExperimentTable run_loglog_rate(const LogLogConfig& cfg_in) {
    LogLogConfig cfg = cfg_in;
    if (cfg.entries.empty()) cfg.entries = default_loglog_config().entries;
    if (cfg.reps < 2) throw ConfigError("loglog needs reps >= 2");

    ExperimentTable table;
    table.columns = {"config_id", "n", "sd_numerator", "slope", "ci_lo", "ci_hi"};

    for (std::size_t e = 0; e < cfg.entries.size(); ++e) {
        const auto& entry = cfg.entries[e];
        std::vector<double> log_n, log_sd, sds;
        for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
            const std::size_t n = cfg.n_grid[ni];
            std::vector<double> nums(cfg.reps);
            parallel_for(cfg.reps, [&](std::size_t rep) {
                SettingSpec sp;
                sp.name = entry.setting;
                sp.n = n;
                sp.seed = mix64(cfg.seed ^ mix64(e * 131071 + ni * 511 + rep));
                auto [x, y] = sample_setting(sp);
                const GeoGraph graph = build_graph(entry.graph, x);
                // the un-normalized numerator: statistic / sqrt(n)
                nums[rep] = numerator_stat(entry.kind, x, y, entry.kernel, graph) /
                            std::sqrt(static_cast<double>(n));
            });
            const double sd = std::sqrt(variance(nums));
            sds.push_back(sd);
            log_n.push_back(std::log(static_cast<double>(n)));
            log_sd.push_back(std::log(sd));
        }
        // known per-point error of log sd from the chi-square law
        const double sigma_pt = 1.0 / std::sqrt(2.0 * (static_cast<double>(cfg.reps) - 1.0));
        const SlopeFit fit = ols_slope(log_n, log_sd, sigma_pt);
        for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
            table.add_row({static_cast<double>(e), static_cast<double>(cfg.n_grid[ni]),
                           sds[ni], fit.slope, fit.ci_lo, fit.ci_hi});
        table.add_meta("config_" + std::to_string(e),
                       entry.label + "=" + setting_name(entry.setting) + "|" +
                           kind_name(entry.kind) + "|" + entry.kernel.to_string() + "|" +
                           entry.graph.to_string());
    }
    table.add_meta("command", "loglog");
    table.add_meta("reps", std::to_string(cfg.reps));
    table.add_meta("seed", std::to_string(cfg.seed));
    return table;
}

std::vector<PowerTestSpec> default_power_tests() {
    std::vector<PowerTestSpec> tests;
    const KernelSpec kd = parse_kernel_spec("distance:alpha=1");
    tests.push_back({PowerTestSpec::Type::Kmac, EstimatorKind::Standard, kd,
                     parse_graph_spec("knn:k=1"), "kmac_std_1nn"});
    tests.push_back({PowerTestSpec::Type::Kmac, EstimatorKind::Standard, kd,
                     parse_graph_spec("knn:k=20"), "kmac_std_20nn"});
    tests.push_back({PowerTestSpec::Type::Kmac, EstimatorKind::Linear, kd,
                     parse_graph_spec("knn:k=1"), "kmac_lin_1nn"});
    tests.push_back({PowerTestSpec::Type::Kmac, EstimatorKind::Linear, kd,
                     parse_graph_spec("knn:k=20"), "kmac_lin_20nn"});
    tests.push_back({PowerTestSpec::Type::Dcor, EstimatorKind::Standard, kd,
                     parse_graph_spec("knn:k=1"), "dcor"});
    tests.push_back({PowerTestSpec::Type::Hsic, EstimatorKind::Standard,
                     parse_kernel_spec("gaussian"), parse_graph_spec("knn:k=1"), "hsic"});
    return tests;
}

ExperimentTable run_power_curve(const PowerCurveConfig& cfg) {
    if (cfg.setting == Setting::NullSettingI || cfg.setting == Setting::NullSettingII)
        throw ConfigError("power curves need a dependence setting");
    auto tests = cfg.tests.empty() ? default_power_tests() : cfg.tests;

    ExperimentTable table;
    table.columns.push_back("lambda");
    for (const auto& t : tests) table.columns.push_back("power_" + t.label);

    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
        std::vector<std::size_t> rejections(tests.size(), 0);
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            SettingSpec sp;
            sp.name = cfg.setting;
            sp.lambda = cfg.lambdas[li];
            sp.n = cfg.n;
            sp.seed = mix64(cfg.seed ^ mix64(li * 65537 + rep));
            auto [x, y] = sample_setting(sp);
            for (std::size_t t = 0; t < tests.size(); ++t) {
                const std::uint64_t ts = mix64(sp.seed ^ mix64(t + 0x7e57));
                TestReport rep_out;
                switch (tests[t].type) {
                    case PowerTestSpec::Type::Kmac:
                        rep_out = permutation_test(tests[t].kind, x, y, tests[t].kernel,
                                                   tests[t].graph, cfg.B, ts);
                        break;
                    case PowerTestSpec::Type::Dcor:
                        rep_out = dcov_test(x, y, cfg.B, ts);
                        break;
                    case PowerTestSpec::Type::Hsic:
                        rep_out = hsic_test(x, y, tests[t].kernel, cfg.B, ts);
                        break;
                }
                if (rep_out.p_value <= cfg.alpha) ++rejections[t];
            }
        }
        std::vector<double> row;
        row.push_back(cfg.lambdas[li]);
        for (std::size_t t = 0; t < tests.size(); ++t)
            row.push_back(static_cast<double>(rejections[t]) / cfg.reps);
        table.add_row(std::move(row));
    }

    table.add_meta("command", "power");
    table.add_meta("setting", setting_name(cfg.setting));
    table.add_meta("n", std::to_string(cfg.n));
    table.add_meta("B", std::to_string(cfg.B));
    table.add_meta("reps", std::to_string(cfg.reps));
    table.add_meta("alpha", fmt17(cfg.alpha));
    table.add_meta("seed", std::to_string(cfg.seed));
    for (const auto& t : tests)
        table.add_meta("test_" + t.label, t.kernel.to_string() + "|" + t.graph.to_string());
    return table;
}

}  // namespace kmac
