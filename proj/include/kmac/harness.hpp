#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kmac/estimators.hpp"
#include "kmac/geograph.hpp"
#include "kmac/inference.hpp"
#include "kmac/kernels.hpp"
#include "kmac/oracles.hpp"

namespace kmac {

// Named numeric columns plus the metadata needed to reproduce the run.
struct ExperimentTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_meta(const std::string& key, const std::string& value) {
        metadata.emplace_back(key, value);
    }
    void add_row(std::vector<double> row);
    std::string to_csv() const;   // "# key=value" lines, header, 17-digit rows
    std::string to_json() const;
};

enum class TableFormat { Csv, Json };

// Rectangular numeric CSV; a single non-numeric first row is treated as a
// header and skipped.  Lines starting with '#' are ignored.
DataMatrix load_csv(const std::string& path);
DataMatrix parse_csv(const std::string& text);

void write_table(const ExperimentTable& table, const std::string& path, TableFormat fmt);
void write_matrix_csv(const DataMatrix& m, const std::string& path);

// One estimator configuration inside an experiment.
struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Standard;
    KernelSpec kernel;
    GraphSpec graph;
    std::string label;
};

// ---- coefficient curves ------------------------------------------------
// Mean estimator values across a noise (or correlation) grid, with the
// squared distance correlation as a reference column.
struct CoeffCurveConfig {
    std::string setting = "sinusoidal";   // "sinusoidal" (lambda grid) or "linear" (rho grid)
    std::vector<double> grid;             // default per setting when empty
    std::size_t n = 2000;
    std::size_t reps = 5;
    std::uint64_t seed = 1;
    std::vector<EstimatorConfig> configs; // default set when empty
    bool with_dcor = true;
};
ExperimentTable run_coeff_curve(const CoeffCurveConfig& cfg);

// ---- null distribution checks -------------------------------------------
// Sorted standardized statistics under an independence setting against
// normal quantiles, with the KS distance and p-value in the metadata.
struct QqNullConfig {
    Setting setting = Setting::NullSettingII;
    std::size_t n = 500;
    std::size_t reps = 500;
    EstimatorKind kind = EstimatorKind::Standard;
    KernelSpec kernel;
    GraphSpec graph;
    std::uint64_t seed = 1;
};
ExperimentTable run_qq_null(const QqNullConfig& cfg);

// ---- rate check ----------------------------------------------------------
// SD of the estimator numerator across a dyadic n grid and the least
// squares slope of log sd against log n with a 95% interval.
struct LogLogConfig {
    struct Entry {
        Setting setting;
        EstimatorKind kind;
        KernelSpec kernel;
        GraphSpec graph;
        std::string label;
    };
    std::vector<Entry> entries;           // default: the four benchmark configs
    std::vector<std::size_t> n_grid = {256, 512, 1024, 2048};
    std::size_t reps = 100;
    std::uint64_t seed = 1;
};
ExperimentTable run_loglog_rate(const LogLogConfig& cfg);
LogLogConfig default_loglog_config();

// ---- power curves ----------------------------------------------------------
struct PowerTestSpec {
    enum class Type { Kmac, Dcor, Hsic } type = Type::Kmac;
    EstimatorKind kind = EstimatorKind::Standard;
    KernelSpec kernel;
    GraphSpec graph;
    std::string label;
};
struct PowerCurveConfig {
    Setting setting = Setting::Sinusoidal;
    std::vector<double> lambdas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::size_t n = 300;
    std::size_t B = 1000;
    std::size_t reps = 200;   // desk-scale default; 1000 at full scale
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::vector<PowerTestSpec> tests;    // default set when empty
};
ExperimentTable run_power_curve(const PowerCurveConfig& cfg);
std::vector<PowerTestSpec> default_power_tests();

}  // namespace kmac
