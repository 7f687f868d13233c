#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efs/dataset.hpp"
#include "efs/metrics.hpp"
#include "efs/preprocess.hpp"
#include "efs/rent.hpp"

namespace efs {

struct FoldPlan {
    std::size_t K = 5;
    std::vector<std::size_t> assignment; // fold id per row
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<std::size_t> rows_in(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> rows_not_in(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> sizes() const;
};

// Seeded shuffle, then contiguous chunks; the first m % K folds get one
// extra row.
FoldPlan make_folds(std::size_t m, std::size_t K, std::uint64_t seed);

struct GridSpec {
    std::vector<double> C{1.0, 10.0, 100.0, 1000.0};
    std::vector<double> l1_ratio = steps(10);
    std::vector<double> tau1 = steps(20);
    std::vector<double> tau2 = steps(20);
    std::optional<double> tau3 = 0.975;

    // {0, 1/n, ..., 1}
    static std::vector<double> steps(int n);
    [[nodiscard]] std::size_t size() const noexcept { return C.size() * l1_ratio.size() * tau1.size() * tau2.size(); }
    void check() const;
};

struct HarnessConfig {
    PreprocessConfig preprocess;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::size_t models = 100;
    double split_ratio = 0.75;
    std::size_t knn_k = 5;
    GridSpec grid;
    std::vector<std::size_t> max_s_values{20};
    std::vector<double> w_values{0.1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110};
    std::size_t exp2_max_s = 20;
    std::set<std::string> elevated; // source or encoded column names
    double outlier_threshold = 2.5;
    bool audit_leakage = false;
    std::size_t jobs = 1;

    void check() const;
};

struct ResidualReport {
    Eigen::VectorXd residuals; // true - predicted
    std::vector<std::size_t> outliers;
};

ResidualReport residual_report(const VectorRef& y, const VectorRef& y_hat, double threshold = 2.5);

struct FoldContext {
    std::size_t fold = 0;
    PipelineResult pipe;
    std::vector<std::size_t> inner_fold; // per training row, 0..K-2
    std::uint64_t train_fingerprint = 0; // hash of everything the selectors see
};

struct Prepared {
    Dataset data; // after the row filter
    std::vector<std::size_t> dropped_rows; // indices into the input dataset
    FoldPlan plan;
    std::vector<FoldContext> folds;
    std::vector<std::string> universe; // encoded column names over all folds
    bool leakage_audited = false;
    std::vector<std::string> leakage_violations;
};

// Row filter on the full data (a per-row rule), fold plan, then the fitted
// pipeline on each outer training split. With audit_leakage every fold is
// rerun with perturbed and with deleted test rows and compared.
Prepared prepare(const Dataset& ds, const HarnessConfig& config);

struct PrestudyChoice {
    std::size_t fold = 0;
    std::size_t max_s = 0;
    double C = 1.0;
    double l1_ratio = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    std::optional<double> tau3;
    double inner_rmse = 0.0;
    double mean_size = 0.0;
    std::size_t max_size = 0;
    bool relaxed = false; // no grid point met max_s
};

struct PrestudyResult {
    std::vector<PrestudyChoice> choices; // fold-major, then max_s order
    [[nodiscard]] const PrestudyChoice& at(std::size_t fold, std::size_t max_s) const;
};

// Inner CV over the other outer folds of each training split. A grid point
// is feasible when no inner selection exceeds max_s; the feasible point
// with the lowest mean inner OLS RMSE wins, ties to the smaller mean size,
// then grid order (C, l1, tau1, tau2).
PrestudyResult prestudy_grid_search(const Prepared& prep, const HarnessConfig& config,
                                    const std::vector<std::size_t>& max_s_values);

struct FoldOutcome {
    std::vector<std::size_t> selected; // columns of the fold's matrices
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;      // OLS, aligned with `selected`
    std::vector<std::size_t> test_rows; // indices into Prepared::data
    Eigen::VectorXd y;
    Eigen::VectorXd linear;
    Eigen::VectorXd knn;
    double rmse_linear = 0.0;
    double rmse_knn = 0.0;
    std::optional<double> red;
    std::optional<double> perc;
    bool relaxed = false;
    std::size_t skipped_models = 0;
};

struct SettingReport {
    std::string selector;  // "rent" or "ubayfs"
    std::string parameter; // "max_s" or "w"
    double value = 0.0;
    std::vector<FoldOutcome> folds;
    Stability stability;
    std::optional<double> red;
    std::optional<double> perc;

    [[nodiscard]] std::string label() const;
};

struct ExperimentReport {
    std::string name;
    std::vector<std::string> universe;
    std::vector<SettingReport> settings;
    std::optional<PrestudyResult> prestudy;
    std::size_t rows = 0;
    std::vector<std::size_t> dropped_rows;
    std::vector<std::size_t> fold_sizes;
    std::vector<std::size_t> encoded_columns; // per fold
    bool leakage_audited = false;
    std::vector<std::string> leakage_violations;
    double outlier_threshold = 2.5;
};

// Stability, RED and PERC of a setting from its per-fold outcomes.
void summarize(SettingReport& setting, const std::vector<std::string>& universe);

ExperimentReport run_prestudy(const Prepared& prep, const HarnessConfig& config);
// For every max_s: RENT with the prestudy configuration and UBayFS with
// uniform prior weights, each followed by OLS and kNN on the selection.
ExperimentReport run_experiment1(const Prepared& prep, const HarnessConfig& config);
// UBayFS at exp2_max_s for every prior weight in w_values.
ExperimentReport run_experiment2(const Prepared& prep, const HarnessConfig& config);

// selection_frequencies.csv, metrics.csv, residuals.csv, selections.csv,
// curves.csv, summary.yaml and, when present, prestudy.csv.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

// Same shape as the selection frequency cells: "5(--)", "2", "0".
std::string frequency_cell(std::size_t count, Sign sign);

} // namespace efs
