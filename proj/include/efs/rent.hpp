#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efs/models.hpp"

namespace efs {

// Repeated elastic net: `models` elastic-net fits on seeded row subsamples,
// aggregated per feature by three criteria.
struct RentConfig {
    std::size_t models = 100;
    double split_ratio = 0.75;
    ElasticNetConfig net{.C = 1.0, .l1_ratio = 0.3, .tolerance = 1e-5};
    double tau1 = 0.3; // minimum nonzero frequency
    double tau2 = 0.3; // minimum sign stability
    // Quantile level of the one-sample t-test on the mean weight; nullopt
    // switches the third criterion off.
    std::optional<double> tau3 = 0.975;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    void check() const;
};

// |beta| above this counts as a nonzero weight.
inline constexpr double kNonzeroWeight = 1e-8;

struct RentDiagnostics {
    Eigen::MatrixXd weights; // one row per retained elementary model
    std::vector<double> c1;  // nonzero frequency
    std::vector<double> c2;  // |mean sign|
    std::vector<double> t_statistic;
    std::vector<bool> c3_pass;
    std::size_t skipped_models = 0; // fits that did not converge

    [[nodiscard]] std::size_t models() const noexcept { return static_cast<std::size_t>(weights.rows()); }
    [[nodiscard]] std::size_t features() const noexcept { return c1.size(); }
};

// Criteria from a weight table (rows = models). c3 uses a two-sided test at
// quantile level tau3 with models-1 degrees of freedom.
RentDiagnostics rent_diagnostics(Eigen::MatrixXd weights, std::optional<double> tau3);

// Row subsample t is drawn from make_rng(seed, t), so results do not depend
// on `jobs`. Requires at least 8 rows.
RentDiagnostics rent_train(const MatrixRef& X, const VectorRef& y, const RentConfig& config);

// {j : c1 > 0, c1 >= tau1, c2 >= tau2, c3 passes}, ascending.
std::vector<std::size_t> rent_select(const RentDiagnostics& diag, const RentConfig& config);

// Same rule with the c3 outcome stored in `diag`.
std::vector<std::size_t> rent_select(const RentDiagnostics& diag, double tau1, double tau2);

struct CappedSelection {
    std::vector<std::size_t> features;
    bool feasible = true; // |features| <= max_s
};

CappedSelection rent_select_capped(const MatrixRef& X, const VectorRef& y, const RentConfig& config, std::size_t max_s);
CappedSelection cap_selection(std::vector<std::size_t> features, std::size_t max_s);

// feature,c1,c2,t_statistic,selected
void write_rent_diagnostics(const std::filesystem::path& path, const RentDiagnostics& diag,
                            const std::vector<std::string>& names, const std::vector<std::size_t>& selected);

} // namespace efs
