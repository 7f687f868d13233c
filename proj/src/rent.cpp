#include "efs/rent.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "efs/dataset_io.hpp"
#include "efs/error.hpp"
#include "efs/parallel.hpp"
#include "efs/random.hpp"

namespace efs {

void RentConfig::check() const
{
    if (models == 0) fail(ErrorCode::InvalidConfig, "RENT needs at least one elementary model");
    if (!(split_ratio > 0.0 && split_ratio <= 1.0)) fail(ErrorCode::InvalidConfig, "RENT split ratio must lie in (0, 1]");
    if (!(tau1 >= 0.0 && tau1 <= 1.0)) fail(ErrorCode::InvalidConfig, "tau1 must lie in [0, 1]");
    if (!(tau2 >= 0.0 && tau2 <= 1.0)) fail(ErrorCode::InvalidConfig, "tau2 must lie in [0, 1]");
    if (tau3 && !(*tau3 > 0.5 && *tau3 < 1.0)) fail(ErrorCode::InvalidConfig, "tau3 must lie in (0.5, 1)");
    net.check();
}

namespace {

// Critical |t| for the third criterion; 0 when it is switched off and
// +inf when it cannot pass (fewer than 2 models).
double critical_t(std::size_t models, std::optional<double> tau3)
{
    if (!tau3) return 0.0;
    if (models < 2) return std::numeric_limits<double>::infinity();
    const boost::math::students_t dist(static_cast<double>(models - 1));
    return boost::math::quantile(dist, *tau3);
}

bool passes_t_test(double t, double critical)
{
    if (critical == 0.0) return true;
    return !std::isnan(t) && std::abs(t) >= critical;
}

} // namespace

RentDiagnostics rent_diagnostics(Eigen::MatrixXd weights, std::optional<double> tau3)
{
    RentDiagnostics diag;
    const auto models = static_cast<std::size_t>(weights.rows());
    const auto n = static_cast<std::size_t>(weights.cols());
    if (models == 0) fail(ErrorCode::InvalidArgument, "RENT diagnostics need at least one model");
    const auto M = static_cast<double>(models);
    const double critical = critical_t(models, tau3);
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = weights.col(static_cast<Eigen::Index>(j));
        double nonzero = 0.0;
        double signs = 0.0;
        for (Eigen::Index t = 0; t < col.size(); ++t) {
            if (std::abs(col[t]) > kNonzeroWeight) {
                nonzero += 1.0;
                signs += col[t] > 0.0 ? 1.0 : -1.0;
            }
        }
        diag.c1.push_back(nonzero / M);
        diag.c2.push_back(std::abs(signs / M));

        const double mean = col.mean();
        double t = std::numeric_limits<double>::quiet_NaN();
        if (models >= 2) {
            const double sd = std::sqrt((col.array() - mean).square().sum() / (M - 1.0));
            if (sd > 0.0) {
                t = mean / (sd / std::sqrt(M));
            } else {
                t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
            }
        }
        diag.t_statistic.push_back(t);
        diag.c3_pass.push_back(passes_t_test(t, critical));
    }
    diag.weights = std::move(weights);
    return diag;
}

RentDiagnostics rent_train(const MatrixRef& X, const VectorRef& y, const RentConfig& config)
{
    config.check();
    const auto m = static_cast<std::size_t>(X.rows());
    if (m < 8) fail(ErrorCode::InvalidArgument, "RENT needs at least 8 rows, got " + std::to_string(m));
    if (y.size() != X.rows()) fail(ErrorCode::DimensionMismatch, "X and y disagree on the row count");

    const auto size = subsample_size(m, config.split_ratio);
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(config.models), X.cols());
    std::vector<char> converged(config.models, 0);

    parallel_for(config.models, config.jobs, [&](std::size_t t) {
        auto rng = make_rng(config.seed, t);
        const auto rows = subsample(m, size, rng);
        Eigen::MatrixXd xs(static_cast<Eigen::Index>(size), X.cols());
        Eigen::VectorXd ys(static_cast<Eigen::Index>(size));
        for (std::size_t r = 0; r < size; ++r) {
            xs.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
            ys[static_cast<Eigen::Index>(r)] = y[static_cast<Eigen::Index>(rows[r])];
        }
        const auto fit = fit_elastic_net(xs, ys, config.net);
        weights.row(static_cast<Eigen::Index>(t)) = fit.model.coefficients.transpose();
        converged[t] = fit.converged ? 1 : 0;
    });

    std::size_t kept = 0;
    for (auto c : converged) kept += c != 0 ? 1 : 0;
    if (kept == 0) fail(ErrorCode::InvalidArgument, "no RENT elementary model converged");
    Eigen::MatrixXd retained(static_cast<Eigen::Index>(kept), X.cols());
    Eigen::Index r = 0;
    for (std::size_t t = 0; t < config.models; ++t) {
        if (converged[t] != 0) retained.row(r++) = weights.row(static_cast<Eigen::Index>(t));
    }
    auto diag = rent_diagnostics(std::move(retained), config.tau3);
    diag.skipped_models = config.models - kept;
    return diag;
}

std::vector<std::size_t> rent_select(const RentDiagnostics& diag, const RentConfig& config)
{
    config.check();
    std::vector<std::size_t> out;
    const double critical = critical_t(diag.models(), config.tau3);
    for (std::size_t j = 0; j < diag.features(); ++j) {
        if (diag.c1[j] > 0.0 && diag.c1[j] >= config.tau1 && diag.c2[j] >= config.tau2 &&
            passes_t_test(diag.t_statistic[j], critical)) {
            out.push_back(j);
        }
    }
    return out;
}

std::vector<std::size_t> rent_select(const RentDiagnostics& diag, double tau1, double tau2)
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < diag.features(); ++j) {
        if (diag.c1[j] > 0.0 && diag.c1[j] >= tau1 && diag.c2[j] >= tau2 && diag.c3_pass[j]) out.push_back(j);
    }
    return out;
}

CappedSelection cap_selection(std::vector<std::size_t> features, std::size_t max_s)
{
    if (max_s == 0) fail(ErrorCode::InvalidConfig, "max_s must be at least 1");
    CappedSelection out;
    out.feasible = features.size() <= max_s;
    out.features = std::move(features);
    return out;
}

CappedSelection rent_select_capped(const MatrixRef& X, const VectorRef& y, const RentConfig& config, std::size_t max_s)
{
    if (max_s == 0) fail(ErrorCode::InvalidConfig, "max_s must be at least 1");
    return cap_selection(rent_select(rent_train(X, y, config), config), max_s);
}

void write_rent_diagnostics(const std::filesystem::path& path, const RentDiagnostics& diag,
                            const std::vector<std::string>& names, const std::vector<std::size_t>& selected)
{
    if (names.size() != diag.features()) fail(ErrorCode::DimensionMismatch, "one name per feature required");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
    std::vector<bool> chosen(diag.features(), false);
    for (auto j : selected) chosen.at(j) = true;
    csv::write_row(out, {"feature", "c1", "c2", "t_statistic", "selected"});
    for (std::size_t j = 0; j < diag.features(); ++j) {
        csv::write_row(out, {names[j], format_double(diag.c1[j]), format_double(diag.c2[j]),
                             format_double(diag.t_statistic[j]), chosen[j] ? "1" : "0"});
    }
}

} // namespace efs
