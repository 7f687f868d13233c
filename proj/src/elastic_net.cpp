#include <algorithm>
#include <cmath>

#include "efs/error.hpp"
#include "efs/models.hpp"

namespace efs {

void ElasticNetConfig::check() const
{
    if (!(C > 0.0) || !std::isfinite(C)) fail(ErrorCode::InvalidConfig, "elastic net C must be positive and finite");
    if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) fail(ErrorCode::InvalidConfig, "elastic net l1 ratio must lie in [0, 1]");
    if (!(tolerance > 0.0)) fail(ErrorCode::InvalidConfig, "elastic net tolerance must be positive");
    if (max_sweeps == 0) fail(ErrorCode::InvalidConfig, "elastic net needs at least one sweep");
}

namespace {

double soft_threshold(double z, double gamma)
{
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

} // namespace

double elastic_net_objective(const MatrixRef& X, const VectorRef& y, const LinearModel& model, const ElasticNetConfig& config)
{
    const auto m = static_cast<double>(X.rows());
    const Eigen::VectorXd r = y - predict(model, X);
    const double lambda = config.lambda();
    const auto& b = model.coefficients;
    return r.squaredNorm() / (2.0 * m) +
           lambda * (config.l1_ratio * b.lpNorm<1>() + 0.5 * (1.0 - config.l1_ratio) * b.squaredNorm());
}

ElasticNetFit fit_elastic_net(const MatrixRef& X, const VectorRef& y, const ElasticNetConfig& config)
{
    config.check();
    if (X.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "X and y disagree on the row count");
    if (X.rows() == 0) fail(ErrorCode::EmptyTrainingSet, "elastic net needs at least one row");

    const Eigen::Index n = X.cols();
    const auto m = static_cast<double>(X.rows());
    const double l1_penalty = config.lambda() * config.l1_ratio;
    const double l2_penalty = config.lambda() * (1.0 - config.l1_ratio);

    // With an unpenalized intercept the problem reduces to centered data.
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd xc = X.rowwise() - x_mean;
    Eigen::VectorXd residual = y.array() - y_mean;
    Eigen::VectorXd scale(n);
    for (Eigen::Index j = 0; j < n; ++j) scale[j] = xc.col(j).squaredNorm() / m;

    ElasticNetFit fit;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);

    auto objective = [&] {
        return residual.squaredNorm() / (2.0 * m) + l1_penalty * beta.lpNorm<1>() + 0.5 * l2_penalty * beta.squaredNorm();
    };
    auto update = [&](Eigen::Index j) {
        if (scale[j] == 0.0) return 0.0;
        const double old = beta[j];
        const double z = xc.col(j).dot(residual) / m + scale[j] * old;
        const double next = soft_threshold(z, l1_penalty) / (scale[j] + l2_penalty);
        const double delta = next - old;
        if (delta != 0.0) {
            residual.noalias() -= delta * xc.col(j);
            beta[j] = next;
        }
        return std::abs(delta);
    };
    auto sweep = [&](bool active_only) {
        double largest = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (active_only && beta[j] == 0.0) continue;
            largest = std::max(largest, update(j));
        }
        ++fit.sweeps;
        if (config.record_objective) fit.objective.push_back(objective());
        return largest;
    };

    while (fit.sweeps < config.max_sweeps) {
        if (sweep(false) < config.tolerance) {
            fit.converged = true;
            break;
        }
        while (fit.sweeps < config.max_sweeps && sweep(true) >= config.tolerance) {
        }
    }

    fit.model.coefficients = std::move(beta);
    fit.model.intercept = y_mean - x_mean.dot(fit.model.coefficients);
    return fit;
}

} // namespace efs
