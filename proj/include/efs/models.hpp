#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace efs {

using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

// y_hat = intercept + X * coefficients.
struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
};

// Throws Error{DimensionMismatch} when X has the wrong column count.
Eigen::VectorXd predict(const LinearModel& model, const MatrixRef& X);

struct OlsFit {
    LinearModel model;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

// Least squares with an unpenalized intercept. Rank-deficient designs get the
// minimum-norm coefficient vector (intercept excluded from the norm) and the
// rank_deficient flag.
OlsFit fit_ols(const MatrixRef& X, const VectorRef& y);

struct ElasticNetConfig {
    double C = 1.0;        // inverse regularization strength, lambda = 1/C
    double l1_ratio = 0.5; // share of the penalty on the L1 norm
    double tolerance = 1e-7;
    std::size_t max_sweeps = 100000;
    bool record_objective = false;

    [[nodiscard]] double lambda() const noexcept { return 1.0 / C; }
    void check() const;
};

struct ElasticNetFit {
    LinearModel model;
    bool converged = false;
    std::size_t sweeps = 0;
    std::vector<double> objective; // after every sweep, when requested
};

//   (1/(2m)) ||y - b0 - X b||^2 + lambda * (l1 ||b||_1 + (1 - l1)/2 ||b||^2)
//
// minimized by cyclic coordinate descent (column order) with active-set
// passes; the intercept b0 is unpenalized. Converged once a full sweep moves
// no coefficient by more than `tolerance`. On hitting max_sweeps the last
// iterate is returned with converged = false.
ElasticNetFit fit_elastic_net(const MatrixRef& X, const VectorRef& y, const ElasticNetConfig& config);

double elastic_net_objective(const MatrixRef& X, const VectorRef& y, const LinearModel& model, const ElasticNetConfig& config);

// Mean target of the k nearest training rows (Euclidean; ties to the lower
// row index). A query equal to a training row counts that row at distance 0.
Eigen::VectorXd knn_regress(const MatrixRef& X_train, const VectorRef& y_train, const MatrixRef& X_query, std::size_t k);

struct MrmrResult {
    std::vector<std::size_t> selected; // in pick order
    std::vector<std::size_t> constant_columns;
};

// Greedy minimum-redundancy maximum-relevance with absolute Pearson
// correlations and the difference criterion: the next pick maximizes
// |corr(x_j, y)| - mean_{s in S} |corr(x_j, x_s)|, ties to the lower index.
// Constant columns have relevance and redundancy 0 and are reported.
MrmrResult mrmr_select(const MatrixRef& X, const VectorRef& y, std::size_t k);

} // namespace efs
