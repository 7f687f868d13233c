#include <cmath>

#include <Eigen/QR>

#include "efs/error.hpp"
#include "efs/models.hpp"

namespace efs {

Eigen::VectorXd predict(const LinearModel& model, const MatrixRef& X)
{
    if (X.cols() != model.coefficients.size()) {
        fail(ErrorCode::DimensionMismatch, "model has " + std::to_string(model.coefficients.size()) +
                                               " coefficients, matrix has " + std::to_string(X.cols()) + " columns");
    }
    Eigen::VectorXd out = X * model.coefficients;
    out.array() += model.intercept;
    return out;
}

OlsFit fit_ols(const MatrixRef& X, const VectorRef& y)
{
    if (X.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "X and y disagree on the row count");
    if (X.rows() == 0) fail(ErrorCode::EmptyTrainingSet, "OLS needs at least one row");

    OlsFit fit;
    const double y_mean = y.mean();
    if (X.cols() == 0) {
        fit.model.intercept = y_mean;
        fit.model.coefficients = Eigen::VectorXd(0);
        return fit;
    }
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(centered);
    fit.model.coefficients = cod.solve(yc);
    fit.model.intercept = y_mean - x_mean.dot(fit.model.coefficients);
    fit.rank = cod.rank();
    fit.rank_deficient = fit.rank < X.cols();
    return fit;
}

} // namespace efs
