#include <algorithm>
#include <utility>
#include <vector>

#include "efs/error.hpp"
#include "efs/models.hpp"

namespace efs {

Eigen::VectorXd knn_regress(const MatrixRef& X_train, const VectorRef& y_train, const MatrixRef& X_query, std::size_t k)
{
    const auto m = static_cast<std::size_t>(X_train.rows());
    if (m == 0) fail(ErrorCode::EmptyTrainingSet, "kNN regression needs training rows");
    if (static_cast<std::size_t>(y_train.size()) != m) fail(ErrorCode::DimensionMismatch, "X_train and y_train disagree");
    if (X_query.cols() != X_train.cols()) fail(ErrorCode::DimensionMismatch, "query and training columns disagree");
    if (k == 0 || k > m) fail(ErrorCode::InvalidArgument, "kNN needs 1 <= k <= training rows");

    Eigen::VectorXd out(X_query.rows());
    std::vector<std::pair<double, std::size_t>> order(m);
    for (Eigen::Index q = 0; q < X_query.rows(); ++q) {
        for (std::size_t l = 0; l < m; ++l) {
            order[l] = {(X_train.row(static_cast<Eigen::Index>(l)) - X_query.row(q)).squaredNorm(), l};
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
        double sum = 0.0;
        for (std::size_t r = 0; r < k; ++r) sum += y_train[static_cast<Eigen::Index>(order[r].second)];
        out[q] = sum / static_cast<double>(k);
    }
    return out;
}

} // namespace efs
