#include <cmath>
#include <limits>

#include "efs/error.hpp"
#include "efs/models.hpp"

namespace efs {

namespace {

// Unit-norm centered copy; zero vector when the input is constant.
bool normalize(Eigen::Ref<Eigen::VectorXd> v)
{
    v.array() -= v.mean();
    const double norm = v.norm();
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if (!(norm > 1e-12 * scale)) {
        v.setZero();
        return false;
    }
    v /= norm;
    return true;
}

} // namespace

MrmrResult mrmr_select(const MatrixRef& X, const VectorRef& y, std::size_t k)
{
    const auto n = static_cast<std::size_t>(X.cols());
    if (X.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "X and y disagree on the row count");
    if (k > n) fail(ErrorCode::InvalidArgument, "mRMR cannot pick " + std::to_string(k) + " of " + std::to_string(n) + " columns");

    MrmrResult result;
    Eigen::MatrixXd z = X;
    for (std::size_t j = 0; j < n; ++j) {
        if (!normalize(z.col(static_cast<Eigen::Index>(j)))) result.constant_columns.push_back(j);
    }
    Eigen::VectorXd target = y;
    normalize(target);

    const Eigen::VectorXd relevance = (z.transpose() * target).cwiseAbs();
    Eigen::VectorXd redundancy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::vector<bool> taken(n, false);

    result.selected.reserve(k);
    while (result.selected.size() < k) {
        const auto picked = static_cast<double>(result.selected.size());
        std::size_t best = n;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (taken[j]) continue;
            const auto jj = static_cast<Eigen::Index>(j);
            const double score = picked > 0 ? relevance[jj] - redundancy[jj] / picked : relevance[jj];
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        taken[best] = true;
        result.selected.push_back(best);
        redundancy += (z.transpose() * z.col(static_cast<Eigen::Index>(best))).cwiseAbs();
    }
    return result;
}

} // namespace efs
