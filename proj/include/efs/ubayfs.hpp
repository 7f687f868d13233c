#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efs/encoded.hpp"
#include "efs/models.hpp"

namespace efs {

inline constexpr double kDefaultPriorWeight = 0.1;

struct UBayConfig {
    std::size_t models = 100;
    double split_ratio = 0.75;
    std::size_t max_s = 20;
    // One weight per encoded column; empty means uniform kDefaultPriorWeight.
    std::vector<double> prior_weights;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    void check() const;
    [[nodiscard]] std::vector<double> weights(std::size_t n) const;
};

struct UBayPosterior {
    std::vector<std::size_t> counts; // elementary selections per feature
    std::vector<double> weights;
    std::vector<double> scores;      // weights + counts
    std::size_t models = 0;

    [[nodiscard]] std::size_t features() const noexcept { return counts.size(); }
};

// Every elementary model runs mRMR with k = max_s on a seeded row subsample
// (stream t of the seed); counts do not depend on the prior weights.
std::vector<std::size_t> ubay_counts(const MatrixRef& X, const VectorRef& y, const UBayConfig& config);

// Combines fixed counts with the configured weights.
UBayPosterior ubay_posterior(std::vector<std::size_t> counts, std::size_t models, const UBayConfig& config);

// Requires at least 8 rows.
UBayPosterior ubay_train(const MatrixRef& X, const VectorRef& y, const UBayConfig& config);

// The max_s highest scores; ties go to the higher count, then the lower
// index. Returned ascending.
std::vector<std::size_t> ubay_select(const UBayPosterior& post, const UBayConfig& config);

// Weight w for every encoded column named in `elevated` or descending from a
// source feature named there, kDefaultPriorWeight elsewhere. Throws
// UnknownFeatureName.
UBayConfig set_prior_weights(UBayConfig config, const std::vector<EncodedColumn>& columns,
                             const std::set<std::string>& elevated, double w);

// Encoded column indices matched by `elevated` under the same rule.
std::vector<std::size_t> elevated_columns(const std::vector<EncodedColumn>& columns, const std::set<std::string>& elevated);

// feature,count,prior_weight,score,selected
void write_posterior(const std::filesystem::path& path, const UBayPosterior& post, const std::vector<std::string>& names,
                     const std::vector<std::size_t>& selected);

} // namespace efs
