#pragma once

#include <span>
#include <string>

#include <Eigen/Core>

#include "efs/dataset.hpp"

namespace efs {

// Both categorical encoders emit c-1 binary columns for a c-level feature.
// The first declared level is the all-zero row (it is absorbed by the model
// intercept). Columns are laid out from the highest level down to level 2:
//
//   level | one-hot | ordinal
//   A     | (0,0,0) | (0,0,0)
//   B     | (0,0,1) | (0,0,1)
//   C     | (0,1,0) | (0,1,1)
//   D     | (1,0,0) | (1,1,1)
//
// Throw Error{UnknownLevel} for labels not in meta.levels and
// Error{InvalidArgument} when meta has the wrong kind.
Eigen::MatrixXd encode_onehot(std::span<const std::string> values, const FeatureMeta& meta);
Eigen::MatrixXd encode_ordinal(std::span<const std::string> values, const FeatureMeta& meta);

// Column k of either encoding stands for this level index.
[[nodiscard]] inline std::size_t encoded_column_level(std::size_t k, std::size_t level_count) noexcept
{
    return level_count - 1 - k;
}

// Survival in months bucketed by year: (0,12] -> 1, ..., (48,60] -> 5,
// above 60 -> 6. Censored rows map to 6 and must lie beyond 60 months.
int encode_target(double os_months, bool censored);

} // namespace efs
