#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efs/models.hpp"

namespace efs {

// Throws LengthMismatch on unequal or empty inputs.
double rmse(const VectorRef& y, const VectorRef& y_hat);

struct Stability {
    double value = 0.0; // clamped to [0, 1]
    double raw = 0.0;
    bool degenerate = false; // mean set size 0 or n; value is then 0
};

// Nogueira's estimator over index sets drawn from n features, with the
// unbiased per-feature variance. Needs at least two sets.
Stability stability(const std::vector<std::vector<std::size_t>>& sets, std::size_t n);

struct Redundancy {
    double value = 0.0;
    std::size_t skipped_pairs = 0; // pairs involving a constant column
};

// Mean |Pearson correlation| over unordered pairs of S; 0 for |S| = 1.
Redundancy redundancy_rate(const MatrixRef& X, const std::vector<std::size_t>& S);

// |S ∩ elevated| / |S|. Throws EmptySelection.
double perc(const std::vector<std::size_t>& S, const std::vector<std::size_t>& elevated);

enum class Sign { always_pos, mostly_pos, even, mostly_neg, always_neg, never_selected };

// "++", "+", "", "-", "--" and "" for never_selected.
std::string to_string(Sign s);

// One entry per fold; nullopt where the feature was not selected. Zero
// coefficients count as neither sign.
Sign sign_summary(const std::vector<std::optional<double>>& coefficients);

} // namespace efs
