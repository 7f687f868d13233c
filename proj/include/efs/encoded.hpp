#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efs/dataset.hpp"

namespace efs {

enum class Encoding { numeric, onehot, ordinal };

// Provenance of one encoded column.
struct EncodedColumn {
    std::string source;
    Block block = Block::p;
    Encoding encoding = Encoding::numeric;
    std::optional<std::size_t> level; // index into the source's declared levels
    std::string level_label;

    // "age", "site=colon" (one-hot) or "who_ps>=2" (ordinal).
    [[nodiscard]] std::string name() const;
    bool operator==(const EncodedColumn&) const = default;
};

// Fully numeric design matrix; rows follow `row_ids` (indices into the dataset
// the pipeline was run on).
struct EncodedMatrix {
    Eigen::MatrixXd values;
    std::vector<EncodedColumn> columns;
    std::vector<int> target; // encoded survival levels 1..6
    std::vector<std::size_t> row_ids;

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
    [[nodiscard]] Eigen::VectorXd y() const;
    [[nodiscard]] std::vector<std::string> column_names() const;
    [[nodiscard]] EncodedMatrix select_rows(const std::vector<std::size_t>& rows) const;
};

} // namespace efs
