#pragma once

#include <span>
#include <string>
#include <vector>

#include "efs/dataset.hpp"
#include "efs/encoded.hpp"
#include "efs/yeo_johnson.hpp"

namespace efs {

struct PreprocessConfig {
    // Columns with a missing fraction strictly above this are dropped.
    double column_missing_threshold = 0.25;
    // Rows missing more than this fraction of any single block are dropped.
    double block_row_threshold = 0.5;
    // Odd neighbourhood size for imputation.
    std::size_t knn_k = 5;

    void check() const;
};

struct DroppedColumn {
    std::string name;
    std::string reason; // "missing", "constant" or "duplicate of <name>"
};

struct ColumnAudit {
    std::vector<std::size_t> keep;
    std::vector<DroppedColumn> dropped;
};

// Decides which columns survive cleaning, looking only at `rows`.
ColumnAudit audit_columns(const Dataset& ds, double threshold, std::span<const std::size_t> rows);

// Drops columns with more than `threshold` missing, constant columns and
// duplicated columns (the first copy is kept). Throws AllColumnsDropped.
Dataset drop_columns_by_missingness(const Dataset& ds, double threshold = 0.25);

// Row indices whose missing fraction within every block is <= block_threshold.
std::vector<std::size_t> rows_to_keep(const Dataset& ds, double block_threshold);

// Throws AllRowsDropped.
Dataset drop_rows_by_missingness(const Dataset& ds, double block_threshold = 0.5);

struct ImputedCell {
    std::size_t row = 0;
    std::size_t column = 0;
    std::vector<std::size_t> donors; // empty when the column-median fallback was used
    Cell value;
};

struct Imputation {
    Dataset data;
    std::vector<ImputedCell> cells;
    std::vector<std::string> warnings;
};

// Fills every missing cell from the k nearest donor rows that observe the
// feature. Distances are Euclidean over the columns complete among donors:
// numeric columns standardized on the donors, ordinal columns as integer
// level codes, nominal columns as a 0/1 mismatch. Ties go to the lower row
// index; a row is never its own donor. Numeric and ordinal features take the
// median (the lower middle value for an even count of ordinal codes),
// nominal features the most frequent level (lowest level on ties).
Imputation knn_impute_from(const Dataset& ds, std::span<const std::size_t> donor_rows, std::size_t k);

// Every row is a donor.
Dataset knn_impute(const Dataset& ds, std::size_t k = 5);

struct PipelineResult {
    EncodedMatrix train;
    EncodedMatrix test;
    TransformParams params;
    Imputation imputation;
    std::vector<DroppedColumn> dropped_columns;
    std::vector<std::size_t> dropped_rows;
};

// Drop columns -> drop rows -> impute -> encode -> transform. Every fitted
// quantity (column audit, donors, lambda, mean, stdev) comes from
// `train_rows` only; the remaining rows form the test matrix.
PipelineResult run_pipeline(const Dataset& ds, std::span<const std::size_t> train_rows, const PreprocessConfig& config = {});

// Encodes complete rows of `ds` with already fitted transforms. Categorical
// columns follow the declared levels; numeric columns must have a transform.
EncodedMatrix encode_rows(const Dataset& ds, std::span<const std::size_t> rows, const TransformParams& params);

} // namespace efs
