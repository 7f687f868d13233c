#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace efs {

enum class Block { p, b, h, i, t };
enum class Kind { numeric, nominal, ordinal };

std::string to_string(Block block);
std::string to_string(Kind kind);
std::optional<Block> parse_block(std::string_view text);
std::optional<Kind> parse_kind(std::string_view text);

struct FeatureMeta {
    std::string name;
    Block block = Block::p;
    Kind kind = Kind::numeric;
    // Declared level labels, in order for ordinal features. Empty for numeric.
    std::vector<std::string> levels;

    [[nodiscard]] bool categorical() const noexcept { return kind != Kind::numeric; }
    [[nodiscard]] std::optional<std::size_t> level_index(std::string_view label) const;

    bool operator==(const FeatureMeta&) const = default;
};

struct Missing {
    bool operator==(const Missing&) const = default;
};

// Index into FeatureMeta::levels.
struct Level {
    std::size_t index = 0;
    bool operator==(const Level&) const = default;
};

using Cell = std::variant<Missing, double, Level>;

[[nodiscard]] inline bool is_missing(const Cell& c) noexcept { return std::holds_alternative<Missing>(c); }

struct Survival {
    double os_months = 0.0;
    bool censored = false;
    bool operator==(const Survival&) const = default;
};

// Raw tabular data: p features over m rows plus the survival target. Treated
// as an immutable value; cleaning steps return new datasets.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<FeatureMeta> features, std::vector<Cell> cells, std::vector<Survival> target);

    [[nodiscard]] std::size_t rows() const noexcept { return target_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return features_.size(); }

    [[nodiscard]] const std::vector<FeatureMeta>& features() const noexcept { return features_; }
    [[nodiscard]] const FeatureMeta& feature(std::size_t j) const { return features_.at(j); }
    [[nodiscard]] std::optional<std::size_t> feature_index(std::string_view name) const;

    [[nodiscard]] const Cell& cell(std::size_t i, std::size_t j) const { return cells_[i * cols() + j]; }
    [[nodiscard]] const std::vector<Cell>& cells() const noexcept { return cells_; }
    [[nodiscard]] const std::vector<Survival>& target() const noexcept { return target_; }

    [[nodiscard]] std::size_t missing_count(std::size_t j) const;

    // Subsets preserving order.
    [[nodiscard]] Dataset select_rows(const std::vector<std::size_t>& rows) const;
    [[nodiscard]] Dataset select_columns(const std::vector<std::size_t>& cols) const;
    // Copy with a replaced cell grid (same shape, same features).
    [[nodiscard]] Dataset with_cells(std::vector<Cell> cells) const;

    std::string target_name = "os_months";
    std::string censor_name = "censored";

    bool operator==(const Dataset&) const = default;

private:
    std::vector<FeatureMeta> features_;
    std::vector<Cell> cells_; // row-major, rows() x cols()
    std::vector<Survival> target_;
};

struct Violation {
    std::optional<std::size_t> row;
    std::optional<std::size_t> column;
    std::string rule;
};

// Empty iff every Dataset invariant holds.
std::vector<Violation> validate(const Dataset& ds);

} // namespace efs
