#include "efs/dataset.hpp"

#include <cmath>
#include <set>

#include "efs/error.hpp"

namespace efs {

std::string to_string(Block block)
{
    switch (block) {
    case Block::p: return "p";
    case Block::b: return "b";
    case Block::h: return "h";
    case Block::i: return "i";
    case Block::t: return "t";
    }
    return "?";
}

std::string to_string(Kind kind)
{
    switch (kind) {
    case Kind::numeric: return "numeric";
    case Kind::nominal: return "nominal";
    case Kind::ordinal: return "ordinal";
    }
    return "?";
}

std::optional<Block> parse_block(std::string_view text)
{
    if (text == "p") return Block::p;
    if (text == "b") return Block::b;
    if (text == "h") return Block::h;
    if (text == "i") return Block::i;
    if (text == "t") return Block::t;
    return std::nullopt;
}

std::optional<Kind> parse_kind(std::string_view text)
{
    if (text == "numeric") return Kind::numeric;
    if (text == "nominal") return Kind::nominal;
    if (text == "ordinal") return Kind::ordinal;
    return std::nullopt;
}

std::optional<std::size_t> FeatureMeta::level_index(std::string_view label) const
{
    for (std::size_t l = 0; l < levels.size(); ++l) {
        if (levels[l] == label) return l;
    }
    return std::nullopt;
}

Dataset::Dataset(std::vector<FeatureMeta> features, std::vector<Cell> cells, std::vector<Survival> target)
    : features_(std::move(features))
    , cells_(std::move(cells))
    , target_(std::move(target))
{
    if (cells_.size() != target_.size() * features_.size()) {
        fail(ErrorCode::DimensionMismatch,
             "cell grid has " + std::to_string(cells_.size()) + " cells, expected " +
                 std::to_string(target_.size()) + " x " + std::to_string(features_.size()));
    }
}

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const
{
    for (std::size_t j = 0; j < features_.size(); ++j) {
        if (features_[j].name == name) return j;
    }
    return std::nullopt;
}

std::size_t Dataset::missing_count(std::size_t j) const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < rows(); ++i) {
        n += is_missing(cell(i, j)) ? 1 : 0;
    }
    return n;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const
{
    std::vector<Cell> cells;
    cells.reserve(rows.size() * cols());
    std::vector<Survival> target;
    target.reserve(rows.size());
    for (auto i : rows) {
        for (std::size_t j = 0; j < cols(); ++j) cells.push_back(cell(i, j));
        target.push_back(target_.at(i));
    }
    Dataset out(features_, std::move(cells), std::move(target));
    out.target_name = target_name;
    out.censor_name = censor_name;
    return out;
}

Dataset Dataset::select_columns(const std::vector<std::size_t>& columns) const
{
    std::vector<FeatureMeta> features;
    features.reserve(columns.size());
    for (auto j : columns) features.push_back(features_.at(j));
    std::vector<Cell> cells;
    cells.reserve(rows() * columns.size());
    for (std::size_t i = 0; i < rows(); ++i) {
        for (auto j : columns) cells.push_back(cell(i, j));
    }
    Dataset out(std::move(features), std::move(cells), target_);
    out.target_name = target_name;
    out.censor_name = censor_name;
    return out;
}

Dataset Dataset::with_cells(std::vector<Cell> cells) const
{
    Dataset out(features_, std::move(cells), target_);
    out.target_name = target_name;
    out.censor_name = censor_name;
    return out;
}

std::vector<Violation> validate(const Dataset& ds)
{
    std::vector<Violation> out;
    if (ds.rows() == 0) out.push_back({std::nullopt, std::nullopt, "dataset has no rows"});

    std::set<std::string> names;
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        const auto& f = ds.feature(j);
        if (!names.insert(f.name).second) {
            out.push_back({std::nullopt, j, "duplicate feature name '" + f.name + "'"});
        }
        if (f.categorical() && f.levels.size() < 2) {
            out.push_back({std::nullopt, j, to_string(f.kind) + " feature '" + f.name + "' declares fewer than 2 levels"});
        }
        if (!f.categorical() && !f.levels.empty()) {
            out.push_back({std::nullopt, j, "numeric feature '" + f.name + "' declares levels"});
        }
        std::set<std::string> labels(f.levels.begin(), f.levels.end());
        if (labels.size() != f.levels.size()) {
            out.push_back({std::nullopt, j, "feature '" + f.name + "' repeats a level label"});
        }
    }

    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            const auto& f = ds.feature(j);
            const auto& c = ds.cell(i, j);
            if (is_missing(c)) continue;
            if (f.categorical()) {
                const auto* level = std::get_if<Level>(&c);
                if (level == nullptr) {
                    out.push_back({i, j, "numeric value in categorical feature '" + f.name + "'"});
                } else if (level->index >= f.levels.size()) {
                    out.push_back({i, j, "undeclared level in feature '" + f.name + "'"});
                }
            } else {
                const auto* v = std::get_if<double>(&c);
                if (v == nullptr) {
                    out.push_back({i, j, "level label in numeric feature '" + f.name + "'"});
                } else if (!std::isfinite(*v)) {
                    out.push_back({i, j, "non-finite value in feature '" + f.name + "'"});
                }
            }
        }
        const auto& t = ds.target()[i];
        if (!(t.os_months >= 0.0) || !std::isfinite(t.os_months)) {
            out.push_back({i, std::nullopt, "target os_months must be finite and non-negative"});
        }
    }
    return out;
}

} // namespace efs
