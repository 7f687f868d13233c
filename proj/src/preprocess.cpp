#include "efs/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "efs/encoding.hpp"
#include "efs/error.hpp"

namespace efs {

void PreprocessConfig::check() const
{
    if (!(column_missing_threshold > 0.0 && column_missing_threshold <= 1.0)) {
        fail(ErrorCode::InvalidConfig, "column missing threshold must lie in (0, 1]");
    }
    if (!(block_row_threshold > 0.0 && block_row_threshold <= 1.0)) {
        fail(ErrorCode::InvalidConfig, "block row threshold must lie in (0, 1]");
    }
    if (knn_k == 0 || knn_k % 2 == 0) fail(ErrorCode::InvalidConfig, "imputation k must be odd and positive");
}

ColumnAudit audit_columns(const Dataset& ds, double threshold, std::span<const std::size_t> rows)
{
    if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0, 1]");
    if (rows.empty()) fail(ErrorCode::EmptyTrainingSet, "column audit needs at least one row");

    ColumnAudit audit;
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        const auto& f = ds.feature(j);
        std::size_t missing = 0;
        std::set<double> numbers;
        std::set<std::size_t> levels;
        for (auto i : rows) {
            const auto& c = ds.cell(i, j);
            if (is_missing(c)) {
                ++missing;
            } else if (const auto* v = std::get_if<double>(&c)) {
                numbers.insert(*v);
            } else {
                levels.insert(std::get<Level>(c).index);
            }
        }
        if (static_cast<double>(missing) > threshold * static_cast<double>(rows.size())) {
            audit.dropped.push_back({f.name, "missing"});
            continue;
        }
        if (numbers.size() + levels.size() <= 1) {
            audit.dropped.push_back({f.name, "constant"});
            continue;
        }
        const FeatureMeta* twin = nullptr;
        for (auto k : audit.keep) {
            const auto& g = ds.feature(k);
            if (g.kind != f.kind || g.levels != f.levels) continue;
            bool same = true;
            for (auto i : rows) {
                if (ds.cell(i, j) != ds.cell(i, k)) {
                    same = false;
                    break;
                }
            }
            if (same) {
                twin = &g;
                break;
            }
        }
        if (twin != nullptr) {
            audit.dropped.push_back({f.name, "duplicate of " + twin->name});
            continue;
        }
        audit.keep.push_back(j);
    }
    return audit;
}

Dataset drop_columns_by_missingness(const Dataset& ds, double threshold)
{
    std::vector<std::size_t> all(ds.rows());
    std::iota(all.begin(), all.end(), 0);
    auto audit = audit_columns(ds, threshold, all);
    if (audit.keep.empty()) fail(ErrorCode::AllColumnsDropped, "no column survives cleaning");
    return ds.select_columns(audit.keep);
}

std::vector<std::size_t> rows_to_keep(const Dataset& ds, double block_threshold)
{
    if (!(block_threshold > 0.0 && block_threshold <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "block threshold must lie in (0, 1]");
    }
    std::map<Block, std::vector<std::size_t>> blocks;
    for (std::size_t j = 0; j < ds.cols(); ++j) blocks[ds.feature(j).block].push_back(j);

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        bool ok = true;
        for (const auto& [block, cols] : blocks) {
            std::size_t missing = 0;
            for (auto j : cols) missing += is_missing(ds.cell(i, j)) ? 1 : 0;
            if (static_cast<double>(missing) > block_threshold * static_cast<double>(cols.size())) {
                ok = false;
                break;
            }
        }
        if (ok) keep.push_back(i);
    }
    return keep;
}

Dataset drop_rows_by_missingness(const Dataset& ds, double block_threshold)
{
    auto keep = rows_to_keep(ds, block_threshold);
    if (keep.empty()) fail(ErrorCode::AllRowsDropped, "every row exceeds the block missingness threshold");
    return ds.select_rows(keep);
}

namespace {

double numeric_of(const Cell& c)
{
    if (const auto* v = std::get_if<double>(&c)) return *v;
    return static_cast<double>(std::get<Level>(c).index);
}

Cell aggregate(const FeatureMeta& f, std::vector<Cell> values)
{
    if (f.kind == Kind::nominal) {
        std::map<std::size_t, std::size_t> counts;
        for (const auto& v : values) ++counts[std::get<Level>(v).index];
        std::size_t best = counts.begin()->first;
        std::size_t best_count = 0;
        for (const auto& [level, n] : counts) {
            if (n > best_count) {
                best = level;
                best_count = n;
            }
        }
        return Level{best};
    }
    std::vector<double> xs;
    xs.reserve(values.size());
    for (const auto& v : values) xs.push_back(numeric_of(v));
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    if (f.kind == Kind::ordinal) return Level{static_cast<std::size_t>(xs[(n - 1) / 2])};
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

struct DistanceColumn {
    std::size_t column;
    Kind kind;
    double mean = 0.0;
    double scale = 1.0;
};

} // namespace

Imputation knn_impute_from(const Dataset& ds, std::span<const std::size_t> donor_rows, std::size_t k)
{
    if (k == 0 || k % 2 == 0) fail(ErrorCode::InvalidArgument, "imputation k must be odd and positive");
    if (donor_rows.empty()) fail(ErrorCode::EmptyTrainingSet, "imputation needs donor rows");

    Imputation result{ds, {}, {}};
    bool any_missing = false;
    for (const auto& c : ds.cells()) any_missing = any_missing || is_missing(c);
    if (!any_missing) return result;

    if (k >= donor_rows.size()) {
        fail(ErrorCode::InvalidArgument, "imputation k=" + std::to_string(k) + " needs more than k donor rows");
    }

    std::vector<DistanceColumn> metric;
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        bool complete = true;
        for (auto i : donor_rows) complete = complete && !is_missing(ds.cell(i, j));
        if (!complete) continue;
        DistanceColumn d{j, ds.feature(j).kind};
        if (d.kind == Kind::numeric) {
            double mean = 0.0;
            for (auto i : donor_rows) mean += std::get<double>(ds.cell(i, j));
            mean /= static_cast<double>(donor_rows.size());
            double ss = 0.0;
            for (auto i : donor_rows) {
                const double e = std::get<double>(ds.cell(i, j)) - mean;
                ss += e * e;
            }
            const double sd = std::sqrt(ss / static_cast<double>(donor_rows.size()));
            d.mean = mean;
            d.scale = sd > 0.0 ? sd : 1.0;
        }
        metric.push_back(d);
    }
    if (metric.empty()) {
        fail(ErrorCode::InvalidArgument, "imputation needs at least one column fully observed among donor rows");
    }

    auto coordinate = [&](const DistanceColumn& d, std::size_t row) {
        const auto& c = ds.cell(row, d.column);
        return d.kind == Kind::numeric ? (std::get<double>(c) - d.mean) / d.scale : numeric_of(c);
    };

    std::vector<Cell> cells = ds.cells();
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        std::vector<std::size_t> holes;
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            if (is_missing(ds.cell(i, j))) holes.push_back(j);
        }
        if (holes.empty()) continue;

        order.clear();
        for (auto l : donor_rows) {
            if (l == i) continue;
            double dist = 0.0;
            for (const auto& d : metric) {
                if (is_missing(ds.cell(i, d.column))) continue;
                double diff = 0.0;
                if (d.kind == Kind::nominal) {
                    diff = ds.cell(i, d.column) == ds.cell(l, d.column) ? 0.0 : 1.0;
                } else {
                    diff = coordinate(d, i) - coordinate(d, l);
                }
                dist += diff * diff;
            }
            order.emplace_back(dist, l);
        }
        std::sort(order.begin(), order.end());

        for (auto j : holes) {
            const auto& f = ds.feature(j);
            ImputedCell imputed{i, j, {}, Missing{}};
            std::vector<Cell> values;
            for (const auto& [dist, l] : order) {
                if (values.size() == k) break;
                if (is_missing(ds.cell(l, j))) continue;
                values.push_back(ds.cell(l, j));
                imputed.donors.push_back(l);
            }
            if (values.empty()) {
                for (auto l : donor_rows) {
                    if (!is_missing(ds.cell(l, j))) values.push_back(ds.cell(l, j));
                }
                if (values.empty()) {
                    fail(ErrorCode::NoObservedNeighborValue, "no donor observes feature '" + f.name + "'");
                }
                result.warnings.push_back("row " + std::to_string(i) + ", feature '" + f.name +
                                          "': no neighbour observes the feature, used the column median");
            } else if (values.size() < k) {
                result.warnings.push_back("row " + std::to_string(i) + ", feature '" + f.name + "': only " +
                                          std::to_string(values.size()) + " donors observe the feature");
            }
            imputed.value = aggregate(f, std::move(values));
            cells[i * ds.cols() + j] = imputed.value;
            result.cells.push_back(std::move(imputed));
        }
    }
    result.data = ds.with_cells(std::move(cells));
    return result;
}

Dataset knn_impute(const Dataset& ds, std::size_t k)
{
    std::vector<std::size_t> all(ds.rows());
    std::iota(all.begin(), all.end(), 0);
    return knn_impute_from(ds, all, k).data;
}

EncodedMatrix encode_rows(const Dataset& ds, std::span<const std::size_t> rows, const TransformParams& params)
{
    EncodedMatrix out;
    std::size_t width = 0;
    for (const auto& f : ds.features()) width += f.categorical() ? f.levels.size() - 1 : 1;
    out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));

    Eigen::Index col = 0;
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        const auto& f = ds.feature(j);
        if (!f.categorical()) {
            const auto* transform = params.find(f.name);
            if (transform == nullptr) fail(ErrorCode::InvalidArgument, "no fitted transform for '" + f.name + "'");
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto* v = std::get_if<double>(&ds.cell(rows[r], j));
                if (v == nullptr) fail(ErrorCode::InvalidArgument, "cell of '" + f.name + "' is not numeric");
                out.values(static_cast<Eigen::Index>(r), col) = (*transform)(*v);
            }
            out.columns.push_back({f.name, f.block, Encoding::numeric, std::nullopt, {}});
            ++col;
            continue;
        }
        const auto c = f.levels.size();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto* level = std::get_if<Level>(&ds.cell(rows[r], j));
            if (level == nullptr) fail(ErrorCode::InvalidArgument, "cell of '" + f.name + "' is not a level");
            for (std::size_t k = 0; k + 1 < c; ++k) {
                const auto l = encoded_column_level(k, c);
                const bool bit = f.kind == Kind::nominal ? level->index == l : level->index >= l;
                if (bit) out.values(static_cast<Eigen::Index>(r), col + static_cast<Eigen::Index>(k)) = 1.0;
            }
        }
        for (std::size_t k = 0; k + 1 < c; ++k) {
            const auto l = encoded_column_level(k, c);
            out.columns.push_back({f.name, f.block, f.kind == Kind::nominal ? Encoding::onehot : Encoding::ordinal, l,
                                   f.levels[l]});
        }
        col += static_cast<Eigen::Index>(c - 1);
    }
    for (auto i : rows) {
        const auto& t = ds.target().at(i);
        out.target.push_back(encode_target(t.os_months, t.censored));
        out.row_ids.push_back(i);
    }
    return out;
}

PipelineResult run_pipeline(const Dataset& ds, std::span<const std::size_t> train_rows, const PreprocessConfig& config)
{
    config.check();
    std::vector<bool> is_train(ds.rows(), false);
    for (auto i : train_rows) {
        if (i >= ds.rows()) fail(ErrorCode::InvalidArgument, "train row " + std::to_string(i) + " out of range");
        if (is_train[i]) fail(ErrorCode::InvalidArgument, "train row " + std::to_string(i) + " listed twice");
        is_train[i] = true;
    }
    if (train_rows.empty()) fail(ErrorCode::EmptyTrainingSet, "pipeline needs training rows");

    PipelineResult result;
    auto audit = audit_columns(ds, config.column_missing_threshold, train_rows);
    if (audit.keep.empty()) fail(ErrorCode::AllColumnsDropped, "no column survives cleaning on the training rows");
    result.dropped_columns = std::move(audit.dropped);
    const auto cleaned = ds.select_columns(audit.keep);

    const auto kept = rows_to_keep(cleaned, config.block_row_threshold);
    std::vector<bool> is_kept(ds.rows(), false);
    for (auto i : kept) is_kept[i] = true;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (!is_kept[i]) {
            result.dropped_rows.push_back(i);
        } else if (is_train[i]) {
            train.push_back(i);
        } else {
            test.push_back(i);
        }
    }
    if (train.empty()) fail(ErrorCode::AllRowsDropped, "every training row exceeds the block missingness threshold");

    result.imputation = knn_impute_from(cleaned, train, config.knn_k);
    const auto& imputed = result.imputation.data;

    for (std::size_t j = 0; j < imputed.cols(); ++j) {
        const auto& f = imputed.feature(j);
        if (f.categorical()) continue;
        std::vector<double> values;
        values.reserve(train.size());
        for (auto i : train) values.push_back(std::get<double>(imputed.cell(i, j)));
        result.params.columns.push_back(fit_column_transform(f.name, values));
    }
    result.train = encode_rows(imputed, train, result.params);
    result.test = encode_rows(imputed, test, result.params);
    return result;
}

} // namespace efs
