#include "efs/ubayfs.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "efs/dataset_io.hpp"
#include "efs/error.hpp"
#include "efs/parallel.hpp"
#include "efs/random.hpp"

namespace efs {

void UBayConfig::check() const
{
    if (models == 0) fail(ErrorCode::InvalidConfig, "UBayFS needs at least one elementary model");
    if (!(split_ratio > 0.0 && split_ratio <= 1.0)) fail(ErrorCode::InvalidConfig, "UBayFS split ratio must lie in (0, 1]");
    if (max_s == 0) fail(ErrorCode::InvalidConfig, "max_s must be at least 1");
    for (double w : prior_weights) {
        if (!(w > 0.0)) fail(ErrorCode::InvalidConfig, "prior weights must be positive");
    }
}

std::vector<double> UBayConfig::weights(std::size_t n) const
{
    if (prior_weights.empty()) return std::vector<double>(n, kDefaultPriorWeight);
    if (prior_weights.size() != n) {
        fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(n) + " prior weights, got " +
                                               std::to_string(prior_weights.size()));
    }
    return prior_weights;
}

std::vector<std::size_t> ubay_counts(const MatrixRef& X, const VectorRef& y, const UBayConfig& config)
{
    config.check();
    const auto m = static_cast<std::size_t>(X.rows());
    const auto n = static_cast<std::size_t>(X.cols());
    if (m < 8) fail(ErrorCode::InvalidArgument, "UBayFS needs at least 8 rows, got " + std::to_string(m));
    if (y.size() != X.rows()) fail(ErrorCode::DimensionMismatch, "X and y disagree on the row count");
    if (config.max_s > n) fail(ErrorCode::InvalidArgument, "max_s exceeds the feature count");

    const auto size = subsample_size(m, config.split_ratio);
    std::vector<std::vector<std::size_t>> picks(config.models);
    parallel_for(config.models, config.jobs, [&](std::size_t t) {
        auto rng = make_rng(config.seed, t);
        const auto rows = subsample(m, size, rng);
        Eigen::MatrixXd xs(static_cast<Eigen::Index>(size), X.cols());
        Eigen::VectorXd ys(static_cast<Eigen::Index>(size));
        for (std::size_t r = 0; r < size; ++r) {
            xs.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
            ys[static_cast<Eigen::Index>(r)] = y[static_cast<Eigen::Index>(rows[r])];
        }
        picks[t] = mrmr_select(xs, ys, config.max_s).selected;
    });

    std::vector<std::size_t> counts(n, 0);
    for (const auto& p : picks) {
        for (auto j : p) ++counts[j];
    }
    return counts;
}

UBayPosterior ubay_posterior(std::vector<std::size_t> counts, std::size_t models, const UBayConfig& config)
{
    config.check();
    UBayPosterior post;
    post.weights = config.weights(counts.size());
    post.scores.resize(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] > models) fail(ErrorCode::InvalidArgument, "a count exceeds the number of models");
        post.scores[j] = post.weights[j] + static_cast<double>(counts[j]);
    }
    post.counts = std::move(counts);
    post.models = models;
    return post;
}

UBayPosterior ubay_train(const MatrixRef& X, const VectorRef& y, const UBayConfig& config)
{
    return ubay_posterior(ubay_counts(X, y, config), config.models, config);
}

std::vector<std::size_t> ubay_select(const UBayPosterior& post, const UBayConfig& config)
{
    const auto n = post.features();
    if (config.max_s > n) fail(ErrorCode::InvalidArgument, "max_s exceeds the feature count");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (post.scores[a] != post.scores[b]) return post.scores[a] > post.scores[b];
        return post.counts[a] > post.counts[b];
    });
    order.resize(config.max_s);
    std::sort(order.begin(), order.end());
    return order;
}

namespace {

std::vector<bool> match_elevated(const std::vector<EncodedColumn>& columns, const std::set<std::string>& elevated)
{
    std::vector<bool> hit(columns.size(), false);
    for (const auto& name : elevated) {
        bool found = false;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (columns[j].source == name || columns[j].name() == name) {
                hit[j] = true;
                found = true;
            }
        }
        if (!found) fail(ErrorCode::UnknownFeatureName, "unknown feature '" + name + "'");
    }
    return hit;
}

} // namespace

UBayConfig set_prior_weights(UBayConfig config, const std::vector<EncodedColumn>& columns,
                             const std::set<std::string>& elevated, double w)
{
    if (!(w > 0.0)) fail(ErrorCode::InvalidArgument, "prior weight must be positive");
    if (elevated.empty()) return config;
    const auto hit = match_elevated(columns, elevated);
    config.prior_weights.assign(columns.size(), kDefaultPriorWeight);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (hit[j]) config.prior_weights[j] = w;
    }
    return config;
}

std::vector<std::size_t> elevated_columns(const std::vector<EncodedColumn>& columns, const std::set<std::string>& elevated)
{
    const auto hit = match_elevated(columns, elevated);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < hit.size(); ++j) {
        if (hit[j]) out.push_back(j);
    }
    return out;
}

void write_posterior(const std::filesystem::path& path, const UBayPosterior& post, const std::vector<std::string>& names,
                     const std::vector<std::size_t>& selected)
{
    if (names.size() != post.features()) fail(ErrorCode::DimensionMismatch, "one name per feature required");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
    std::vector<bool> chosen(post.features(), false);
    for (auto j : selected) chosen.at(j) = true;
    csv::write_row(out, {"feature", "count", "prior_weight", "score", "selected"});
    for (std::size_t j = 0; j < post.features(); ++j) {
        csv::write_row(out, {names[j], std::to_string(post.counts[j]), format_double(post.weights[j]),
                             format_double(post.scores[j]), chosen[j] ? "1" : "0"});
    }
}

} // namespace efs
