#include "efs/encoding.hpp"

#include <cmath>

#include "efs/encoded.hpp"
#include "efs/error.hpp"

namespace efs {

std::string EncodedColumn::name() const
{
    switch (encoding) {
    case Encoding::numeric: return source;
    case Encoding::onehot: return source + "=" + level_label;
    case Encoding::ordinal: return source + ">=" + level_label;
    }
    return source;
}

Eigen::VectorXd EncodedMatrix::y() const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(target.size()));
    for (std::size_t i = 0; i < target.size(); ++i) out[static_cast<Eigen::Index>(i)] = target[i];
    return out;
}

std::vector<std::string> EncodedMatrix::column_names() const
{
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.name());
    return out;
}

EncodedMatrix EncodedMatrix::select_rows(const std::vector<std::size_t>& rows) const
{
    EncodedMatrix out;
    out.columns = columns;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(rows[r]));
        out.target.push_back(target.at(rows[r]));
        out.row_ids.push_back(row_ids.at(rows[r]));
    }
    return out;
}

namespace {

template <typename Bit>
Eigen::MatrixXd encode(std::span<const std::string> values, const FeatureMeta& meta, Kind expected, Bit bit)
{
    if (meta.kind != expected) {
        fail(ErrorCode::InvalidArgument, "feature '" + meta.name + "' is " + to_string(meta.kind) + ", expected " +
                                             to_string(expected));
    }
    const auto c = meta.levels.size();
    if (c < 2) fail(ErrorCode::InvalidArgument, "feature '" + meta.name + "' needs at least 2 levels");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(c - 1));
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto level = meta.level_index(values[i]);
        if (!level) fail(ErrorCode::UnknownLevel, "'" + values[i] + "' is not a level of '" + meta.name + "'");
        for (std::size_t k = 0; k + 1 < c; ++k) {
            if (bit(*level, encoded_column_level(k, c))) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = 1.0;
        }
    }
    return out;
}

} // namespace

Eigen::MatrixXd encode_onehot(std::span<const std::string> values, const FeatureMeta& meta)
{
    return encode(values, meta, Kind::nominal, [](std::size_t value, std::size_t level) { return value == level; });
}

Eigen::MatrixXd encode_ordinal(std::span<const std::string> values, const FeatureMeta& meta)
{
    return encode(values, meta, Kind::ordinal, [](std::size_t value, std::size_t level) { return value >= level; });
}

int encode_target(double os_months, bool censored)
{
    if (!(os_months >= 0.0) || !std::isfinite(os_months)) {
        fail(ErrorCode::InvalidArgument, "overall survival must be finite and non-negative");
    }
    if (censored) {
        if (os_months <= 60.0) {
            fail(ErrorCode::CensoredBelowCutoff, "censored observation at " + std::to_string(os_months) + " months");
        }
        return 6;
    }
    if (os_months > 60.0) return 6;
    return std::max(1, static_cast<int>(std::ceil(os_months / 12.0)));
}

} // namespace efs
