#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace efs {

// Yeo-Johnson power transform. Continuous in lambda; evaluated through
// expm1/log1p so lambda near 0 (x >= 0) and near 2 (x < 0) stay accurate.
double apply_yeo_johnson(double x, double lambda);

// Profile log-likelihood of lambda under a normal model of the transformed
// values (variance at its maximum-likelihood estimate).
double yeo_johnson_log_likelihood(std::span<const double> x, double lambda);

inline constexpr double kLambdaMin = -5.0;
inline constexpr double kLambdaMax = 5.0;

// Maximum-likelihood lambda on [-5, 5] by golden-section search (tolerance
// 1e-4). Throws Error{DegenerateColumn} when x has fewer than 2 distinct values.
double fit_yeo_johnson(std::span<const double> x);

// Fitted parameters for one numeric column: power transform followed by
// standardization with the population standard deviation.
struct ColumnTransform {
    std::string name;
    double lambda = 1.0;
    double mean = 0.0;
    double stdev = 1.0;

    [[nodiscard]] double operator()(double x) const { return (apply_yeo_johnson(x, lambda) - mean) / stdev; }
    bool operator==(const ColumnTransform&) const = default;
};

struct TransformParams {
    std::vector<ColumnTransform> columns;

    [[nodiscard]] const ColumnTransform* find(const std::string& name) const;
    bool operator==(const TransformParams&) const = default;
};

// Fits lambda, then mean/stdev of the transformed training values.
// Throws Error{ZeroVariance} if the transformed column is constant.
ColumnTransform fit_column_transform(std::string name, std::span<const double> train);

struct Standardizer {
    double mean = 0.0;
    double stdev = 1.0;
};

// Population mean/stdev. Throws Error{ZeroVariance} for a constant column.
Standardizer fit_standardizer(std::span<const double> train);
std::vector<double> standardize(std::span<const double> column, const Standardizer& params);

void save_transform_params(const TransformParams& params, const std::filesystem::path& path);
TransformParams load_transform_params(const std::filesystem::path& path);

} // namespace efs
