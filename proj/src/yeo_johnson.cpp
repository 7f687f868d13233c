#include "efs/yeo_johnson.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <yaml-cpp/yaml.h>

#include "efs/dataset_io.hpp"
#include "efs/error.hpp"

namespace efs {

double apply_yeo_johnson(double x, double lambda)
{
    if (x >= 0.0) {
        const double l = std::log1p(x);
        if (lambda == 0.0) return l;
        return std::expm1(lambda * l) / lambda;
    }
    const double l = std::log1p(-x);
    const double power = 2.0 - lambda;
    if (power == 0.0) return -l;
    return -std::expm1(power * l) / power;
}

double yeo_johnson_log_likelihood(std::span<const double> x, double lambda)
{
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += apply_yeo_johnson(v, lambda);
    mean /= n;
    double ss = 0.0;
    double jacobian = 0.0;
    for (double v : x) {
        const double d = apply_yeo_johnson(v, lambda) - mean;
        ss += d * d;
        jacobian += std::copysign(std::log1p(std::abs(v)), v);
    }
    const double variance = ss / n;
    if (!std::isfinite(variance) || variance <= 0.0) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * std::log(variance) + (lambda - 1.0) * jacobian;
}

double fit_yeo_johnson(std::span<const double> x)
{
    std::set<double> distinct(x.begin(), x.end());
    if (distinct.size() < 2) fail(ErrorCode::DegenerateColumn, "Yeo-Johnson fit needs at least 2 distinct values");

    // Golden-section search for the maximum of the profile likelihood.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kLambdaMin;
    double b = kLambdaMax;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = yeo_johnson_log_likelihood(x, c);
    double fd = yeo_johnson_log_likelihood(x, d);
    while (b - a > 1e-4) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = yeo_johnson_log_likelihood(x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = yeo_johnson_log_likelihood(x, d);
        }
    }
    return 0.5 * (a + b);
}

const ColumnTransform* TransformParams::find(const std::string& name) const
{
    for (const auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

Standardizer fit_standardizer(std::span<const double> train)
{
    if (train.empty()) fail(ErrorCode::ZeroVariance, "cannot standardize an empty column");
    const auto n = static_cast<double>(train.size());
    double mean = 0.0;
    for (double v : train) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : train) ss += (v - mean) * (v - mean);
    const double stdev = std::sqrt(ss / n);
    const double scale = std::max(1.0, std::abs(mean));
    if (!(stdev > 1e-12 * scale)) fail(ErrorCode::ZeroVariance, "column is constant");
    return {mean, stdev};
}

std::vector<double> standardize(std::span<const double> column, const Standardizer& params)
{
    if (!(params.stdev > 0.0)) fail(ErrorCode::ZeroVariance, "standardizer has non-positive stdev");
    std::vector<double> out;
    out.reserve(column.size());
    for (double v : column) out.push_back((v - params.mean) / params.stdev);
    return out;
}

ColumnTransform fit_column_transform(std::string name, std::span<const double> train)
{
    ColumnTransform t;
    t.name = std::move(name);
    try {
        t.lambda = fit_yeo_johnson(train);
    } catch (const Error& e) {
        fail(ErrorCode::ZeroVariance, "column '" + t.name + "': " + e.what());
    }
    std::vector<double> transformed;
    transformed.reserve(train.size());
    for (double v : train) transformed.push_back(apply_yeo_johnson(v, t.lambda));
    try {
        const auto s = fit_standardizer(transformed);
        t.mean = s.mean;
        t.stdev = s.stdev;
    } catch (const Error& e) {
        fail(ErrorCode::ZeroVariance, "column '" + t.name + "': " + e.what());
    }
    return t;
}

void save_transform_params(const TransformParams& params, const std::filesystem::path& path)
{
    YAML::Emitter em;
    em << YAML::BeginMap << YAML::Key << "columns" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : params.columns) {
        em << YAML::Flow << YAML::BeginMap;
        em << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
        em << YAML::Key << "lambda" << YAML::Value << format_double(c.lambda);
        em << YAML::Key << "mean" << YAML::Value << format_double(c.mean);
        em << YAML::Key << "stdev" << YAML::Value << format_double(c.stdev);
        em << YAML::EndMap;
    }
    em << YAML::EndSeq << YAML::EndMap;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
    out << em.c_str() << '\n';
}

TransformParams load_transform_params(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) fail(ErrorCode::FileNotFound, "'" + path.string() + "' does not exist");
    TransformParams params;
    try {
        const auto root = YAML::LoadFile(path.string());
        for (const auto& node : root["columns"]) {
            ColumnTransform c;
            c.name = node["name"].as<std::string>();
            c.lambda = node["lambda"].as<double>();
            c.mean = node["mean"].as<double>();
            c.stdev = node["stdev"].as<double>();
            if (!(c.stdev > 0.0)) fail(ErrorCode::ZeroVariance, path.string() + ": stdev of '" + c.name + "' must be positive");
            params.columns.push_back(std::move(c));
        }
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    return params;
}

} // namespace efs
