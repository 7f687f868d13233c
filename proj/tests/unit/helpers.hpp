#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efs/dataset.hpp"

namespace testing {

inline efs::FeatureMeta numeric(std::string name, efs::Block block = efs::Block::p)
{
    return {std::move(name), block, efs::Kind::numeric, {}};
}

inline efs::FeatureMeta nominal(std::string name, std::vector<std::string> levels, efs::Block block = efs::Block::p)
{
    return {std::move(name), block, efs::Kind::nominal, std::move(levels)};
}

inline efs::FeatureMeta ordinal(std::string name, std::vector<std::string> levels, efs::Block block = efs::Block::p)
{
    return {std::move(name), block, efs::Kind::ordinal, std::move(levels)};
}

inline std::vector<efs::Survival> months(const std::vector<double>& os)
{
    std::vector<efs::Survival> out;
    for (double v : os) out.push_back({v, false});
    return out;
}

inline std::vector<efs::Survival> months(std::size_t rows, double os = 30.0)
{
    return std::vector<efs::Survival>(rows, efs::Survival{os, false});
}

// Fresh directory under the system temp path, removed by the destructor.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(std::filesystem::temp_directory_path() / ("efs_test_" + tag + "_" + std::to_string(std::random_device{}())))
    {
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = g(rng);
    }
    return X;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

} // namespace testing
