#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "efs/error.hpp"
#include "efs/metrics.hpp"
#include "helpers.hpp"

using namespace efs;
using namespace testing;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out[k++] = x;
    return out;
}

// Selection indicator matrix, sample variances by column.
double stability_oracle(const std::vector<std::vector<std::size_t>>& sets, std::size_t n)
{
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sets.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (auto j : sets[i]) Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    }
    const Eigen::MatrixXd centered = Z.rowwise() - Z.colwise().mean();
    const Eigen::VectorXd var = centered.colwise().squaredNorm() / static_cast<double>(Z.rows() - 1);
    const double kbar = Z.sum() / static_cast<double>(Z.rows());
    const double q = kbar / static_cast<double>(n);
    return 1.0 - var.mean() / (q * (1.0 - q));
}

std::vector<std::size_t> random_set(std::size_t n, std::size_t k, std::mt19937_64& rng)
{
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace

TEST_CASE("RMSE")
{
    CHECK(rmse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
    CHECK(rmse(vec({0, 0}), vec({3, 4})) == doctest::Approx(std::sqrt(12.5)));
    CHECK(rmse(vec({1, 2, 3, 4}), vec({2, 4, 3, 2})) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(rmse(vec({1, 2, 3, 4}), vec({2, 3, 5, 6})) == doctest::Approx(1.5811388300841898).epsilon(1e-15));
    CHECK_THROWS_AS(rmse(vec({1, 2}), vec({1})), Error);
    CHECK_THROWS_AS(rmse(Eigen::VectorXd(0), Eigen::VectorXd(0)), Error);
}

TEST_CASE("stability")
{
    SUBCASE("identical sets")
    {
        const auto s = stability({{0, 3, 5}, {0, 3, 5}, {0, 3, 5}}, 10);
        CHECK(s.value == doctest::Approx(1.0).epsilon(1e-15));
        CHECK_FALSE(s.degenerate);
    }
    SUBCASE("a disjoint pair is clamped")
    {
        const auto s = stability({{0, 1}, {2, 3}}, 4);
        CHECK(s.raw == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(s.value == 0.0);
    }
    SUBCASE("hand example")
    {
        // frequencies (1, 2/3, 1/3, 0), mean size 2 of 4
        CHECK(stability({{0, 1}, {0, 1}, {0, 2}}, 4).raw == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("one swapped feature among 20 of 134 over five folds")
    {
        std::vector<std::vector<std::size_t>> sets(5);
        for (auto& s : sets) {
            s.resize(20);
            std::iota(s.begin(), s.end(), 0);
        }
        sets[4][19] = 20;
        const auto s = stability(sets, 134);
        CHECK(s.value == doctest::Approx(stability_oracle(sets, 134)).epsilon(1e-12));
        CHECK(s.value == doctest::Approx(0.9763).epsilon(1e-4));
    }
    SUBCASE("empty and full selections are degenerate")
    {
        CHECK(stability({{}, {}}, 5).degenerate);
        CHECK(stability({{0, 1}, {0, 1}}, 2).degenerate);
        CHECK(stability({{0, 1}, {0, 1}}, 2).value == 0.0);
    }
    SUBCASE("agrees with the indicator-matrix oracle and ignores set order")
    {
        std::mt19937_64 rng(31);
        std::uniform_int_distribution<std::size_t> size(1, 25);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::vector<std::size_t>> sets;
            for (int f = 0; f < 5; ++f) sets.push_back(random_set(40, size(rng), rng));
            const auto s = stability(sets, 40);
            CHECK(s.raw == doctest::Approx(stability_oracle(sets, 40)).epsilon(1e-12));
            std::shuffle(sets.begin(), sets.end(), rng);
            CHECK(stability(sets, 40).raw == doctest::Approx(s.raw).epsilon(1e-12));
        }
    }
    SUBCASE("random selections are near zero on average")
    {
        std::mt19937_64 rng(32);
        double total = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<std::vector<std::size_t>> sets;
            for (int f = 0; f < 5; ++f) sets.push_back(random_set(134, 20, rng));
            total += stability(sets, 134).raw;
        }
        CHECK(std::abs(total / 1000.0) < 0.1);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(stability({{0}}, 3), Error);
        CHECK_THROWS_AS(stability({{0}, {3}}, 3), Error);
        CHECK_THROWS_AS(stability({{0, 0}, {1}}, 3), Error);
    }
}

TEST_CASE("redundancy rate")
{
    Eigen::MatrixXd X(4, 4);
    X << 1, 2, 1, 5,
         2, 4, -1, 5,
         3, 6, 1, 5,
         4, 8, -1, 5;
    CHECK(redundancy_rate(X, {0, 1}).value == doctest::Approx(1.0));
    CHECK(redundancy_rate(X, {0}).value == 0.0);
    // |corr(x0, x2)| = |corr(x1, x2)| = 1 / sqrt(5)
    CHECK(redundancy_rate(X, {0, 1, 2}).value == doctest::Approx((1.0 + 2.0 / std::sqrt(5.0)) / 3.0).epsilon(1e-12));
    const auto with_constant = redundancy_rate(X, {0, 1, 3});
    CHECK(with_constant.skipped_pairs == 2);
    CHECK(with_constant.value == doctest::Approx(1.0));
    CHECK_THROWS_AS(redundancy_rate(X, {}), Error);

    std::mt19937_64 rng(33);
    const auto G = gaussian(30, 6, rng);
    const std::vector<std::size_t> S{0, 2, 3, 5};
    double sum = 0.0;
    for (std::size_t a = 0; a < S.size(); ++a) {
        for (std::size_t b = a + 1; b < S.size(); ++b) {
            sum += std::abs(pearson(G.col(static_cast<Eigen::Index>(S[a])), G.col(static_cast<Eigen::Index>(S[b]))));
        }
    }
    CHECK(redundancy_rate(G, S).value == doctest::Approx(sum / 6.0).epsilon(1e-12));
}

TEST_CASE("PERC")
{
    CHECK(perc({1, 2, 3, 4}, {2, 4, 9}) == 0.5);
    CHECK(perc({1}, {}) == 0.0);
    CHECK(perc({2, 4}, {2, 4}) == 1.0);
    CHECK_THROWS_AS(perc({}, {1}), Error);
}

TEST_CASE("coefficient signs over folds")
{
    using O = std::optional<double>;
    CHECK(sign_summary({O{1.0}, O{0.5}, O{}, O{2.0}, O{3.0}}) == Sign::always_pos);
    CHECK(sign_summary({O{1.0}, O{-0.5}, O{2.0}}) == Sign::mostly_pos);
    CHECK(sign_summary({O{1.0}, O{-0.5}}) == Sign::even);
    CHECK(sign_summary({O{-1.0}, O{-0.5}, O{0.2}}) == Sign::mostly_neg);
    CHECK(sign_summary({O{-1.0}, O{}, O{-0.5}}) == Sign::always_neg);
    CHECK(sign_summary({O{}, O{}}) == Sign::never_selected);
    CHECK(sign_summary({O{0.0}, O{1.0}}) == Sign::mostly_pos);
    CHECK(to_string(Sign::always_pos) == "++");
    CHECK(to_string(Sign::mostly_neg) == "-");
    CHECK(to_string(Sign::even).empty());
    CHECK(to_string(Sign::never_selected).empty());
}
