#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "efs/error.hpp"
#include "efs/ubayfs.hpp"
#include "helpers.hpp"

using namespace efs;
using namespace testing;

namespace {

EncodedColumn num(std::string source)
{
    return {std::move(source), Block::p, Encoding::numeric, std::nullopt, ""};
}

EncodedColumn hot(std::string source, std::size_t level, std::string label)
{
    return {std::move(source), Block::p, Encoding::onehot, level, std::move(label)};
}

EncodedColumn ord(std::string source, std::size_t level, std::string label)
{
    return {std::move(source), Block::p, Encoding::ordinal, level, std::move(label)};
}

// Best subset of size k by total score, over all subsets.
std::vector<std::size_t> brute_force_map(const std::vector<double>& scores, std::size_t k)
{
    const auto n = scores.size();
    double best = -1.0;
    std::vector<std::size_t> arg;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        double total = 0.0;
        std::vector<std::size_t> s;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask & (1u << j)) {
                total += scores[j];
                s.push_back(j);
            }
        }
        if (total > best) {
            best = total;
            arg = s;
        }
    }
    return arg;
}

} // namespace

TEST_CASE("counts")
{
    std::mt19937_64 rng(21);
    const auto X = gaussian(40, 8, rng);
    const Eigen::VectorXd y = X.col(1) + X.col(3) + 0.3 * gaussian(40, 1, rng).col(0);

    SUBCASE("two dominant columns are picked by every model")
    {
        const UBayConfig cfg{.models = 30, .max_s = 2, .seed = 4};
        const auto c = ubay_counts(X, y, cfg);
        CHECK(c[1] == 30);
        CHECK(c[3] == 30);
    }
    SUBCASE("counts sum to models * max_s")
    {
        for (std::size_t k : {1, 3, 8}) {
            const UBayConfig cfg{.models = 25, .max_s = k, .seed = 5};
            const auto c = ubay_counts(X, y, cfg);
            CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == 25 * k);
            for (auto v : c) CHECK(v <= 25);
        }
    }
    SUBCASE("deterministic, independent of jobs and of the prior weights")
    {
        UBayConfig cfg{.models = 20, .max_s = 4, .seed = 6};
        const auto a = ubay_counts(X, y, cfg);
        cfg.jobs = 4;
        cfg.prior_weights.assign(8, 50.0);
        CHECK(ubay_counts(X, y, cfg) == a);
    }
    SUBCASE("argument checks")
    {
        CHECK_THROWS_AS(ubay_counts(X, y, UBayConfig{.max_s = 9}), Error);
        CHECK_THROWS_AS(ubay_counts(X.topRows(7), y.head(7), UBayConfig{.max_s = 2}), Error);
        CHECK_THROWS_AS(ubay_counts(X, y, UBayConfig{.max_s = 0}), Error);
    }
}

TEST_CASE("posterior scores and selection")
{
    SUBCASE("uniform weights add 0.1")
    {
        const UBayConfig cfg{.models = 100, .max_s = 2};
        const auto post = ubay_posterior({90, 10, 50}, 100, cfg);
        CHECK(post.scores[0] == doctest::Approx(90.1));
        CHECK(post.scores[1] == doctest::Approx(10.1));
        CHECK(post.scores[2] == doctest::Approx(50.1));
        CHECK(ubay_select(post, cfg) == std::vector<std::size_t>{0, 2});
    }
    SUBCASE("a large prior weight outranks a full count")
    {
        UBayConfig cfg{.models = 100, .max_s = 1, .prior_weights = {110.0, 0.1}};
        const auto post = ubay_posterior({0, 100}, 100, cfg);
        CHECK(post.scores[0] == 110.0);
        CHECK(post.scores[1] == doctest::Approx(100.1));
        CHECK(ubay_select(post, cfg) == std::vector<std::size_t>{0});
    }
    SUBCASE("all scores equal gives the lowest indices")
    {
        const UBayConfig cfg{.models = 10, .max_s = 3};
        CHECK(ubay_select(ubay_posterior({5, 5, 5, 5, 5}, 10, cfg), cfg) == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("equal scores prefer the higher count")
    {
        UBayConfig cfg{.models = 10, .max_s = 1, .prior_weights = {3.0, 1.0}};
        CHECK(ubay_select(ubay_posterior({2, 4}, 10, cfg), cfg) == std::vector<std::size_t>{1});
    }
    SUBCASE("a count above the model number is rejected")
    {
        CHECK_THROWS_AS(ubay_posterior({11}, 10, UBayConfig{.models = 10, .max_s = 1}), Error);
    }
    SUBCASE("wrong number of prior weights")
    {
        CHECK_THROWS_AS(ubay_posterior({1, 2}, 10, UBayConfig{.max_s = 1, .prior_weights = {1.0}}), Error);
    }
    SUBCASE("selection matches an exhaustive search")
    {
        std::mt19937_64 rng(22);
        std::uniform_int_distribution<std::size_t> count(0, 50);
        std::uniform_real_distribution<double> weight(0.1, 40.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::size_t> c(10);
            UBayConfig cfg{.models = 50, .max_s = 1 + static_cast<std::size_t>(trial % 6)};
            for (auto& v : c) v = count(rng);
            for (std::size_t j = 0; j < 10; ++j) cfg.prior_weights.push_back(weight(rng));
            const auto post = ubay_posterior(c, 50, cfg);
            CHECK(ubay_select(post, cfg) == brute_force_map(post.scores, cfg.max_s));
        }
    }
}

TEST_CASE("raising the prior weight never removes elevated columns")
{
    std::mt19937_64 rng(23);
    const auto X = gaussian(50, 12, rng);
    const Eigen::VectorXd y = X.leftCols(4).rowwise().sum() + 0.5 * gaussian(50, 1, rng).col(0);
    std::vector<EncodedColumn> cols;
    for (int j = 0; j < 12; ++j) cols.push_back(num("x" + std::to_string(j)));
    const std::set<std::string> elevated{"x6", "x8", "x9", "x11"};
    const UBayConfig base{.models = 40, .max_s = 5, .seed = 9};
    const auto counts = ubay_counts(X, y, base);
    std::size_t previous = 0;
    for (double w : {0.1, 1.0, 5.0, 10.0, 20.0, 40.0, 80.0}) {
        const auto cfg = set_prior_weights(base, cols, elevated, w);
        const auto s = ubay_select(ubay_posterior(counts, 40, cfg), cfg);
        std::size_t hits = 0;
        for (auto j : s) hits += elevated.count(cols[j].name());
        CHECK(hits >= previous);
        previous = hits;
    }
    CHECK(previous == 4);
}

TEST_CASE("prior weights by feature name")
{
    const std::vector<EncodedColumn> cols{
        num("age"),
        hot("site", 0, "colon"), hot("site", 1, "lung"), hot("site", 2, "pancreas"),
        ord("who_ps", 1, "1"), ord("who_ps", 2, "2"), ord("who_ps", 3, "3"), ord("who_ps", 4, "4"),
    };

    SUBCASE("a numeric feature")
    {
        const auto cfg = set_prior_weights({}, cols, {"age"}, 30.0);
        CHECK(cfg.prior_weights == std::vector<double>{30, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1});
    }
    SUBCASE("a source name covers all its encoded columns")
    {
        const auto cfg = set_prior_weights({}, cols, {"who_ps"}, 20.0);
        CHECK(std::count(cfg.prior_weights.begin(), cfg.prior_weights.end(), 20.0) == 4);
        CHECK(elevated_columns(cols, {"who_ps"}) == std::vector<std::size_t>{4, 5, 6, 7});
    }
    SUBCASE("an encoded name covers one column")
    {
        const auto cfg = set_prior_weights({}, cols, {"site=lung"}, 20.0);
        CHECK(cfg.prior_weights[2] == 20.0);
        CHECK(std::count(cfg.prior_weights.begin(), cfg.prior_weights.end(), 20.0) == 1);
        CHECK(elevated_columns(cols, {"who_ps>=3", "age"}) == std::vector<std::size_t>{0, 6});
    }
    SUBCASE("no elevated features leaves the uniform default")
    {
        CHECK(set_prior_weights({}, cols, {}, 20.0).prior_weights.empty());
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(set_prior_weights({}, cols, {"ldh"}, 20.0), Error);
        CHECK_THROWS_AS(set_prior_weights({}, cols, {"age"}, 0.0), Error);
        try {
            set_prior_weights({}, cols, {"site=liver"}, 20.0);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownFeatureName);
        }
    }
}

TEST_CASE("posterior file")
{
    TempDir dir("ubay");
    const UBayConfig cfg{.models = 10, .max_s = 1, .prior_weights = {0.1, 20.0}};
    const auto post = ubay_posterior({7, 0}, 10, cfg);
    write_posterior(dir / "posterior.csv", post, {"age", "site=lung"}, ubay_select(post, cfg));
    CHECK(read_file(dir / "posterior.csv") ==
          "feature,count,prior_weight,score,selected\nage,7,0.1,7.1,0\nsite=lung,0,20,20,1\n");
}
