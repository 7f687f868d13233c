#include <algorithm>
#include <numeric>

#include <doctest.h>

#include "efs/error.hpp"
#include "efs/preprocess.hpp"
#include "efs/synthgen.hpp"
#include "helpers.hpp"

using namespace efs;
using namespace testing;

namespace {

Eigen::VectorXd numeric_column(const Dataset& ds, const std::string& name)
{
    const auto j = *ds.feature_index(name);
    Eigen::VectorXd out(static_cast<Eigen::Index>(ds.rows()));
    for (std::size_t i = 0; i < ds.rows(); ++i) out[static_cast<Eigen::Index>(i)] = std::get<double>(ds.cell(i, j));
    return out;
}

Eigen::VectorXd survival(const Dataset& ds)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(ds.rows()));
    for (std::size_t i = 0; i < ds.rows(); ++i) out[static_cast<Eigen::Index>(i)] = ds.target()[i].os_months;
    return out;
}

SynthSpec tiny()
{
    SynthSpec s;
    s.m = 50;
    s.features = {{"a"}, {"b"}, {"c", Block::b, Kind::nominal, 3}, {"d", Block::h, Kind::ordinal, 4}};
    s.planted = {{"a", 1.0}};
    s.missing_rate = 0.0;
    s.seed = 1;
    return s;
}

} // namespace

TEST_CASE("generated data is valid and reproducible")
{
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto spec = paper_profile(seed);
        const auto ds = generate(spec);
        CHECK(validate(ds).empty());
        CHECK(ds.rows() == 66);
        CHECK(ds.cols() == 137);
        CHECK(generate(spec) == ds);
    }
    CHECK_FALSE(generate(paper_profile(1)) == generate(paper_profile(2)));
    CHECK(validate(generate(recovery_profile(200, 40, 5, 1.0, 1))).empty());
}

TEST_CASE("paper profile cleans to the documented shape")
{
    const auto ds = generate(paper_profile(4));
    const auto keep = rows_to_keep(ds, 0.5);
    CHECK(keep.size() == 63);
    std::vector<std::size_t> all(keep.size());
    std::iota(all.begin(), all.end(), 0);
    const auto pipe = run_pipeline(ds.select_rows(keep), all);
    CHECK(pipe.train.cols() == 134);
    CHECK(pipe.dropped_columns.size() == 45);
}

TEST_CASE("ground truth and elevated features")
{
    CHECK(ground_truth(recovery_profile(100, 30, 5, 1.0, 1)).size() == 5);
    const auto spec = paper_profile(1);
    const auto truth = ground_truth(spec);
    for (const auto& p : spec.planted) CHECK(truth.count(p.feature) == 1);

    const auto ds = generate(spec);
    const auto keep = rows_to_keep(ds, 0.5);
    std::vector<std::size_t> all(keep.size());
    std::iota(all.begin(), all.end(), 0);
    const auto pipe = run_pipeline(ds.select_rows(keep), all);
    const auto el = paper_profile_elevated();
    std::size_t hits = 0;
    for (const auto& c : pipe.train.columns) hits += el.count(c.source);
    CHECK(hits == 22);
}

TEST_CASE("without noise the target follows the planted feature")
{
    auto spec = tiny();
    spec.noise_sd = 0.0;
    const auto ds = generate(spec);
    const auto a = numeric_column(ds, "a");
    const auto t = survival(ds);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(a.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x] < a[y]; });
    for (std::size_t r = 1; r < order.size(); ++r) CHECK(t[order[r]] >= t[order[r - 1]]);
}

TEST_CASE("cluster members correlate at the requested level")
{
    SynthSpec s;
    s.m = 400;
    s.features = {{"u"}, {"v"}, {"w"}};
    s.clusters = {{{"u", "v"}, 0.6}};
    s.planted = {{"w", 1.0}};
    s.missing_rate = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        s.seed = seed;
        const auto ds = generate(s);
        CHECK(std::abs(pearson(numeric_column(ds, "u"), numeric_column(ds, "v")) - 0.6) < 0.15);
        CHECK(std::abs(pearson(numeric_column(ds, "u"), numeric_column(ds, "w"))) < 0.15);
    }
}

TEST_CASE("planted features carry the strongest correlation with the target")
{
    const auto spec = recovery_profile(500, 20, 3, 1.0, 5);
    const auto ds = generate(spec);
    const auto truth = ground_truth(spec);
    const auto t = survival(ds);
    std::vector<std::pair<double, std::string>> corr;
    for (const auto& f : ds.features()) {
        if (f.kind == Kind::numeric) corr.push_back({std::abs(pearson(numeric_column(ds, f.name), t)), f.name});
    }
    std::sort(corr.rbegin(), corr.rend());
    for (std::size_t r = 0; r < 3; ++r) CHECK(truth.count(corr[r].second) == 1);
}

TEST_CASE("null indicators")
{
    auto spec = tiny();
    spec.nulls = {{"b", 4}};
    const auto ds = generate(spec);
    const auto b = numeric_column(ds, "b");
    CHECK(b.sum() == 4.0);
    CHECK((b.array() * (1.0 - b.array())).abs().sum() == 0.0);

    const auto paper = generate(paper_profile(2));
    const auto keep = rows_to_keep(paper, 0.5);
    std::vector<std::size_t> positives;
    for (const auto* name : {"severe_toxicity", "dose_delays"}) {
        const auto j = *paper.feature_index(name);
        std::size_t ones = 0;
        for (std::size_t i = 0; i < paper.rows(); ++i) {
            const auto* v = std::get_if<double>(&paper.cell(i, j));
            if (v != nullptr && *v == 1.0) {
                ++ones;
                positives.push_back(i);
            }
        }
        CHECK(ones == 3);
    }
    std::sort(positives.begin(), positives.end());
    CHECK(std::adjacent_find(positives.begin(), positives.end()) == positives.end());
}

TEST_CASE("infeasible specifications")
{
    auto expect_infeasible = [](const SynthSpec& s) {
        try {
            s.check();
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InfeasibleSpec);
        }
    };
    auto s = tiny();
    s.planted = {{"zz", 1.0}};
    expect_infeasible(s);
    s = tiny();
    s.features.push_back({"a"});
    expect_infeasible(s);
    s = tiny();
    s.features[2].levels = 1;
    expect_infeasible(s);
    s = tiny();
    s.clusters = {{{"a", "b"}, 1.0}};
    expect_infeasible(s);
    s = tiny();
    s.clusters = {{{"a", "b"}, 0.5}, {{"b"}, 0.5}};
    expect_infeasible(s);
    s = tiny();
    s.nulls = {{"c", 3}};
    expect_infeasible(s);
    s = tiny();
    s.nulls = {{"a", 3}};
    expect_infeasible(s);
    s = tiny();
    s.nulls = {{"b", 50}};
    expect_infeasible(s);
    s = tiny();
    s.planted.clear();
    s.noise_sd = 0.0;
    expect_infeasible(s);
    s = tiny();
    s.missing_rate = 1.0;
    expect_infeasible(s);
    CHECK_THROWS_AS(recovery_profile(100, 3, 5, 1.0, 1), Error);
}
