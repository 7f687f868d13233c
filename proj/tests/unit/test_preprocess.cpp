#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "efs/error.hpp"
#include "efs/preprocess.hpp"
#include "efs/synthgen.hpp"
#include "helpers.hpp"

using namespace efs;
using namespace testing;

namespace {

std::vector<std::size_t> all_rows(const Dataset& ds)
{
    std::vector<std::size_t> r(ds.rows());
    std::iota(r.begin(), r.end(), 0);
    return r;
}

// 100 rows; `missing` leading cells of column "gappy" are missing.
Dataset with_missing_share(std::size_t missing)
{
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < 100; ++i) {
        cells.emplace_back(static_cast<double>(i));
        cells.emplace_back(i < missing ? Cell{Missing{}} : Cell{static_cast<double>(i % 7)});
    }
    return Dataset({numeric("x"), numeric("gappy")}, cells, months(100));
}

bool has_column(const Dataset& ds, const std::string& name)
{
    return ds.feature_index(name).has_value();
}

} // namespace

TEST_CASE("columns are dropped only when strictly more than the threshold is missing")
{
    CHECK_FALSE(has_column(drop_columns_by_missingness(with_missing_share(26), 0.25), "gappy"));
    CHECK(has_column(drop_columns_by_missingness(with_missing_share(25), 0.25), "gappy"));
}

TEST_CASE("constant and duplicated columns are dropped")
{
    std::vector<Cell> cells;
    for (int i = 0; i < 6; ++i) {
        cells.emplace_back(static_cast<double>(i));
        cells.emplace_back(5.0);
        cells.emplace_back(static_cast<double>(i));
        cells.emplace_back(Level{static_cast<std::size_t>(i % 2)});
    }
    const Dataset ds({numeric("a"), numeric("flat"), numeric("a_copy"), nominal("n", {"x", "y"})}, cells, months(6));
    const auto audit = audit_columns(ds, 0.25, all_rows(ds));
    CHECK(audit.keep == std::vector<std::size_t>{0, 3});
    REQUIRE(audit.dropped.size() == 2);
    CHECK(audit.dropped[0].name == "flat");
    CHECK(audit.dropped[0].reason == "constant");
    CHECK(audit.dropped[1].name == "a_copy");
    CHECK(audit.dropped[1].reason == "duplicate of a");

    SUBCASE("the audit only looks at the given rows")
    {
        const std::vector<std::size_t> two{0, 2};
        const auto part = audit_columns(ds, 0.25, two);
        // n is constant on rows 0 and 2
        CHECK(part.keep == std::vector<std::size_t>{0});
    }
}

TEST_CASE("rows are dropped by their worst block")
{
    std::vector<FeatureMeta> f;
    for (int k = 0; k < 5; ++k) f.push_back(numeric("p" + std::to_string(k), Block::p));
    for (int k = 0; k < 5; ++k) f.push_back(numeric("b" + std::to_string(k), Block::b));
    std::vector<Cell> cells;
    auto add_row = [&](int miss_p, int miss_b) {
        for (int k = 0; k < 5; ++k) cells.push_back(k < miss_p ? Cell{Missing{}} : Cell{1.0 * k});
        for (int k = 0; k < 5; ++k) cells.push_back(k < miss_b ? Cell{Missing{}} : Cell{2.0 * k});
    };
    add_row(0, 3); // 60% of block b missing
    add_row(0, 0); // complete
    add_row(2, 2); // 40% in each block
    add_row(3, 0);
    const Dataset ds(f, cells, months(4));
    CHECK(rows_to_keep(ds, 0.5) == std::vector<std::size_t>{1, 2});
    CHECK(drop_rows_by_missingness(ds, 0.5).rows() == 2);
}

TEST_CASE("knn imputation of a numeric cell takes the neighbour median")
{
    // Row 0 misses x; rows 1-5 are its five nearest donors on d, rows 6-7
    // are far away.
    const std::vector<double> d{0.0, 0.1, -0.1, 0.2, -0.2, 0.3, 9.0, 9.5};
    const std::vector<double> x{NAN, 1.0, 2.0, 2.0, 3.0, 5.0, 100.0, 100.0};
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < d.size(); ++i) {
        cells.emplace_back(d[i]);
        cells.push_back(std::isnan(x[i]) ? Cell{Missing{}} : Cell{x[i]});
    }
    const Dataset ds({numeric("d"), numeric("x")}, cells, months(d.size()));
    const auto imp = knn_impute_from(ds, all_rows(ds), 5);
    CHECK(std::get<double>(imp.data.cell(0, 1)) == 2.0);
    REQUIRE(imp.cells.size() == 1);
    auto donors = imp.cells[0].donors;
    std::sort(donors.begin(), donors.end());
    CHECK(donors == std::vector<std::size_t>{1, 2, 3, 4, 5});
}

TEST_CASE("knn imputation of an ordinal cell maps the integer median to a level")
{
    const std::vector<double> d{0.0, 0.1, -0.1, 0.2, -0.2, 0.3, 8.0};
    const std::vector<int> code{-1, 0, 1, 1, 2, 2, 0};
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < d.size(); ++i) {
        cells.emplace_back(d[i]);
        cells.push_back(code[i] < 0 ? Cell{Missing{}} : Cell{Level{static_cast<std::size_t>(code[i])}});
    }
    const Dataset ds({numeric("d"), ordinal("o", {"A", "B", "C"})}, cells, months(d.size()));
    const auto out = knn_impute(ds, 5);
    CHECK(std::get<Level>(out.cell(0, 1)).index == 1);
}

TEST_CASE("nominal imputation takes the most frequent level, lowest on ties")
{
    const std::vector<double> d{0.0, 0.1, -0.1, 0.2, -0.2, 0.3};
    const std::vector<int> code{-1, 2, 1, 2, 1, 0};
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < d.size(); ++i) {
        cells.emplace_back(d[i]);
        cells.push_back(code[i] < 0 ? Cell{Missing{}} : Cell{Level{static_cast<std::size_t>(code[i])}});
    }
    const Dataset ds({numeric("d"), nominal("n", {"x", "y", "z"})}, cells, months(d.size()));
    CHECK(std::get<Level>(knn_impute(ds, 5).cell(0, 1)).index == 1);
}

TEST_CASE("imputation is the identity on complete data")
{
    auto spec = recovery_profile(40, 10, 2, 1.0, 3);
    const auto ds = generate(spec);
    CHECK(knn_impute(ds, 5) == ds);
}

TEST_CASE("imputed categorical values are declared levels and only missing cells change")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto raw = generate(paper_profile(seed));
        const auto ds = drop_rows_by_missingness(drop_columns_by_missingness(raw, 0.25), 0.5);
        const auto imp = knn_impute_from(ds, all_rows(ds), 5);
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            for (std::size_t j = 0; j < ds.cols(); ++j) {
                const auto& before = ds.cell(i, j);
                const auto& after = imp.data.cell(i, j);
                REQUIRE_FALSE(is_missing(after));
                if (!is_missing(before)) CHECK(before == after);
                if (const auto* l = std::get_if<Level>(&after)) CHECK(l->index < ds.feature(j).levels.size());
            }
        }
    }
}

TEST_CASE("donors never include rows outside the donor set")
{
    const auto raw = generate(paper_profile(4));
    const auto ds = drop_rows_by_missingness(drop_columns_by_missingness(raw, 0.25), 0.5);
    std::vector<std::size_t> donors;
    for (std::size_t i = 0; i < ds.rows(); i += 2) donors.push_back(i);
    const auto imp = knn_impute_from(ds, donors, 5);
    for (const auto& c : imp.cells) {
        for (auto r : c.donors) {
            CHECK(r % 2 == 0);
            CHECK(r != c.row);
        }
    }
}

TEST_CASE("the paper-shaped synthetic table cleans to 63 x 134")
{
    const auto raw = generate(paper_profile(1));
    CHECK(raw.rows() == 66);
    CHECK(raw.cols() == 137);
    const auto keep = rows_to_keep(raw, 0.5);
    const auto kept = raw.select_rows(keep);
    std::vector<std::size_t> rows(kept.rows());
    std::iota(rows.begin(), rows.end(), 0);
    const auto result = run_pipeline(kept, rows);
    CHECK(result.train.rows() == 63);
    CHECK(result.train.cols() == 134);
    CHECK(result.dropped_columns.size() == 45);
}

TEST_CASE("without categorical features the encoded columns are the numeric columns")
{
    SynthSpec spec;
    spec.m = 60;
    spec.features = {{"a"}, {"b"}, {"c", Block::b}, {"d", Block::h}, {"e", Block::t, Kind::numeric, 0, true}};
    spec.planted = {{"a", 1.0}};
    spec.seed = 8;
    const auto ds = generate(spec);
    std::vector<std::size_t> rows(ds.rows());
    std::iota(rows.begin(), rows.end(), 0);
    const auto result = run_pipeline(ds, rows);
    REQUIRE(result.train.cols() == ds.cols());
    for (std::size_t j = 0; j < ds.cols(); ++j) CHECK(result.train.columns[j].name() == ds.feature(j).name);
}

TEST_CASE("test rows never influence fitted parameters")
{
    const auto raw = generate(paper_profile(2));
    const auto ds = raw.select_rows(rows_to_keep(raw, 0.5));
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < ds.rows(); ++i) (i % 5 == 1 ? test : train).push_back(i);
    const auto base = run_pipeline(ds, train);

    // Scramble every test cell and target.
    auto cells = ds.cells();
    std::mt19937_64 rng(17);
    for (auto i : test) {
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            auto& c = cells[i * ds.cols() + j];
            if (std::holds_alternative<double>(c)) c = std::get<double>(c) * 3.0 + 1000.0;
            else if (std::holds_alternative<Level>(c)) c = Level{rng() % ds.feature(j).levels.size()};
            else c = ds.feature(j).categorical() ? Cell{Level{0}} : Cell{-5.0};
        }
    }
    const auto perturbed = run_pipeline(ds.with_cells(cells), train);
    CHECK(perturbed.params == base.params);
    CHECK(perturbed.train.values == base.train.values);
    CHECK(perturbed.train.columns == base.train.columns);
    CHECK(perturbed.dropped_columns.size() == base.dropped_columns.size());
    CHECK(base.test.rows() == test.size());
}

TEST_CASE("encode_rows reproduces the pipeline's test matrix")
{
    const auto ds = generate(recovery_profile(50, 12, 3, 1.0, 5));
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < ds.rows(); ++i) (i % 4 == 0 ? test : train).push_back(i);
    const auto result = run_pipeline(ds, train);
    const auto again = encode_rows(ds, test, result.params);
    CHECK(again.values.isApprox(result.test.values, 1e-12));
    CHECK(again.target == result.test.target);
}
