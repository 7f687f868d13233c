#include <random>

#include <doctest.h>

#include "efs/encoding.hpp"
#include "efs/error.hpp"
#include "helpers.hpp"

using namespace efs;
using namespace testing;

namespace {

Eigen::RowVectorXd row(std::initializer_list<double> v)
{
    Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) r[k++] = x;
    return r;
}

} // namespace

TEST_CASE("one-hot and ordinal encodings of a 4-level variable")
{
    const auto onehot_meta = nominal("v", {"A", "B", "C", "D"});
    const auto ordinal_meta = ordinal("v", {"A", "B", "C", "D"});
    const std::vector<std::string> values{"A", "B", "C", "D"};
    const auto oh = encode_onehot(values, onehot_meta);
    const auto od = encode_ordinal(values, ordinal_meta);
    REQUIRE(oh.rows() == 4);
    REQUIRE(oh.cols() == 3);
    REQUIRE(od.cols() == 3);

    CHECK(oh.row(0) == row({0, 0, 0}));
    CHECK(oh.row(1) == row({0, 0, 1}));
    CHECK(oh.row(2) == row({0, 1, 0}));
    CHECK(oh.row(3) == row({1, 0, 0}));

    CHECK(od.row(0) == row({0, 0, 0}));
    CHECK(od.row(1) == row({0, 0, 1}));
    CHECK(od.row(2) == row({0, 1, 1}));
    CHECK(od.row(3) == row({1, 1, 1}));

    CHECK(encoded_column_level(0, 4) == 3);
    CHECK(encoded_column_level(2, 4) == 1);
}

TEST_CASE("binary features encode to one 0/1 column")
{
    const std::vector<std::string> values{"no", "yes", "no"};
    const auto e = encode_onehot(values, nominal("b", {"no", "yes"}));
    REQUIRE(e.cols() == 1);
    CHECK(e(0, 0) == 0.0);
    CHECK(e(1, 0) == 1.0);
}

TEST_CASE("encoders reject unknown labels and the wrong kind")
{
    const std::vector<std::string> values{"Z"};
    CHECK_THROWS_AS(encode_onehot(values, nominal("v", {"A", "B"})), Error);
    const std::vector<std::string> ok{"A"};
    CHECK_THROWS_AS(encode_onehot(ok, ordinal("v", {"A", "B"})), Error);
    CHECK_THROWS_AS(encode_ordinal(ok, nominal("v", {"A", "B"})), Error);
}

TEST_CASE("encoded rows have the documented shape for any level count")
{
    std::mt19937_64 rng(11);
    for (std::size_t c = 2; c <= 9; ++c) {
        std::vector<std::string> labels;
        for (std::size_t l = 0; l < c; ++l) labels.push_back("L" + std::to_string(l));
        std::vector<std::string> values;
        std::uniform_int_distribution<std::size_t> pick(0, c - 1);
        for (int i = 0; i < 50; ++i) values.push_back(labels[pick(rng)]);
        const auto oh = encode_onehot(values, nominal("v", labels));
        const auto od = encode_ordinal(values, ordinal("v", labels));
        for (Eigen::Index i = 0; i < oh.rows(); ++i) {
            const double sum = oh.row(i).sum();
            CHECK((sum == 0.0 || sum == 1.0));
            // (0,...,0,1,...,1) read from the highest level down
            for (Eigen::Index k = 1; k < od.cols(); ++k) CHECK(od(i, k - 1) <= od(i, k));
            const auto level = static_cast<double>(std::stoul(values[static_cast<std::size_t>(i)].substr(1)));
            CHECK(od.row(i).sum() == level);
        }
    }
}

TEST_CASE("target levels follow yearly survival buckets")
{
    CHECK(encode_target(12.0, false) == 1);
    CHECK(encode_target(0.5, false) == 1);
    CHECK(encode_target(12.001, false) == 2);
    CHECK(encode_target(24.0, false) == 2);
    CHECK(encode_target(30.0, false) == 3);
    CHECK(encode_target(36.0, false) == 3);
    CHECK(encode_target(48.0, false) == 4);
    CHECK(encode_target(60.0, false) == 5);
    CHECK(encode_target(60.5, false) == 6);
    CHECK(encode_target(70.0, true) == 6);
    CHECK(encode_target(140.0, false) == 6);
}

TEST_CASE("censoring at or below 60 months is rejected")
{
    try {
        (void)encode_target(40.0, true);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CensoredBelowCutoff);
    }
}
