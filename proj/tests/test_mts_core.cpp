#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "tckae/core.hpp"

using namespace tckae;
using testutil::make_dataset;

namespace {
const double kNan = std::numeric_limits<double>::quiet_NaN();
}

TEST_CASE("load_dataset derives the mask from NaN sentinels") {
    testutil::TempDir dir;
    const std::string path = dir.file("data.csv");
    write_file_atomic(path, "2,2,1,0\n1\nNaN\n3\n4\n");
    const TimeSeriesDataset ds = load_dataset(path);
    CHECK(ds.num_series() == 2);
    CHECK(ds.num_steps() == 2);
    CHECK(ds.num_variables() == 1);
    CHECK(ds.observed(0, 0, 0));
    CHECK_FALSE(ds.observed(0, 1, 0));
    CHECK(ds.observed(1, 0, 0));
    CHECK(ds.observed(1, 1, 0));
    CHECK(ds.value(0, 0, 0) == 1.0);
    CHECK(ds.value(1, 1, 0) == 4.0);
    CHECK_FALSE(ds.labels.has_value());
}

TEST_CASE("load_dataset rejects a header that disagrees with the row count") {
    testutil::TempDir dir;
    const std::string path = dir.file("data.csv");
    write_file_atomic(path, "3,2,1,0\n1\n2\n3\n4\n");
    CHECK_THROWS_AS(load_dataset(path), DataError);
}

TEST_CASE("load_dataset rejects ragged rows, bad labels, non-finite values") {
    testutil::TempDir dir;
    const std::string path = dir.file("data.csv");
    write_file_atomic(path, "1,2,2,0\n1,2\n3\n");
    CHECK_THROWS_AS(load_dataset(path), DataError);
    write_file_atomic(path, "1,2,2,1\n1,2\n3,4\n7\n");
    CHECK_THROWS_AS(load_dataset(path), DataError);
    write_file_atomic(path, "1,2,2,0\n1,inf\n3,4\n");
    CHECK_THROWS_AS(load_dataset(path), DataError);
    CHECK_THROWS_AS(load_dataset(dir.file("missing.csv")), DataError);
}

TEST_CASE("save/load round trip preserves values, mask and labels exactly") {
    testutil::TempDir dir;
    Rng rng(7);
    TimeSeriesDataset ds = testutil::random_dataset(rng, 5, 4, 3, 0.4);
    ds.labels = std::vector<int>{1, 0, 0, 1, 1};
    const std::string path = dir.file("roundtrip.csv");
    save_dataset(ds, path);
    const TimeSeriesDataset back = load_dataset(path);
    REQUIRE(back.num_series() == ds.num_series());
    for (int i = 0; i < ds.num_series(); ++i)
        for (int t = 0; t < ds.num_steps(); ++t)
            for (int v = 0; v < ds.num_variables(); ++v) {
                REQUIRE(back.observed(i, t, v) == ds.observed(i, t, v));
                if (ds.observed(i, t, v)) REQUIRE(back.value(i, t, v) == ds.value(i, t, v));
            }
    CHECK(*back.labels == *ds.labels);
}

TEST_CASE("impute leaves fully observed data untouched") {
    const auto ds = make_dataset(1, 3, 1, {1.0, 2.0, 3.0});
    for (const auto& method :
         {ImputationMethod::zero(), ImputationMethod::locf(), ImputationMethod::mean_from(ds)}) {
        const TimeSeriesDataset out = impute(ds, method);
        for (int t = 0; t < 3; ++t) CHECK(out.value(0, t, 0) == ds.value(0, t, 0));
    }
}

TEST_CASE("zero imputation fills gaps with 0") {
    const auto ds = make_dataset(1, 3, 1, {1.0, kNan, 3.0});
    const TimeSeriesDataset out = impute(ds, ImputationMethod::zero());
    CHECK(out.value(0, 0, 0) == 1.0);
    CHECK(out.value(0, 1, 0) == 0.0);
    CHECK(out.value(0, 2, 0) == 3.0);
    CHECK_FALSE(out.observed(0, 1, 0));  // mask untouched
}

TEST_CASE("locf carries the last observation forward, 0 before the first") {
    const auto ds = make_dataset(1, 4, 1, {2.0, kNan, kNan, 5.0});
    const TimeSeriesDataset out = impute(ds, ImputationMethod::locf());
    CHECK(out.value(0, 1, 0) == 2.0);
    CHECK(out.value(0, 2, 0) == 2.0);
    CHECK(out.value(0, 3, 0) == 5.0);

    const auto lead = make_dataset(1, 2, 1, {kNan, 7.0});
    const TimeSeriesDataset out2 = impute(lead, ImputationMethod::locf());
    CHECK(out2.value(0, 0, 0) == 0.0);
    CHECK(out2.value(0, 1, 0) == 7.0);
}

TEST_CASE("mean imputation substitutes the per-variable training mean") {
    const auto ds = make_dataset(1, 3, 1, {2.0, kNan, 4.0});
    ImputationMethod method;
    method.tag = Imputation::Mean;
    method.means = {3.0};
    const TimeSeriesDataset out = impute(ds, method);
    CHECK(out.value(0, 1, 0) == 3.0);

    ImputationMethod missing_stats;
    missing_stats.tag = Imputation::Mean;
    CHECK_THROWS_AS(impute(ds, missing_stats), std::invalid_argument);
}

TEST_CASE("standardize computes observed-cell statistics and applies them") {
    const auto train = make_dataset(1, 3, 1, {0.0, kNan, 2.0});
    auto [out, stats] = standardize(train, train);
    CHECK(stats.mean[0] == doctest::Approx(1.0));
    CHECK(stats.stddev[0] == doctest::Approx(1.0));
    CHECK(out.value(0, 2, 0) == doctest::Approx(1.0));
    CHECK_FALSE(out.observed(0, 1, 0));
}

TEST_CASE("standardize clamps zero-variance variables to std 1") {
    const auto train = make_dataset(1, 3, 1, {5.0, 5.0, 5.0});
    auto [out, stats] = standardize(train, train);
    CHECK(stats.stddev[0] == 1.0);
    for (int t = 0; t < 3; ++t) CHECK(out.value(0, t, 0) == doctest::Approx(0.0));
}

TEST_CASE("standardizing train against itself centers every variable") {
    Rng rng(11);
    const TimeSeriesDataset train = testutil::random_dataset(rng, 20, 6, 3, 0.3);
    auto [out, stats] = standardize(train, train);
    for (int v = 0; v < 3; ++v) {
        double sum = 0.0;
        long count = 0;
        for (int i = 0; i < out.num_series(); ++i)
            for (int t = 0; t < out.num_steps(); ++t)
                if (out.observed(i, t, v)) {
                    sum += out.value(i, t, v);
                    ++count;
                }
        CHECK(sum / count == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("standardize rejects a variable with no observed training cells") {
    const auto train = make_dataset(1, 2, 2, {1.0, kNan, 2.0, kNan});
    CHECK_THROWS_AS(compute_standardization(train), DataError);
}

TEST_CASE("standardize statistics ignore values hidden behind the mask") {
    Rng rng(13);
    TimeSeriesDataset a = testutil::random_dataset(rng, 10, 5, 2, 0.4);
    TimeSeriesDataset b = a;
    // plant garbage in the value slots of masked cells
    for (int i = 0; i < b.num_series(); ++i)
        for (int t = 0; t < b.num_steps(); ++t)
            for (int v = 0; v < b.num_variables(); ++v)
                if (!b.observed(i, t, v)) {
                    b.fill_value(i, t, v, 1e9);
                }
    const StandardizationStats sa = compute_standardization(a);
    const StandardizationStats sb = compute_standardization(b);
    CHECK(sa.mean == sb.mean);
    CHECK(sa.stddev == sb.stddev);
}

TEST_CASE("flatten uses time-major order") {
    const auto ds = make_dataset(1, 2, 2, {1.0, 2.0, 3.0, 4.0});
    const Matrix flat = flatten(ds);
    REQUIRE(flat.rows() == 1);
    REQUIRE(flat.cols() == 4);
    CHECK(flat(0, 0) == 1.0);
    CHECK(flat(0, 1) == 2.0);
    CHECK(flat(0, 2) == 3.0);
    CHECK(flat(0, 3) == 4.0);

    const auto tiny = make_dataset(1, 1, 1, {9.0});
    CHECK(flatten(tiny)(0, 0) == 9.0);
}

TEST_CASE("flatten rejects sentinel cells; unflatten inverts it") {
    const auto holes = make_dataset(1, 2, 1, {1.0, kNan});
    CHECK_THROWS_AS(flatten(holes), DataError);

    Rng rng(17);
    TimeSeriesDataset ds = testutil::random_dataset(rng, 6, 3, 4, 0.0);
    const Matrix flat = flatten(ds);
    const TimeSeriesDataset back = unflatten(flat, 3, 4);
    for (int i = 0; i < 6; ++i)
        for (int t = 0; t < 3; ++t)
            for (int v = 0; v < 4; ++v) CHECK(back.value(i, t, v) == ds.value(i, t, v));
    CHECK(flatten(back) == flat);
}

TEST_CASE("split sizes follow floor(N*fraction)") {
    Rng rng(19);
    {
        const TimeSeriesDataset ds = testutil::random_dataset(rng, 883, 2, 1, 0.0);
        auto [train, test] = split_train_test(ds, 0.8);
        CHECK(train.num_series() == 706);
        CHECK(test.num_series() == 177);
    }
    {
        const TimeSeriesDataset ds = testutil::random_dataset(rng, 10, 2, 1, 0.0);
        auto [train, test] = split_train_test(ds, 0.8);
        CHECK(train.num_series() == 8);
        CHECK(test.num_series() == 2);
    }
    {
        const TimeSeriesDataset ds = testutil::random_dataset(rng, 1, 2, 2, 0.0);
        CHECK_THROWS_AS(split_train_test(ds, 0.8), DataError);
    }
}

TEST_CASE("split preserves order and labels deterministically") {
    Rng rng(23);
    TimeSeriesDataset ds = testutil::random_dataset(rng, 12, 2, 2, 0.2);
    std::vector<int> labels(12);
    for (int i = 0; i < 12; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
    ds.labels = labels;
    auto [train, test] = split_train_test(ds, 0.75);
    REQUIRE(train.num_series() == 9);
    for (int i = 0; i < 9; ++i) {
        CHECK((*train.labels)[static_cast<std::size_t>(i)] == i % 2);
        for (int t = 0; t < 2; ++t)
            for (int v = 0; v < 2; ++v) {
                CHECK(train.observed(i, t, v) == ds.observed(i, t, v));
                if (ds.observed(i, t, v)) CHECK(train.value(i, t, v) == ds.value(i, t, v));
            }
    }
    for (int i = 0; i < 3; ++i)
        CHECK((*test.labels)[static_cast<std::size_t>(i)] == (i + 9) % 2);
}

TEST_CASE("property: imputation never modifies observed cells and leaves no sentinel") {
    Rng rng(29);
    for (int trial = 0; trial < 25; ++trial) {
        const TimeSeriesDataset ds = testutil::random_dataset(rng, 8, 5, 3, rng.uniform(0.0, 0.7));
        for (const auto& method : {ImputationMethod::zero(), ImputationMethod::locf(),
                                   ImputationMethod::mean_from(ds)}) {
            const TimeSeriesDataset out = impute(ds, method);
            for (int i = 0; i < ds.num_series(); ++i)
                for (int t = 0; t < ds.num_steps(); ++t)
                    for (int v = 0; v < ds.num_variables(); ++v) {
                        CHECK(out.observed(i, t, v) == ds.observed(i, t, v));
                        if (ds.observed(i, t, v))
                            CHECK(out.value(i, t, v) == ds.value(i, t, v));
                        else
                            CHECK(std::isfinite(out.value(i, t, v)));
                    }
        }
    }
}

TEST_CASE("matrix csv round trip") {
    testutil::TempDir dir;
    Rng rng(31);
    Matrix m(3, 4);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = rng.normal();
    const std::string path = dir.file("m.csv");
    save_matrix_csv(m, path);
    const Matrix back = load_matrix_csv(path);
    CHECK(back == m);  // bitwise round trip via shortest representation
}
