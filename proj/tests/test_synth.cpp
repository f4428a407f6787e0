#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "tckae/eval.hpp"
#include "tckae/synth.hpp"

using namespace tckae;

namespace {

double missing_fraction(const TimeSeriesDataset& ds, int label_filter = -1) {
    long missing = 0, total = 0;
    for (int i = 0; i < ds.num_series(); ++i) {
        if (label_filter >= 0 && (*ds.labels)[static_cast<std::size_t>(i)] != label_filter)
            continue;
        for (int t = 0; t < ds.num_steps(); ++t)
            for (int v = 0; v < ds.num_variables(); ++v) {
                ++total;
                if (!ds.observed(i, t, v)) ++missing;
            }
    }
    return static_cast<double>(missing) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("missing_rate 0 yields a full mask") {
    synth::SynthConfig cfg;
    cfg.n = 8;
    cfg.t = 5;
    cfg.v = 3;
    cfg.missing_rate = 0.0;
    cfg.seed = 1;
    const TimeSeriesDataset ds = synth::generate(cfg);
    for (int i = 0; i < ds.num_series(); ++i)
        CHECK(ds.observed_count(i) == ds.num_steps() * ds.num_variables());
}

TEST_CASE("generation is deterministic per seed") {
    synth::SynthConfig cfg;
    cfg.n = 12;
    cfg.t = 6;
    cfg.v = 4;
    cfg.seed = 9;
    const TimeSeriesDataset a = synth::generate(cfg);
    const TimeSeriesDataset b = synth::generate(cfg);
    CHECK(*a.labels == *b.labels);
    for (int i = 0; i < a.num_series(); ++i)
        for (int t = 0; t < a.num_steps(); ++t)
            for (int v = 0; v < a.num_variables(); ++v) {
                REQUIRE(a.observed(i, t, v) == b.observed(i, t, v));
                if (a.observed(i, t, v)) REQUIRE(a.value(i, t, v) == b.value(i, t, v));
            }

    cfg.seed = 10;
    const TimeSeriesDataset c = synth::generate(cfg);
    bool any_difference = false;
    for (int i = 0; i < a.num_series() && !any_difference; ++i)
        for (int t = 0; t < a.num_steps() && !any_difference; ++t)
            for (int v = 0; v < a.num_variables(); ++v)
                if (a.observed(i, t, v) != c.observed(i, t, v) ||
                    (a.observed(i, t, v) && a.value(i, t, v) != c.value(i, t, v))) {
                    any_difference = true;
                    break;
                }
    CHECK(any_difference);
}

TEST_CASE("empirical missing fraction tracks the configured rate") {
    synth::SynthConfig cfg;
    cfg.n = 100;
    cfg.t = 20;
    cfg.v = 10;  // 20000 cells
    cfg.missing_rate = 0.5;
    cfg.informative_missingness = 0.8;
    cfg.seed = 5;
    const TimeSeriesDataset ds = synth::generate(cfg);
    CHECK(missing_fraction(ds) == doctest::Approx(0.5).epsilon(0.04));  // +-0.02 absolute
    CHECK(std::abs(missing_fraction(ds) - 0.5) < 0.02);
}

TEST_CASE("informative_missingness 0 gives class-independent rates") {
    synth::SynthConfig cfg;
    cfg.n = 200;
    cfg.t = 20;
    cfg.v = 10;
    cfg.missing_rate = 0.4;
    cfg.informative_missingness = 0.0;
    cfg.seed = 6;
    const TimeSeriesDataset ds = synth::generate(cfg);
    CHECK(std::abs(missing_fraction(ds, 0) - missing_fraction(ds, 1)) < 0.02);
}

TEST_CASE("every series keeps at least 2 observations even at high rates") {
    synth::SynthConfig cfg;
    cfg.n = 60;
    cfg.t = 4;
    cfg.v = 2;
    cfg.missing_rate = 0.85;
    cfg.informative_missingness = 0.0;
    cfg.seed = 3;
    const TimeSeriesDataset ds = synth::generate(cfg);
    for (int i = 0; i < ds.num_series(); ++i) CHECK(ds.observed_count(i) >= 2);
}

TEST_CASE("infeasible missing rate is rejected") {
    synth::SynthConfig cfg;
    cfg.missing_rate = 0.999;
    CHECK_THROWS_AS(synth::generate(cfg), DataError);
}

TEST_CASE("labels correlate with the mask when missingness is informative") {
    synth::SynthConfig cfg;
    cfg.n = 400;
    cfg.t = 20;
    cfg.v = 10;
    cfg.missing_rate = 0.5;
    cfg.informative_missingness = 1.0;
    cfg.seed = 21;
    const TimeSeriesDataset ds = synth::generate(cfg);

    // Mask-only features: per-variable observed fraction per series.
    const int n = ds.num_series(), V = ds.num_variables();
    Matrix features(n, V);
    for (int i = 0; i < n; ++i)
        for (int v = 0; v < V; ++v) {
            int observed = 0;
            for (int t = 0; t < ds.num_steps(); ++t)
                if (ds.observed(i, t, v)) ++observed;
            features(i, v) = static_cast<double>(observed) / ds.num_steps();
        }

    // Tiny logistic regression, gradient descent on the first 300 series.
    const int n_train = 300;
    Vector w = Vector::Zero(V);
    double bias = 0.0;
    for (int step = 0; step < 400; ++step) {
        Vector grad_w = Vector::Zero(V);
        double grad_b = 0.0;
        for (int i = 0; i < n_train; ++i) {
            const double z = features.row(i).dot(w) + bias;
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double err = p - (*ds.labels)[static_cast<std::size_t>(i)];
            grad_w += err * features.row(i).transpose();
            grad_b += err;
        }
        w -= (1.0 / n_train) * grad_w;
        bias -= (1.0 / n_train) * grad_b;
    }
    std::vector<int> truth;
    std::vector<double> scores;
    for (int i = n_train; i < n; ++i) {
        truth.push_back((*ds.labels)[static_cast<std::size_t>(i)]);
        scores.push_back(features.row(i).dot(w) + bias);
    }
    CHECK(eval::auc_roc(truth, scores) > 0.6);
}
