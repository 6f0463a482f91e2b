#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "sr/fitness.hpp"

using namespace sr;

namespace {

Dataset tiny_dataset(std::vector<double> targets) {
    Dataset ds;
    ds.columns = {"v1"};
    for (std::size_t i = 0; i < targets.size(); ++i)
        ds.push_row(std::array{static_cast<double>(i + 1)}, targets[i]);
    return ds;
}

// Welford-style streaming recomputation, independent of score()'s
// accumulate-then-divide path.
double streaming_metric(Metric m, std::span<const double> preds, std::span<const double> targets) {
    double mean = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        double term;
        double r = preds[i] - targets[i];
        switch (m) {
            case Metric::MAE: term = std::fabs(r); break;
            case Metric::FracMAE: term = std::fabs(r) / std::fabs(targets[i]); break;
            case Metric::RMS: term = r * r; break;
            case Metric::FracRMS: term = (r / targets[i]) * (r / targets[i]); break;
        }
        mean += (term - mean) / static_cast<double>(i + 1);
    }
    return (m == Metric::RMS || m == Metric::FracRMS) ? std::sqrt(mean) : mean;
}

}  // namespace

TEST_CASE("score: constant predictor 0 on targets {1,2,3} has MAE 2") {
    auto ds = tiny_dataset({1, 2, 3});
    FitnessSpec spec{Metric::MAE, 0.0, 1e30};
    CHECK(score(parse("0"), ds, spec) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("score: exact predictor scores 0 without parsimony") {
    Dataset ds;
    ds.columns = {"v1"};
    for (double x : {1.0, 2.5, 7.0}) ds.push_row(std::array{x}, 3.0 * x);
    FitnessSpec spec{Metric::MAE, 0.0, 1e30};
    CHECK(score(parse("(3 * v1)"), ds, spec) == doctest::Approx(0.0));
}

TEST_CASE("score: parsimony penalty is linear in node count") {
    auto ds = tiny_dataset({1, 2, 3});
    FitnessSpec spec{Metric::MAE, 0.001, 1e30};
    // (0 + 0) + 0 has 5 nodes vs the 3-node (0 + 0) + same residuals
    double five = score(parse("((0 + 0) + 0)"), ds, spec);
    double three = score(parse("(0 + 0)"), ds, spec);
    CHECK(five - three == doctest::Approx(0.002).epsilon(1e-9));
}

TEST_CASE("score: any invalid row dominates") {
    Dataset ds;
    ds.columns = {"v1"};
    ds.push_row(std::array{4.0}, 1.0);
    ds.push_row(std::array{-1.0}, 1.0);  // log(-1) invalid
    ds.push_row(std::array{9.0}, 2.0);
    FitnessSpec spec{Metric::MAE, 1e-4, 1e30};
    CHECK(score(parse("log(v1)"), ds, spec) >= spec.invalid_sentinel);
}

TEST_CASE("score: fractional metric rejects zero targets at load check") {
    auto ds = tiny_dataset({1, 0, 3});
    CHECK_THROWS_AS(check_targets_for_metric(ds, Metric::FracMAE), DatasetError);
    CHECK_NOTHROW(check_targets_for_metric(ds, Metric::MAE));
}

TEST_CASE("score: hand-computed fixtures for every metric") {
    auto ds = tiny_dataset({2, 4, 8});  // predictor v1 gives residuals -1,-2,-5
    FitnessSpec spec{Metric::MAE, 0.0, 1e30};
    auto tree = parse("v1");

    spec.metric = Metric::MAE;
    CHECK(score(tree, ds, spec) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    spec.metric = Metric::FracMAE;
    CHECK(score(tree, ds, spec) ==
          doctest::Approx((0.5 + 0.5 + 0.625) / 3.0).epsilon(1e-12));
    spec.metric = Metric::RMS;
    CHECK(score(tree, ds, spec) == doctest::Approx(std::sqrt(30.0 / 3.0)).epsilon(1e-12));
    spec.metric = Metric::FracRMS;
    CHECK(score(tree, ds, spec) ==
          doctest::Approx(std::sqrt((0.25 + 0.25 + 0.390625) / 3.0)).epsilon(1e-12));
}

TEST_CASE("score agrees with a streaming recomputation on random cases") {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + rng.index(40);
        Dataset ds;
        ds.columns = {"v1"};
        std::vector<double> preds;
        for (std::size_t i = 0; i < n; ++i) {
            double x = rng.uniform(-50.0, 50.0);
            ds.push_row(std::array{x}, rng.uniform(0.5, 100.0));
            preds.push_back(x);
        }
        Metric m = (trial % 2 == 0) ? Metric::MAE : Metric::RMS;
        FitnessSpec spec{m, 0.0, 1e30};
        double got = score(parse("v1"), ds, spec);
        double expect = streaming_metric(m, preds, ds.targets);
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("RMS >= MAE on random residual sets") {
    Rng rng(78);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + rng.index(30);
        Dataset ds;
        ds.columns = {"v1"};
        for (std::size_t i = 0; i < n; ++i)
            ds.push_row(std::array{rng.uniform(-100.0, 100.0)}, rng.uniform(-10.0, 10.0));
        FitnessSpec mae{Metric::MAE, 0.0, 1e30}, rms{Metric::RMS, 0.0, 1e30};
        auto tree = parse("v1");
        CHECK(score(tree, ds, rms) >= score(tree, ds, mae) - 1e-12);
    }
}

TEST_CASE("compiled evaluator matches the tree walker") {
    Config cfg;
    cfg.n_var = 4;
    cfg.m_depth = 6;
    cfg.p_dormant = 0.5;
    Rng rng(79);
    for (int trial = 0; trial < 2000; ++trial) {
        auto t = random_tree(cfg, rng, false);
        CompiledExpr prog(t);
        std::array<double, 4> row;
        for (auto& x : row) x = rng.uniform(-20.0, 20.0);
        auto ref = evaluate(t, {row});
        double got = prog.eval(row);
        if (ref.has_value()) {
            REQUIRE_FALSE(std::isnan(got));
            CHECK(got == *ref);
        } else {
            CHECK(std::isnan(got));
        }
    }
}

TEST_CASE("make_split: half/half partition") {
    Rng rng(80);
    auto plan = make_split(1000, rng);
    CHECK(plan.training.size() == 500);
    CHECK(plan.testing.size() == 500);

    std::vector<bool> seen(1000, false);
    for (auto i : plan.training) seen[i] = true;
    for (auto i : plan.testing) {
        CHECK_FALSE(seen[i]);  // disjoint
        seen[i] = true;
    }
    CHECK(std::count(seen.begin(), seen.end(), true) == 1000);

    auto odd = make_split(3, rng);
    CHECK(odd.training.size() + odd.testing.size() == 3);
    CHECK(std::abs(static_cast<int>(odd.training.size()) -
                   static_cast<int>(odd.testing.size())) == 1);
}

TEST_CASE("make_split: fresh partitions differ") {
    Rng rng(81);
    int collisions = 0;
    auto first = make_split(100, rng);
    for (int i = 0; i < 100; ++i) {
        auto next = make_split(100, rng);
        if (next.testing == first.testing) ++collisions;
    }
    CHECK(collisions == 0);
}
