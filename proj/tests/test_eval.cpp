#include <doctest.h>

#include <cmath>
#include <random>

#include "dar/eval.hpp"
#include "dar/synthetic.hpp"

using namespace dar;
using doctest::Approx;

TEST_CASE("regression metrics examples") {
    const std::vector<double> y = {1.0, 2.0, 3.0};
    const auto m = regression_metrics(y, y);
    CHECK(m.rmse == 0.0);
    CHECK(m.mae == 0.0);
    REQUIRE(m.spearman.has_value());
    CHECK(*m.spearman == Approx(1.0));

    const auto tied = regression_metrics(std::vector<double>{1.0, 1.0, 2.0}, y);
    REQUIRE(tied.spearman.has_value());
    CHECK(*tied.spearman == Approx(0.866025).epsilon(1e-6));

    const auto flat = regression_metrics(std::vector<double>{2.0, 2.0, 2.0}, y);
    CHECK_FALSE(flat.spearman.has_value());
    CHECK(flat.rmse == Approx(std::sqrt(2.0 / 3.0)));
    CHECK(flat.mae == Approx(2.0 / 3.0));

    CHECK_THROWS_AS(regression_metrics(std::vector<double>{1.0}, y), std::domain_error);
    CHECK_THROWS_AS(regression_metrics(std::vector<double>{}, std::vector<double>{}), std::domain_error);
}

TEST_CASE("average ranks") {
    const std::vector<double> v = {10.0, 20.0, 10.0, 5.0};
    CHECK(average_ranks(v) == std::vector<double>{2.5, 4.0, 2.5, 1.0});
}

TEST_CASE("spearman is invariant under strictly increasing maps") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a(20), b(20);
        for (std::size_t i = 0; i < 20; ++i) {
            a[i] = n(gen);
            b[i] = a[i] + n(gen);
        }
        const double base = *spearman(a, b);
        std::vector<double> mapped = a;
        const double s = 0.5 + std::abs(n(gen));
        for (double& v : mapped) v = std::exp(s * v) + v * v * v;
        CHECK(*spearman(mapped, b) == Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("brackets and bracket rate") {
    RolloutSet s;
    s.predictions = {1.0, 3.0};
    s.valid = {true, true};
    s.target = 3.0;
    CHECK(brackets(s));
    s.target = 3.5;
    CHECK_FALSE(brackets(s));
    RolloutSet none;
    none.predictions = {0.0};
    none.valid = {false};
    const std::vector<RolloutSet> sets = {s, none};
    const auto r = bracket_rate(sets);
    CHECK(r.n_used == 1);
    CHECK(r.n_excluded == 1);
    CHECK(r.rate == 0.0);
}

TEST_CASE("distribution scores") {
    const std::vector<ScoredSamples> sets = {{{0.0, 10.0}, 5.0}, {{7.0}, 5.0}};
    const auto d = distribution_scores(sets, std::vector<double>{0.5});
    CHECK(d.mean_crps == Approx((2.5 + 2.0) / 2.0));
    CHECK(d.mean_wis == Approx((1.25 / 1.5 + 3.0 / 1.5) / 2.0));
}

TEST_CASE("calibration fit") {
    const std::vector<CalibrationPoint> pts = {{0.1, 0.2}, {1.0, 1.0}, {10.0, 5.0}};
    const auto r = calibration_fit(pts, 1.0);
    CHECK_FALSE(r.degenerate);
    CHECK(r.n_points == 3);
    // ln(0.2), 0, ln(5) is an exact affine image of ln(0.1), 0, ln(10).
    CHECK(r.log_pearson == Approx(1.0).epsilon(1e-12));
    CHECK(calibration_fit(pts, 7.0).log_pearson == Approx(r.log_pearson).epsilon(1e-12));

    const std::vector<CalibrationPoint> equal = {{1.0, 0.2}, {1.0, 1.0}, {1.0, 5.0}};
    CHECK(calibration_fit(equal, 1.0).degenerate);

    const std::vector<CalibrationPoint> zeros = {{0.0, 0.2}, {1.0, 0.0}, {1.0, 1.0}, {2.0, 3.0}};
    const auto z = calibration_fit(zeros, 1.0);
    CHECK(z.n_excluded == 2);
    CHECK(z.n_points == 2);
    CHECK(z.degenerate);
}

TEST_CASE("evaluate_policy on a uniform policy") {
    const MixtureTaskSpec spec;
    const Dataset test = make_dataset(spec, 1, 30, 2).test;
    const GridPolicy policy;
    EvalConfig cfg;
    cfg.n_samples = 16;
    cfg.repeats = 2;
    cfg.seed = 99;
    const MetricsReport a = evaluate_policy(policy, test, cfg);
    const MetricsReport b = evaluate_policy(policy, test, cfg);
    CHECK(a.n_examples == 30);
    CHECK(a.repeats == 2);
    CHECK(a.overall.rmse == b.overall.rmse);
    CHECK(a.overall.mean_crps > 0.0);
    CHECK(a.regions.size() == 3);
    CHECK(a.regions.at(Region::interp).n == 10);
    CHECK(a.overall.bracket_rate > 0.5);

    const CalibrationReport c = evaluate_calibration(policy, test, 16, 99);
    CHECK(c.n_points + c.n_excluded == 30);
}

TEST_CASE("population std") {
    CHECK(population_std(std::vector<double>{1.0, 3.0}) == Approx(1.0));
    CHECK(population_std(std::vector<double>{4.0}) == 0.0);
    CHECK(mean_of(std::vector<double>{1.0, 2.0, 6.0}) == Approx(3.0));
}
