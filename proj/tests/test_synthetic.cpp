#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dar/errors.hpp"
#include "dar/synthetic.hpp"

using namespace dar;
using doctest::Approx;

TEST_CASE("mixture_params at x = 0") {
    const MixtureTaskSpec spec;
    const MixturePoint p = mixture_params(spec, 0.0);
    CHECK(p.pi == Approx(0.5));
    CHECK(p.mu1 == Approx(0.0));
    CHECK(p.mu2 == Approx(-1.2));
    CHECK(p.sigma == Approx(0.19));
    CHECK(true_mean(spec, 0.0) == Approx(-0.6));
}

TEST_CASE("mixture_params at x = 1 (values from the closed form)") {
    const MixtureTaskSpec spec;
    const MixturePoint p = mixture_params(spec, 1.0);
    CHECK(p.pi == Approx(0.231475).epsilon(1e-6));
    CHECK(p.mu1 == Approx(1.0 / 3.0 + 1.2 * std::sin(0.8)).epsilon(1e-12));
    CHECK(p.mu1 == Approx(1.194161).epsilon(1e-6));
    CHECK(p.mu2 == Approx(1.0 / 3.0 - 1.2 * std::cos(0.8)).epsilon(1e-12));
    CHECK(p.mu2 == Approx(-0.502715).epsilon(1e-6));
    CHECK(p.sigma == Approx(0.12 + 0.28 * std::pow(0.5 + 0.5 * std::sin(0.7), 2)).epsilon(1e-12));
    CHECK(p.sigma == Approx(0.309242).epsilon(1e-6));
    CHECK(true_mean(spec, 1.0) == Approx(-0.109930).epsilon(1e-5));
}

TEST_CASE("true_variance at x = 0") {
    const MixtureTaskSpec spec;
    // sigma^2 + pi (1-pi) (mu1 - mu2)^2 = 0.0361 + 0.25 * 1.44
    CHECK(true_variance(spec, 0.0) == Approx(0.3961).epsilon(1e-12));
}

TEST_CASE("mixture_params is finite for extreme inputs") {
    const MixtureTaskSpec spec;
    for (double x : {-1e6, -50.0, -10.0, 10.0, 50.0, 1e6}) {
        const MixturePoint p = mixture_params(spec, x);
        CHECK(std::isfinite(p.pi));
        CHECK(p.pi >= 0.0);
        CHECK(p.pi <= 1.0);
        CHECK(p.sigma > 0.0);
    }
}

TEST_CASE("mixture_cdf is monotone with correct limits") {
    const MixtureTaskSpec spec;
    for (double x : {-8.0, -1.0, 0.0, 2.5, 9.0}) {
        double prev = 0.0;
        for (double y = -20.0; y <= 20.0; y += 0.25) {
            const double c = mixture_cdf(spec, x, y);
            CHECK(c >= prev - 1e-15);
            prev = c;
        }
        CHECK(mixture_cdf(spec, x, -100.0) == Approx(0.0));
        CHECK(mixture_cdf(spec, x, 100.0) == Approx(1.0));
    }
}

TEST_CASE("spec validation") {
    MixtureTaskSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.noise_base = 0.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = MixtureTaskSpec{};
    spec.extrap_left = {-10.0, -5.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("region_of") {
    const MixtureTaskSpec spec;
    CHECK(region_of(spec, 0.0) == Region::interp);
    CHECK(region_of(spec, -6.0) == Region::interp);
    CHECK(region_of(spec, 6.0) == Region::interp);
    CHECK(region_of(spec, -6.5) == Region::extrap_left);
    CHECK(region_of(spec, 7.0) == Region::extrap_right);
    CHECK(region_from_string(to_string(Region::extrap_left)) == Region::extrap_left);
    CHECK_THROWS(region_from_string("nowhere"));
}

TEST_CASE("make_dataset layout and determinism") {
    const MixtureTaskSpec spec;
    const DatasetPair a = make_dataset(spec, 100, 31, 9);
    const DatasetPair b = make_dataset(spec, 100, 31, 9);
    const DatasetPair c = make_dataset(spec, 100, 31, 10);
    REQUIRE(a.train.size() == 100);
    REQUIRE(a.test.size() == 31);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        same = same && a.train.records[i].x == b.train.records[i].x && a.train.records[i].y == b.train.records[i].y;
        differs = differs || a.train.records[i].x != c.train.records[i].x;
        CHECK(a.train.records[i].x >= -6.0);
        CHECK(a.train.records[i].x <= 6.0);
        CHECK(a.train.records[i].region == Region::interp);
    }
    CHECK(same);
    CHECK(differs);

    std::size_t counts[3] = {0, 0, 0};
    for (const Record& r : a.test.records) {
        ++counts[static_cast<int>(r.region)];
        CHECK(region_of(spec, r.x) == r.region);
    }
    CHECK(counts[0] == 11);
    CHECK(counts[1] == 10);
    CHECK(counts[2] == 10);

    // Growing the test split does not move existing train records.
    const DatasetPair bigger = make_dataset(spec, 100, 60, 9);
    CHECK(bigger.train.records[57].y == a.train.records[57].y);
}

TEST_CASE("split_validation") {
    const MixtureTaskSpec spec;
    const Dataset data = make_dataset(spec, 200, 1, 4).train;
    const ValidationSplit s = split_validation(data, 0.1, 77);
    CHECK(s.val.size() == 20);
    CHECK(s.train.size() == 180);
    std::multiset<double> all;
    for (const auto& r : s.train.records) all.insert(r.x);
    for (const auto& r : s.val.records) all.insert(r.x);
    std::multiset<double> orig;
    for (const auto& r : data.records) orig.insert(r.x);
    CHECK(all == orig);

    auto position = [&](double x) {
        return std::find_if(data.records.begin(), data.records.end(), [&](const Record& r) { return r.x == x; }) -
               data.records.begin();
    };
    for (std::size_t i = 1; i < s.val.size(); ++i)
        CHECK(position(s.val.records[i - 1].x) < position(s.val.records[i].x));

    const ValidationSplit again = split_validation(data, 0.1, 77);
    CHECK(again.val.records.front().x == s.val.records.front().x);
    CHECK(split_validation(data, 0.0, 1).val.empty());
    CHECK_THROWS(split_validation(data, 1.5, 1));
}

TEST_CASE("sample moments match the mixture") {
    const MixtureTaskSpec spec;
    for (double x : {-4.0, 0.0, 1.0, 3.3}) {
        Rng rng(derive_seed(1234, 99, static_cast<std::uint64_t>(x * 10 + 100)));
        const int n = 40000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = sample_target(spec, x, rng);
            s += y;
            s2 += y * y;
        }
        const double m = s / n;
        const double v = s2 / n - m * m;
        const double se = std::sqrt(true_variance(spec, x) / n);
        CHECK(std::abs(m - true_mean(spec, x)) < 5.0 * se);
        CHECK(std::abs(v / true_variance(spec, x) - 1.0) < 0.05);
    }
}
