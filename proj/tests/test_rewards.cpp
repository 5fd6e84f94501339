#include <doctest.h>

#include <random>

#include "dar/errors.hpp"
#include "dar/rewards.hpp"
#include "dar/scoring.hpp"

using namespace dar;
using doctest::Approx;

namespace {

RolloutSet make(std::vector<double> p, double y, std::vector<bool> valid = {}) {
    RolloutSet s;
    s.predictions = std::move(p);
    s.target = y;
    s.valid = valid.empty() ? std::vector<bool>(s.predictions.size(), true) : std::move(valid);
    return s;
}

} // namespace

TEST_CASE("mse_reward") {
    CHECK(mse_reward(5.0, 5.0) == 0.0);
    CHECK(mse_reward(4.0, 5.0) == -1.0);
    CHECK(mse_reward(8.0, 5.0) == -9.0);
    CHECK_THROWS_AS(mse_reward(NAN, 5.0), std::domain_error);
}

TEST_CASE("dar_rewards running example") {
    const RewardVector r = dar_rewards(make({3.0, 4.0, 8.0}, 5.0));
    REQUIRE(r.rewards.size() == 3);
    CHECK(r.source == RewardSource::dar);
    // S = -8/9; S(-3) = -1, S(-4) = S(-8) = -1.25
    CHECK(r.rewards[0] == Approx(1.0 - 8.0 / 9.0).epsilon(1e-12));
    CHECK(r.rewards[1] == Approx(1.25 - 8.0 / 9.0).epsilon(1e-12));
    CHECK(r.rewards[2] == Approx(1.25 - 8.0 / 9.0).epsilon(1e-12));
    CHECK(r.rewards[2] > r.rewards[0]);

    const RewardVector m = mse_rewards(make({3.0, 4.0, 8.0}, 5.0));
    CHECK(m.rewards == std::vector<double>{-4.0, -1.0, -9.0});
}

TEST_CASE("dar_rewards small cases") {
    CHECK(dar_rewards(make({5.0, 5.0}, 5.0)).rewards == std::vector<double>{0.0, 0.0});
    const auto r = dar_rewards(make({4.0, 6.0}, 5.0)).rewards;
    CHECK(r[0] == Approx(0.5));
    CHECK(r[1] == Approx(0.5));
}

TEST_CASE("dar_rewards needs two valid rollouts") {
    CHECK_THROWS_AS(dar_rewards(make({1.0}, 0.0)), DegenerateSetError);
    CHECK_THROWS_AS(dar_rewards(make({1.0, 2.0, 3.0}, 0.0, {true, false, false})), DegenerateSetError);
}

TEST_CASE("dar_rewards excludes invalid rollouts then applies min_batch") {
    // The invalid slot's placeholder must never influence the valid rewards.
    const auto with_invalid = dar_rewards(make({3.0, 1e6, 4.0, 8.0}, 5.0, {true, false, true, true})).rewards;
    const auto clean = dar_rewards(make({3.0, 4.0, 8.0}, 5.0)).rewards;
    CHECK(with_invalid[0] == clean[0]);
    CHECK(with_invalid[2] == clean[1]);
    CHECK(with_invalid[3] == clean[2]);
    CHECK(with_invalid[1] == clean[0]);  // minimum valid reward
}

TEST_CASE("apply_invalid_policy") {
    RewardVector raw;
    raw.rewards = {0.1, 0.3, 123.0};
    auto out = apply_invalid_policy(raw, {true, true, false}, {InvalidMode::min_batch, -1.0});
    CHECK(out.rewards == std::vector<double>{0.1, 0.3, 0.1});
    CHECK_FALSE(out.unusable);

    raw.rewards = {7.0, 7.0};
    out = apply_invalid_policy(raw, {false, false}, {InvalidMode::fixed, -1.0});
    CHECK(out.rewards == std::vector<double>{-1.0, -1.0});
    CHECK(out.unusable);

    raw.rewards = {0.5};
    out = apply_invalid_policy(raw, {true}, {InvalidMode::min_batch, -1.0});
    CHECK(out.rewards == std::vector<double>{0.5});

    raw.rewards = {0.5, 9.0};
    out = apply_invalid_policy(raw, {true, false}, {InvalidMode::fixed, -2.5});
    CHECK(out.rewards == std::vector<double>{0.5, -2.5});

    CHECK_THROWS_AS(apply_invalid_policy(raw, {true}, {}), std::invalid_argument);
}

TEST_CASE("symmetric sets give equal rewards to equidistant predictions") {
    const auto r = dar_rewards(make({2.0, 3.5, 5.0, 6.5, 8.0}, 5.0)).rewards;
    CHECK(r[0] == Approx(r[4]).epsilon(1e-12));
    CHECK(r[1] == Approx(r[3]).epsilon(1e-12));
}

TEST_CASE("dar_rewards are translation invariant") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(2 + trial % 10);
        for (double& v : p) v = u(gen);
        const double y = u(gen);
        const double c = u(gen);
        std::vector<double> q = p;
        for (double& v : q) v += c;
        const auto a = dar_rewards(make(p, y)).rewards;
        const auto b = dar_rewards(make(q, y + c)).rewards;
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == Approx(b[k]).epsilon(1e-12).scale(1e-0));
    }
}

TEST_CASE("duplicating a prediction never lifts its reward above max(original, 0)") {
    // Enumerate integer grids: K <= 4 originals (so K+1 <= 5), values and
    // targets in -3..3.
    std::size_t checked = 0, positive_cases = 0;
    for (int k = 2; k <= 4; ++k) {
        std::vector<int> idx(k, 0);
        while (true) {
            std::vector<double> p(k);
            for (int j = 0; j < k; ++j) p[j] = idx[j] - 3;
            for (int y = -3; y <= 3; ++y) {
                const auto r = dar_rewards(make(p, y)).rewards;
                for (int j = 0; j < k; ++j) {
                    std::vector<double> dup = p;
                    dup.push_back(p[j]);
                    const auto rd = dar_rewards(make(dup, y)).rewards;
                    CHECK(rd[j] <= std::max(r[j], 0.0) + 1e-12);
                    if (r[j] > 0.0) {
                        ++positive_cases;
                        CHECK(rd[j] <= r[j] + 1e-12);
                    }
                    ++checked;
                }
            }
            int pos = 0;
            while (pos < k && ++idx[pos] == 7) idx[pos++] = 0;
            if (pos == k) break;
        }
    }
    CHECK(checked == 75117);
    CHECK(positive_cases > 0);
}

TEST_CASE("squared loss is mean-seeking (grid search oracle)") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    const double step = 1e-3;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 4;
        std::vector<double> support(n), prob(n);
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            support[j] = u(gen);
            prob[j] = w(gen);
            total += prob[j];
        }
        double mean = 0.0;
        for (int j = 0; j < n; ++j) {
            prob[j] /= total;
            mean += prob[j] * support[j];
        }
        double best_a = 0.0, best_loss = INFINITY;
        for (double a = -5.0; a <= 5.0; a += step) {
            double loss = 0.0;
            for (int j = 0; j < n; ++j) loss += prob[j] * -mse_reward(a, support[j]);
            if (loss < best_loss) {
                best_loss = loss;
                best_a = a;
            }
        }
        CHECK(std::abs(best_a - mean) <= step);
    }
}
