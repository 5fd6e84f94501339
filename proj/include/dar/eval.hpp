#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dar/policy.hpp"
#include "dar/rewards.hpp"
#include "dar/scoring.hpp"
#include "dar/synthetic.hpp"

namespace dar {

struct PointPrediction {
    double mean = 0.0;
    double std = 0.0;  // population convention
    std::vector<double> samples;
};

/// Mean and spread of `n_samples` sampled predictions at x.
PointPrediction point_prediction(const GridPolicy& policy, double x, std::size_t n_samples, Rng& rng);

/// Ranks from 1..n with ties assigned the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);
/// nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct RegressionMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> spearman;  // undefined for constant predictions or targets
};

RegressionMetrics regression_metrics(std::span<const double> predictions, std::span<const double> targets);

/// Inclusive min <= y <= max over valid predictions.
bool brackets(const RolloutSet& set);

struct BracketSummary {
    double rate = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;  // sets with no valid rollout
};

BracketSummary bracket_rate(std::span<const RolloutSet> sets);

struct ScoredSamples {
    std::vector<double> samples;
    double target = 0.0;
};

struct DistributionScores {
    double mean_crps = 0.0;
    double mean_wis = 0.0;
};

DistributionScores distribution_scores(std::span<const ScoredSamples> sets,
                                       std::span<const double> alpha_levels = kDefaultWisAlphas);

struct CalibrationPoint {
    double std = 0.0;
    double abs_error = 0.0;
};

struct CalibrationReport {
    double log_pearson = 0.0;
    std::size_t n_points = 0;       // points used in the fit
    std::size_t n_excluded = 0;     // zero std or zero error
    std::vector<CalibrationPoint> points;  // normalized, usable points only
    bool degenerate = false;
};

/// Pearson correlation of log(std / scale) against log(error / scale).
CalibrationReport calibration_fit(std::span<const CalibrationPoint> points, double target_scale);

struct EvalConfig {
    std::size_t n_samples = 32;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::vector<double> alpha_levels = kDefaultWisAlphas;
};

struct SplitMetrics {
    std::size_t n = 0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> spearman;
    double bracket_rate = 0.0;
    double mean_crps = 0.0;
    double mean_wis = 0.0;
};

struct MetricsReport {
    SplitMetrics overall;
    std::map<Region, SplitMetrics> regions;
    std::size_t n_examples = 0;
    std::size_t n_samples_per_example = 0;
    std::size_t repeats = 0;
};

/// Point-prediction protocol: sample n_samples per example, score the sample
/// mean and the sample set, and average every metric over `repeats`
/// independent seeds.
MetricsReport evaluate_policy(const GridPolicy& policy, const Dataset& data, const EvalConfig& config);

/// One-pass std-vs-error diagnostic with the split's target std as scale.
CalibrationReport evaluate_calibration(const GridPolicy& policy, const Dataset& data, std::size_t n_samples,
                                       std::uint64_t seed);

/// Population standard deviation; 0 for fewer than two values.
double population_std(std::span<const double> values);
double mean_of(std::span<const double> values);

} // namespace dar
