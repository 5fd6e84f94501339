#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dar/policy.hpp"
#include "dar/rewards.hpp"
#include "dar/synthetic.hpp"

namespace dar {

struct TrainConfig {
    RewardSource reward_mode = RewardSource::dar;
    std::size_t K = 12;
    std::size_t batch_size = 256;
    double learning_rate = 5.0;
    double kl_coef = 0.001;
    std::size_t max_steps = 300;
    double temperature = 1.0;
    double advantage_epsilon = 1e-8;
    std::uint64_t seed = 0;
    /// Validate every `eval_every` steps and after the last step; 0 means last step only.
    std::size_t eval_every = 10;
    std::size_t val_samples = 32;
    InvalidPolicy invalid{};
    BinGrid grid{};
    BasisSpec basis{};
    /// Step size for the cross-entropy baseline, which has no rollout sum.
    double sft_learning_rate = 10.0;

    /// Throws ConfigError on out-of-range settings.
    void validate() const;
};

struct StepRecord {
    std::size_t step = 0;
    double mean_reward = 0.0;
    double bracket_rate = 0.0;
    double mean_entropy = 0.0;
    double mean_kl = 0.0;
    std::optional<double> val_spearman;
    std::optional<double> val_rmse;
};

struct TrainLog {
    std::vector<StepRecord> steps;
};

/// (R - mean) / (popstd + eps); all zeros when popstd < eps.
std::vector<double> grpo_advantages(std::span<const double> rewards, double epsilon);

/// One input's sampled bins and their advantages.
struct RolloutGroup {
    double x = 0.0;
    std::vector<std::size_t> bins;
    std::vector<double> advantages;
};

/// (1/N) sum_i [ sum_k A_ik log pi(bin_ik | x_i) - kl_coef * KL(pi(.|x_i) || ref(.|x_i)) ].
double surrogate_objective(const GridPolicy& policy, const ReferencePolicy& ref,
                           std::span<const RolloutGroup> groups, double kl_coef);
/// Analytic gradient of surrogate_objective, laid out like GridPolicy::weights().
std::vector<double> surrogate_gradient(const GridPolicy& policy, const ReferencePolicy& ref,
                                       std::span<const RolloutGroup> groups, double kl_coef);

/// Mean of -log pi(bin(y) | x) over the records.
double sft_loss(const GridPolicy& policy, std::span<const Record> records);
std::vector<double> sft_gradient(const GridPolicy& policy, std::span<const Record> records);

/// One gradient-descent step on sft_loss; returns the loss before the step.
double sft_step(GridPolicy& policy, std::span<const Record> records, double learning_rate);

/// Samples K rollouts per example, scores them, and takes one ascent step on
/// the surrogate. Rollout randomness comes from (config.seed, step, example
/// index). Throws NumericError on a non-finite gradient.
StepRecord train_step(GridPolicy& policy, const ReferencePolicy& ref, std::span<const Record> batch,
                      const TrainConfig& config, std::size_t step);

/// Everything needed to continue an interrupted run.
struct TrainState {
    GridPolicy policy;
    GridPolicy reference;
    std::size_t completed_steps = 0;
    bool has_best = false;
    GridPolicy best;
    std::size_t best_step = 0;
    std::optional<double> best_spearman;
    double best_rmse = 0.0;
};

struct TrainResult {
    GridPolicy best;
    GridPolicy final;
    TrainLog log;
    TrainState state;
};

/// Zero-weight policy for the config's grid, basis and temperature.
GridPolicy initial_policy(const TrainConfig& config);

/// Runs steps completed_steps+1 .. max_steps. The best checkpoint is the
/// validated step with the highest Spearman (ties: lower RMSE, then earlier).
/// Starts from `resume` when given, else from initial_policy(config).
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set,
                  std::optional<TrainState> resume = std::nullopt);

/// Cross-entropy fit of the target's bin, minibatches drawn with replacement.
/// Uses max_steps, batch_size and sft_learning_rate; the per-step minibatch
/// loss is appended to `loss_trace` when given.
GridPolicy sft_fit(const Dataset& train_set, const TrainConfig& config,
                   std::vector<double>* loss_trace = nullptr);

} // namespace dar
