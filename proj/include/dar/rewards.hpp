#pragma once

#include <span>
#include <string>
#include <vector>

namespace dar {

/// One input's K decoded predictions. Entries with valid[k] == false hold a
/// placeholder that scoring never reads.
struct RolloutSet {
    std::string example_id;
    std::vector<double> predictions;
    std::vector<bool> valid;
    double target = 0.0;

    std::size_t size() const noexcept { return predictions.size(); }
    std::size_t valid_count() const;
    /// Valid predictions in rollout order.
    std::vector<double> valid_predictions() const;
};

enum class RewardSource { mse, dar };

struct RewardVector {
    std::vector<double> rewards;
    RewardSource source = RewardSource::mse;
    /// Set when every rollout was invalid; such groups carry no learning signal.
    bool unusable = false;
};

enum class InvalidMode { min_batch, fixed };

struct InvalidPolicy {
    InvalidMode mode = InvalidMode::min_batch;
    /// Used by `fixed`, and as the fallback when no rollout is valid.
    double penalty = -1.0;
};

/// -(prediction - target)^2. Throws std::domain_error on non-finite input.
double mse_reward(double prediction, double target);

/// Pointwise MSE rewards for every valid rollout, with invalid entries
/// penalized per `invalid`.
RewardVector mse_rewards(const RolloutSet& set, const InvalidPolicy& invalid = {});

/// Leave-one-out DAR rewards R_k = S - S^(-k), with S the negated CRPS of the
/// valid predictions. Invalid rollouts are excluded from both scores and then
/// penalized per `invalid`. Throws DegenerateSetError with fewer than two
/// valid rollouts.
RewardVector dar_rewards(const RolloutSet& set, const InvalidPolicy& invalid = {});

/// Fills invalid entries of `raw`; valid entries pass through unchanged.
RewardVector apply_invalid_policy(RewardVector raw, const std::vector<bool>& valid,
                                  const InvalidPolicy& policy);

RewardVector compute_rewards(RewardSource source, const RolloutSet& set,
                             const InvalidPolicy& invalid = {});

const char* to_string(RewardSource source);
RewardSource reward_source_from_string(const std::string& name);

} // namespace dar
