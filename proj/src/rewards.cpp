#include "dar/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dar/errors.hpp"
#include "dar/scoring.hpp"

namespace dar {

std::size_t RolloutSet::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

std::vector<double> RolloutSet::valid_predictions() const {
    std::vector<double> out;
    out.reserve(predictions.size());
    for (std::size_t k = 0; k < predictions.size(); ++k)
        if (valid[k]) out.push_back(predictions[k]);
    return out;
}

double mse_reward(double prediction, double target) {
    if (!std::isfinite(prediction) || !std::isfinite(target))
        throw std::domain_error("mse_reward inputs must be finite");
    const double d = prediction - target;
    return -(d * d);
}

namespace {

void check_shape(const RolloutSet& set) {
    if (set.valid.size() != set.predictions.size())
        throw std::invalid_argument("rollout set: predictions and valid flags differ in length");
}

} // namespace

RewardVector mse_rewards(const RolloutSet& set, const InvalidPolicy& invalid) {
    check_shape(set);
    RewardVector raw;
    raw.source = RewardSource::mse;
    raw.rewards.assign(set.size(), 0.0);
    for (std::size_t k = 0; k < set.size(); ++k)
        if (set.valid[k]) raw.rewards[k] = mse_reward(set.predictions[k], set.target);
    return apply_invalid_policy(std::move(raw), set.valid, invalid);
}

RewardVector dar_rewards(const RolloutSet& set, const InvalidPolicy& invalid) {
    check_shape(set);
    const std::vector<double> kept = set.valid_predictions();
    if (kept.size() < 2)
        throw DegenerateSetError("DAR rewards need at least 2 valid rollouts, got " +
                                 std::to_string(kept.size()));

    const double full = neg_crps_score(EmpiricalDistribution(kept), set.target);

    RewardVector raw;
    raw.source = RewardSource::dar;
    raw.rewards.assign(set.size(), 0.0);

    std::vector<double> reduced;
    reduced.reserve(kept.size() - 1);
    std::size_t j = 0;  // index into kept
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (!set.valid[k]) continue;
        reduced.clear();
        for (std::size_t l = 0; l < kept.size(); ++l)
            if (l != j) reduced.push_back(kept[l]);
        raw.rewards[k] = full - neg_crps_score(EmpiricalDistribution(reduced), set.target);
        ++j;
    }
    return apply_invalid_policy(std::move(raw), set.valid, invalid);
}

RewardVector apply_invalid_policy(RewardVector raw, const std::vector<bool>& valid,
                                  const InvalidPolicy& policy) {
    if (raw.rewards.size() != valid.size())
        throw std::invalid_argument("apply_invalid_policy: reward and validity lengths differ");

    double lowest = std::numeric_limits<double>::infinity();
    bool any_valid = false;
    for (std::size_t k = 0; k < valid.size(); ++k) {
        if (!valid[k]) continue;
        any_valid = true;
        lowest = std::min(lowest, raw.rewards[k]);
    }

    if (!any_valid) {
        std::fill(raw.rewards.begin(), raw.rewards.end(), policy.penalty);
        raw.unusable = true;
        return raw;
    }

    const double fill = policy.mode == InvalidMode::min_batch ? lowest : policy.penalty;
    for (std::size_t k = 0; k < valid.size(); ++k)
        if (!valid[k]) raw.rewards[k] = fill;
    return raw;
}

RewardVector compute_rewards(RewardSource source, const RolloutSet& set, const InvalidPolicy& invalid) {
    return source == RewardSource::dar ? dar_rewards(set, invalid) : mse_rewards(set, invalid);
}

const char* to_string(RewardSource source) {
    return source == RewardSource::dar ? "dar" : "mse";
}

RewardSource reward_source_from_string(const std::string& name) {
    if (name == "dar") return RewardSource::dar;
    if (name == "mse") return RewardSource::mse;
    throw ConfigError("unknown reward_mode '" + name + "' (expected dar or mse)");
}

} // namespace dar
