#include "dar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "dar/errors.hpp"
#include "dar/eval.hpp"

namespace dar {

void TrainConfig::validate() const {
    if (K < 1) throw ConfigError("K must be >= 1");
    if (reward_mode == RewardSource::dar && K < 2) throw ConfigError("DAR rewards need K >= 2");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (!(sft_learning_rate >= 0.0)) throw ConfigError("sft_learning_rate must be non-negative");
    if (!(kl_coef >= 0.0)) throw ConfigError("kl_coef must be non-negative");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(advantage_epsilon > 0.0)) throw ConfigError("advantage_epsilon must be positive");
    if (val_samples < 1) throw ConfigError("val_samples must be >= 1");
}

std::vector<double> grpo_advantages(std::span<const double> rewards, double epsilon) {
    std::vector<double> adv(rewards.size(), 0.0);
    if (rewards.empty()) return adv;
    const double n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / n);
    if (sd < epsilon) return adv;
    for (std::size_t k = 0; k < rewards.size(); ++k) adv[k] = (rewards[k] - mean) / (sd + epsilon);
    return adv;
}

namespace {

// dJ/dz for one group, where z are the tempered logits.
void group_logit_gradient(std::span<const double> q, std::span<const double> r, const RolloutGroup& g,
                          double kl_coef, std::vector<double>& dz) {
    const std::size_t nb = q.size();
    double adv_sum = 0.0;
    for (double a : g.advantages) adv_sum += a;
    for (std::size_t b = 0; b < nb; ++b) dz[b] = -adv_sum * q[b];
    for (std::size_t k = 0; k < g.bins.size(); ++k) dz[g.bins[k]] += g.advantages[k];

    if (kl_coef != 0.0) {
        const double kl = kl_divergence(q, r);
        for (std::size_t b = 0; b < nb; ++b) {
            if (q[b] <= 0.0) continue;
            dz[b] -= kl_coef * q[b] * (std::log(q[b]) - std::log(r[b]) - kl);
        }
    }
}

void accumulate_weight_gradient(const GridPolicy& policy, std::span<const double> phi,
                                std::span<const double> dz, double scale, std::vector<double>& grad) {
    const std::size_t nm = policy.n_basis();
    const double s = scale / policy.temperature();
    for (std::size_t b = 0; b < policy.n_bins(); ++b) {
        const double g = dz[b] * s;
        if (g == 0.0) continue;
        double* row = grad.data() + b * nm;
        for (std::size_t m = 0; m < nm; ++m) row[m] += g * phi[m];
    }
}

void require_finite_gradient(const std::vector<double>& grad, const GridPolicy& policy, std::size_t step,
                             const char* where) {
    for (double g : grad) {
        if (std::isfinite(g)) continue;
        double wmax = 0.0;
        std::size_t nonfinite_weights = 0;
        for (double w : policy.weights()) {
            if (!std::isfinite(w)) ++nonfinite_weights;
            else wmax = std::max(wmax, std::abs(w));
        }
        std::size_t bad = 0;
        for (double v : grad) bad += std::isfinite(v) ? 0 : 1;
        nlohmann::json dump = {
            {"where", where},
            {"step", step},
            {"nonfinite_gradient_entries", bad},
            {"nonfinite_weights", nonfinite_weights},
            {"max_abs_weight", wmax},
            {"temperature", policy.temperature()},
            {"weights", std::vector<double>(policy.weights().begin(), policy.weights().end())},
        };
        throw NumericError(std::string("non-finite gradient in ") + where + " at step " + std::to_string(step),
                           dump.dump());
    }
}

} // namespace

double surrogate_objective(const GridPolicy& policy, const ReferencePolicy& ref,
                           std::span<const RolloutGroup> groups, double kl_coef) {
    if (groups.empty()) return 0.0;
    double total = 0.0;
    for (const RolloutGroup& g : groups) {
        const std::vector<double> z = policy.logits(g.x);
        const double top = *std::max_element(z.begin(), z.end());
        double denom = 0.0;
        for (double v : z) denom += std::exp(v - top);
        const double log_norm = top + std::log(denom);
        for (std::size_t k = 0; k < g.bins.size(); ++k) total += g.advantages[k] * (z[g.bins[k]] - log_norm);
        if (kl_coef != 0.0) total -= kl_coef * kl_to_reference(policy, ref, g.x);
    }
    return total / static_cast<double>(groups.size());
}

std::vector<double> surrogate_gradient(const GridPolicy& policy, const ReferencePolicy& ref,
                                       std::span<const RolloutGroup> groups, double kl_coef) {
    std::vector<double> grad(policy.weights().size(), 0.0);
    if (groups.empty()) return grad;
    std::vector<double> dz(policy.n_bins());
    const double scale = 1.0 / static_cast<double>(groups.size());
    for (const RolloutGroup& g : groups) {
        const std::vector<double> phi = policy.features(g.x);
        const std::vector<double> q = policy.probs(g.x);
        const std::vector<double> r = kl_coef != 0.0 ? ref.probs(g.x) : q;
        group_logit_gradient(q, r, g, kl_coef, dz);
        accumulate_weight_gradient(policy, phi, dz, scale, grad);
    }
    return grad;
}

double sft_loss(const GridPolicy& policy, std::span<const Record> records) {
    if (records.empty()) return 0.0;
    double total = 0.0;
    for (const Record& rec : records) {
        const std::vector<double> q = policy.probs(rec.x);
        total -= std::log(q[policy.grid().nearest(rec.y)]);
    }
    return total / static_cast<double>(records.size());
}

std::vector<double> sft_gradient(const GridPolicy& policy, std::span<const Record> records) {
    std::vector<double> grad(policy.weights().size(), 0.0);
    if (records.empty()) return grad;
    std::vector<double> dz(policy.n_bins());
    const double scale = 1.0 / static_cast<double>(records.size());
    for (const Record& rec : records) {
        const std::vector<double> phi = policy.features(rec.x);
        const std::vector<double> q = policy.probs(rec.x);
        // d(-log q_t)/dz = q - onehot(t)
        for (std::size_t b = 0; b < q.size(); ++b) dz[b] = q[b];
        dz[policy.grid().nearest(rec.y)] -= 1.0;
        accumulate_weight_gradient(policy, phi, dz, scale, grad);
    }
    return grad;
}

double sft_step(GridPolicy& policy, std::span<const Record> records, double learning_rate) {
    const double loss = sft_loss(policy, records);
    const std::vector<double> grad = sft_gradient(policy, records);
    require_finite_gradient(grad, policy, 0, "sft_step");
    auto w = policy.weights();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= learning_rate * grad[j];
    return loss;
}

StepRecord train_step(GridPolicy& policy, const ReferencePolicy& ref, std::span<const Record> batch,
                      const TrainConfig& config, std::size_t step) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

    StepRecord record;
    record.step = step;

    std::vector<RolloutGroup> groups;
    groups.reserve(batch.size());
    double reward_sum = 0.0;
    std::size_t reward_count = 0;
    std::size_t bracketed = 0;

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Record& rec = batch[i];
        Rng rng(config.seed, Stream::rollout, (static_cast<std::uint64_t>(step) << 32) | i);

        RolloutGroup g;
        g.x = rec.x;
        g.bins = sample_bins(policy, rec.x, config.K, rng);

        RolloutSet set;
        set.target = rec.y;
        for (std::size_t b : g.bins) set.predictions.push_back(policy.grid().center(b));
        set.valid.assign(g.bins.size(), true);

        const RewardVector rewards = compute_rewards(config.reward_mode, set, config.invalid);
        for (double r : rewards.rewards) reward_sum += r;
        reward_count += rewards.rewards.size();
        if (brackets(set)) ++bracketed;

        g.advantages = rewards.unusable ? std::vector<double>(g.bins.size(), 0.0)
                                        : grpo_advantages(rewards.rewards, config.advantage_epsilon);

        const std::vector<double> q = policy.probs(rec.x);
        record.mean_entropy += entropy(q);
        record.mean_kl += kl_divergence(q, ref.probs(rec.x));
        groups.push_back(std::move(g));
    }

    const double n = static_cast<double>(batch.size());
    record.mean_reward = reward_count > 0 ? reward_sum / static_cast<double>(reward_count) : 0.0;
    record.bracket_rate = static_cast<double>(bracketed) / n;
    record.mean_entropy /= n;
    record.mean_kl /= n;

    const std::vector<double> grad = surrogate_gradient(policy, ref, groups, config.kl_coef);
    require_finite_gradient(grad, policy, step, "train_step");
    if (config.learning_rate != 0.0) {
        auto w = policy.weights();
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += config.learning_rate * grad[j];
    }
    return record;
}

GridPolicy initial_policy(const TrainConfig& config) {
    return GridPolicy(config.grid, config.basis, config.temperature);
}

namespace {

std::vector<Record> draw_batch(const Dataset& data, std::size_t batch_size, std::uint64_t seed, Stream stream,
                               std::size_t step) {
    Rng rng(seed, stream, step);
    std::vector<Record> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(data.records[rng.index(data.size())]);
    return batch;
}

bool improves(const std::optional<double>& rho, double rmse, const TrainState& state) {
    if (!state.has_best) return true;
    if (!rho) return false;
    if (!state.best_spearman) return true;
    if (*rho != *state.best_spearman) return *rho > *state.best_spearman;
    return rmse < state.best_rmse;
}

} // namespace

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set,
                  std::optional<TrainState> resume) {
    config.validate();
    if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train: datasets must be nonempty");

    TrainState state;
    if (resume) {
        state = std::move(*resume);
    } else {
        state.policy = initial_policy(config);
        state.reference = state.policy;
    }
    if (!(state.policy.grid() == state.reference.grid()))
        throw ConfigError("resume state: policy and reference grids differ");
    const ReferencePolicy ref(state.reference);

    TrainLog log;
    for (std::size_t step = state.completed_steps + 1; step <= config.max_steps; ++step) {
        const std::vector<Record> batch = draw_batch(train_set, config.batch_size, config.seed, Stream::batch, step);
        StepRecord rec = train_step(state.policy, ref, batch, config, step);

        const bool evaluate = step == config.max_steps || (config.eval_every > 0 && step % config.eval_every == 0);
        if (evaluate) {
            EvalConfig ec;
            ec.n_samples = config.val_samples;
            ec.repeats = 1;
            ec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(Stream::validation), step);
            const MetricsReport m = evaluate_policy(state.policy, val_set, ec);
            rec.val_spearman = m.overall.spearman;
            rec.val_rmse = m.overall.rmse;
            if (improves(m.overall.spearman, m.overall.rmse, state)) {
                state.has_best = true;
                state.best = state.policy;
                state.best_step = step;
                state.best_spearman = m.overall.spearman;
                state.best_rmse = m.overall.rmse;
            }
        }
        log.steps.push_back(rec);
        state.completed_steps = step;
    }

    TrainResult out;
    out.final = state.policy;
    out.best = state.has_best ? state.best : state.policy;
    out.log = std::move(log);
    out.state = std::move(state);
    return out;
}

GridPolicy sft_fit(const Dataset& train_set, const TrainConfig& config, std::vector<double>* loss_trace) {
    config.validate();
    if (train_set.empty()) throw std::invalid_argument("sft_fit: empty training set");
    GridPolicy policy = initial_policy(config);
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
        const std::vector<Record> batch =
            draw_batch(train_set, config.batch_size, config.seed, Stream::sft_batch, step);
        const double loss = sft_step(policy, batch, config.sft_learning_rate);
        if (loss_trace) loss_trace->push_back(loss);
    }
    return policy;
}

} // namespace dar
