#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dar/rewards.hpp"
#include "dar/rng.hpp"

namespace dar {

/// Uniformly spaced output values; bin b emits lo + b * (hi - lo) / (count - 1).
struct BinGrid {
    double lo = -6.0;
    double hi = 6.0;
    std::size_t count = 81;

    double width() const { return (hi - lo) / static_cast<double>(count - 1); }
    double center(std::size_t b) const { return lo + static_cast<double>(b) * width(); }
    std::vector<double> centers() const;
    /// Nearest bin, clamping values outside [lo, hi].
    std::size_t nearest(double value) const;

    bool operator==(const BinGrid&) const = default;
};

/// Gaussian radial bumps with centers spread uniformly over [lo, hi].
struct BasisSpec {
    double lo = -12.0;
    double hi = 12.0;
    std::size_t count = 32;
    double bandwidth = 0.75;

    double center(std::size_t m) const;

    bool operator==(const BasisSpec&) const = default;
};

/// Softmax policy over a value grid: probs(x) = softmax(W phi(x) / T).
///
/// Weights are a row-major (bins x basis) matrix, zero-initialized; a fresh
/// policy is uniform over the grid.
class GridPolicy {
  public:
    GridPolicy() : GridPolicy(BinGrid{}, BasisSpec{}, 1.0) {}
    GridPolicy(BinGrid grid, BasisSpec basis, double temperature = 1.0);

    const BinGrid& grid() const noexcept { return grid_; }
    const BasisSpec& basis() const noexcept { return basis_; }
    double temperature() const noexcept { return temperature_; }
    void set_temperature(double t);

    std::size_t n_bins() const noexcept { return grid_.count; }
    std::size_t n_basis() const noexcept { return basis_.count; }

    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> weights() noexcept { return weights_; }
    double weight(std::size_t bin, std::size_t m) const { return weights_[bin * basis_.count + m]; }
    double& weight(std::size_t bin, std::size_t m) { return weights_[bin * basis_.count + m]; }
    void set_weights(std::vector<double> w);

    std::vector<double> features(double x) const;
    /// Tempered logits W phi(x) / T.
    std::vector<double> logits(double x) const;
    std::vector<double> probs(double x) const;

  private:
    BinGrid grid_;
    BasisSpec basis_;
    double temperature_ = 1.0;
    std::vector<double> weights_;
};

/// Frozen snapshot of a policy used as the KL anchor.
class ReferencePolicy {
  public:
    explicit ReferencePolicy(GridPolicy snapshot)
        : snapshot_(std::make_shared<const GridPolicy>(std::move(snapshot))) {}

    const GridPolicy& policy() const noexcept { return *snapshot_; }
    std::vector<double> probs(double x) const { return snapshot_->probs(x); }

  private:
    std::shared_ptr<const GridPolicy> snapshot_;
};

std::vector<double> softmax(std::span<const double> logits);
/// Shannon entropy in nats.
double entropy(std::span<const double> probs);
/// KL(q || r) in nats.
double kl_divergence(std::span<const double> q, std::span<const double> r);

std::vector<std::size_t> sample_bins(const GridPolicy& policy, double x, std::size_t k, Rng& rng);

/// K independent draws; predictions are bin centers and every rollout is valid.
RolloutSet sample_rollouts(const GridPolicy& policy, double x, std::size_t k, Rng& rng,
                           double target = 0.0, std::string example_id = {});

double policy_entropy(const GridPolicy& policy, double x);

/// Exact categorical KL from the policy to the reference at x. Throws
/// ConfigError when the two do not share a bin grid.
double kl_to_reference(const GridPolicy& policy, const ReferencePolicy& ref, double x);

/// `\boxed{v}` with the shortest decimal that round-trips v.
std::string format_prediction(double value);

/// Value of the last `\boxed{...}` holding a finite decimal or scientific
/// number; nullopt when none qualifies. Never throws.
std::optional<double> parse_prediction(std::string_view text) noexcept;

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

} // namespace dar
