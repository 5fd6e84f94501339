#pragma once

#include <span>
#include <vector>

namespace dar {

/// Equal-weight predictive distribution over a finite multiset of values.
///
/// Values are stored sorted; every score computed from a distribution is
/// independent of the order in which samples were supplied.
class EmpiricalDistribution {
  public:
    /// Throws std::domain_error if `values` is empty or holds a non-finite entry.
    explicit EmpiricalDistribution(std::span<const double> values);
    explicit EmpiricalDistribution(const std::vector<double>& values)
        : EmpiricalDistribution(std::span<const double>(values)) {}
    EmpiricalDistribution(std::initializer_list<double> values)
        : EmpiricalDistribution(std::span<const double>(values.begin(), values.size())) {}

    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> sorted() const noexcept { return sorted_; }
    double min() const noexcept { return sorted_.front(); }
    double max() const noexcept { return sorted_.back(); }

  private:
    std::vector<double> sorted_;
};

inline const std::vector<double> kDefaultWisAlphas = {0.2, 0.4, 0.6, 0.8};

/// Empirical CRPS: (1/K) sum |p_k - y| - (1/(2K^2)) sum_k sum_l |p_k - p_l|.
double crps_empirical(const EmpiricalDistribution& dist, double target);

/// Negated CRPS, the maximization score used by the distribution-aware reward.
double neg_crps_score(const EmpiricalDistribution& dist, double target);

/// Integral of (F(z) - 1{z >= target})^2 evaluated exactly over the piecewise
/// constant segments between sample values and the target.
double crps_integral_oracle(const EmpiricalDistribution& dist, double target);

/// Linear interpolation between order statistics, position level*(K-1).
double quantile(const EmpiricalDistribution& dist, double level);

/// Weighted interval score over central intervals at `alpha_levels` plus the
/// median term, normalized by J + 1/2.
double wis(const EmpiricalDistribution& dist, double target,
           std::span<const double> alpha_levels = kDefaultWisAlphas);

/// Interval score of the central (1 - alpha) interval [lower, upper].
double interval_score(double lower, double upper, double target, double alpha);

} // namespace dar
