#include "dar/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dar {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(what) + " must be finite");
}

} // namespace

EmpiricalDistribution::EmpiricalDistribution(std::span<const double> values)
    : sorted_(values.begin(), values.end()) {
    if (sorted_.empty()) throw std::domain_error("empirical distribution must be nonempty");
    for (double v : sorted_) require_finite(v, "distribution value");
    std::sort(sorted_.begin(), sorted_.end());
}

double crps_empirical(const EmpiricalDistribution& dist, double target) {
    require_finite(target, "target");
    const auto x = dist.sorted();
    const double k = static_cast<double>(x.size());

    double accuracy = 0.0;
    for (double v : x) accuracy += std::abs(v - target);

    // Full double sum, diagonal included, in sorted order.
    double dispersion = 0.0;
    for (double a : x) {
        double row = 0.0;
        for (double b : x) row += std::abs(a - b);
        dispersion += row;
    }

    const double crps = accuracy / k - dispersion / (2.0 * k * k);
    return std::max(crps, 0.0);
}

double neg_crps_score(const EmpiricalDistribution& dist, double target) {
    return -crps_empirical(dist, target);
}

double crps_integral_oracle(const EmpiricalDistribution& dist, double target) {
    require_finite(target, "target");
    const auto x = dist.sorted();
    const double k = static_cast<double>(x.size());

    std::vector<double> breaks(x.begin(), x.end());
    breaks.push_back(target);
    std::sort(breaks.begin(), breaks.end());

    double total = 0.0;
    std::size_t below = 0;  // number of samples <= left end of the segment
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double left = breaks[i];
        const double right = breaks[i + 1];
        if (right <= left) continue;
        while (below < x.size() && x[below] <= left) ++below;
        const double cdf = static_cast<double>(below) / k;
        const double indicator = left >= target ? 1.0 : 0.0;
        const double diff = cdf - indicator;
        total += diff * diff * (right - left);
    }
    return total;
}

double quantile(const EmpiricalDistribution& dist, double level) {
    if (!(level >= 0.0 && level <= 1.0)) throw std::domain_error("quantile level must lie in [0, 1]");
    const auto x = dist.sorted();
    const double h = level * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= x.size()) return x.back();
    const double frac = h - static_cast<double>(lo);
    return x[lo] + frac * (x[lo + 1] - x[lo]);
}

double interval_score(double lower, double upper, double target, double alpha) {
    double score = upper - lower;
    if (target < lower) score += (2.0 / alpha) * (lower - target);
    if (target > upper) score += (2.0 / alpha) * (target - upper);
    return score;
}

double wis(const EmpiricalDistribution& dist, double target, std::span<const double> alpha_levels) {
    require_finite(target, "target");
    if (alpha_levels.empty()) throw std::domain_error("WIS needs at least one alpha level");
    for (std::size_t j = 0; j < alpha_levels.size(); ++j) {
        const double a = alpha_levels[j];
        if (!(a > 0.0 && a < 1.0)) throw std::domain_error("WIS alpha levels must lie in (0, 1)");
        if (j > 0 && !(a > alpha_levels[j - 1]))
            throw std::domain_error("WIS alpha levels must be strictly increasing");
    }

    const double median = quantile(dist, 0.5);
    double total = 0.5 * std::abs(target - median);
    for (double a : alpha_levels) {
        const double lower = quantile(dist, a / 2.0);
        const double upper = quantile(dist, 1.0 - a / 2.0);
        total += (a / 2.0) * interval_score(lower, upper, target, a);
    }
    return total / (static_cast<double>(alpha_levels.size()) + 0.5);
}

} // namespace dar
