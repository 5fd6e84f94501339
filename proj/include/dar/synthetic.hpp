#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dar/rng.hpp"

namespace dar {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Constants of the heteroscedastic two-component Gaussian mixture task.
struct MixtureTaskSpec {
    double logistic_slope = 1.2;
    double mean_slope = 1.0 / 3.0;
    double wave_amp = 1.2;
    double wave_freq = 0.8;
    double noise_base = 0.12;
    double noise_amp = 0.28;
    double noise_freq = 0.7;
    Interval train_range{-6.0, 6.0};
    Interval extrap_left{-10.0, -6.0};   // [lo, hi)
    Interval extrap_right{6.0, 10.0};    // (lo, hi]

    /// Throws ConfigError when sigma could reach zero or ranges overlap.
    void validate() const;
};

struct MixturePoint {
    double pi = 0.5;   // weight of component 1
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma = 1.0;
};

enum class Region { interp, extrap_left, extrap_right };

const char* to_string(Region region);
Region region_from_string(const std::string& name);

struct Record {
    double x = 0.0;
    double y = 0.0;
    Region region = Region::interp;
};

struct Dataset {
    std::vector<Record> records;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
};

MixturePoint mixture_params(const MixtureTaskSpec& spec, double x);

/// Draws k ~ Bernoulli(pi(x)) then y = mu_k(x) + eps * sigma(x).
double sample_target(const MixtureTaskSpec& spec, double x, Rng& rng);

double true_mean(const MixtureTaskSpec& spec, double x);
double true_variance(const MixtureTaskSpec& spec, double x);
/// Exact conditional CDF P(Y <= y | x).
double mixture_cdf(const MixtureTaskSpec& spec, double x, double y);

Region region_of(const MixtureTaskSpec& spec, double x);

struct DatasetPair {
    Dataset train;
    Dataset test;
};

/// Train inputs uniform over the training range; test inputs split in thirds
/// across interp / extrap_left / extrap_right (remainder to interp first).
/// Every record draws from its own substream of `seed`.
DatasetPair make_dataset(const MixtureTaskSpec& spec, std::size_t n_train, std::size_t n_test,
                         std::uint64_t seed);

struct ValidationSplit {
    Dataset train;
    Dataset val;
};

/// Seeded carve-out of floor(fraction * n) records; both parts keep the
/// original record order.
ValidationSplit split_validation(const Dataset& data, double fraction, std::uint64_t seed);

} // namespace dar
