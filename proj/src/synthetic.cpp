#include "dar/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dar/errors.hpp"

namespace dar {

void MixtureTaskSpec::validate() const {
    if (!(noise_base > 0.0)) throw ConfigError("noise_base must be positive");
    if (noise_amp < 0.0) throw ConfigError("noise_amp must be non-negative");
    if (!(train_range.lo < train_range.hi)) throw ConfigError("train_range is empty");
    if (!(extrap_left.lo < extrap_left.hi) || !(extrap_right.lo < extrap_right.hi))
        throw ConfigError("extrapolation ranges are empty");
    if (extrap_left.hi > train_range.lo || extrap_right.lo < train_range.hi)
        throw ConfigError("extrapolation ranges overlap the training range");
}

const char* to_string(Region region) {
    switch (region) {
    case Region::interp: return "interp";
    case Region::extrap_left: return "extrap_left";
    case Region::extrap_right: return "extrap_right";
    }
    return "interp";
}

Region region_from_string(const std::string& name) {
    if (name == "interp") return Region::interp;
    if (name == "extrap_left") return Region::extrap_left;
    if (name == "extrap_right") return Region::extrap_right;
    throw DataError("unknown region '" + name + "'");
}

MixturePoint mixture_params(const MixtureTaskSpec& spec, double x) {
    if (!std::isfinite(x)) throw std::domain_error("mixture_params: x must be finite");
    MixturePoint p;
    // 1 / (1 + exp(a x)), evaluated in a form that stays finite for large |x|.
    const double z = spec.logistic_slope * x;
    p.pi = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    const double trend = spec.mean_slope * x;
    p.mu1 = trend + spec.wave_amp * std::sin(spec.wave_freq * x);
    p.mu2 = trend - spec.wave_amp * std::cos(spec.wave_freq * x);
    const double bump = 0.5 + 0.5 * std::sin(spec.noise_freq * x);
    p.sigma = spec.noise_base + spec.noise_amp * bump * bump;
    return p;
}

double sample_target(const MixtureTaskSpec& spec, double x, Rng& rng) {
    const MixturePoint p = mixture_params(spec, x);
    const bool first = rng.uniform() < p.pi;
    const double eps = rng.normal();
    return (first ? p.mu1 : p.mu2) + eps * p.sigma;
}

double true_mean(const MixtureTaskSpec& spec, double x) {
    const MixturePoint p = mixture_params(spec, x);
    return p.pi * p.mu1 + (1.0 - p.pi) * p.mu2;
}

double true_variance(const MixtureTaskSpec& spec, double x) {
    const MixturePoint p = mixture_params(spec, x);
    const double mean = p.pi * p.mu1 + (1.0 - p.pi) * p.mu2;
    const double s2 = p.sigma * p.sigma;
    return p.pi * (p.mu1 * p.mu1 + s2) + (1.0 - p.pi) * (p.mu2 * p.mu2 + s2) - mean * mean;
}

double mixture_cdf(const MixtureTaskSpec& spec, double x, double y) {
    const MixturePoint p = mixture_params(spec, x);
    auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    return p.pi * phi((y - p.mu1) / p.sigma) + (1.0 - p.pi) * phi((y - p.mu2) / p.sigma);
}

Region region_of(const MixtureTaskSpec& spec, double x) {
    if (x < spec.train_range.lo) return Region::extrap_left;
    if (x > spec.train_range.hi) return Region::extrap_right;
    return Region::interp;
}

DatasetPair make_dataset(const MixtureTaskSpec& spec, std::size_t n_train, std::size_t n_test,
                         std::uint64_t seed) {
    spec.validate();
    if (n_train == 0 || n_test == 0) throw std::invalid_argument("make_dataset: counts must be >= 1");

    DatasetPair out;
    out.train.seed = seed;
    out.test.seed = seed;

    out.train.records.reserve(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        Rng xr(seed, Stream::train_x, i);
        Rng yr(seed, Stream::train_y, i);
        Record r;
        r.x = xr.uniform(spec.train_range.lo, spec.train_range.hi);
        r.y = sample_target(spec, r.x, yr);
        r.region = Region::interp;
        out.train.records.push_back(r);
    }

    const std::size_t third = n_test / 3;
    const std::size_t rem = n_test % 3;
    const std::size_t counts[3] = {third + (rem > 0 ? 1 : 0), third + (rem > 1 ? 1 : 0), third};
    const Region regions[3] = {Region::interp, Region::extrap_left, Region::extrap_right};

    out.test.records.reserve(n_test);
    std::size_t index = 0;
    for (int g = 0; g < 3; ++g) {
        for (std::size_t c = 0; c < counts[g]; ++c, ++index) {
            Rng xr(seed, Stream::test_x, index);
            Rng yr(seed, Stream::test_y, index);
            Record r;
            const double u = xr.uniform();
            switch (regions[g]) {
            case Region::interp:
                r.x = spec.train_range.lo + u * (spec.train_range.hi - spec.train_range.lo);
                break;
            case Region::extrap_left:
                r.x = spec.extrap_left.lo + u * (spec.extrap_left.hi - spec.extrap_left.lo);
                break;
            case Region::extrap_right:
                r.x = spec.extrap_right.hi - u * (spec.extrap_right.hi - spec.extrap_right.lo);
                break;
            }
            r.region = regions[g];
            r.y = sample_target(spec, r.x, yr);
            out.test.records.push_back(r);
        }
    }
    return out;
}

ValidationSplit split_validation(const Dataset& data, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw ConfigError("validation fraction must lie in [0, 1)");
    const std::size_t n = data.size();
    const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed, Stream::val_split);
    // Portable Fisher-Yates over the record indices.
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    std::vector<bool> is_val(n, false);
    for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;

    ValidationSplit out;
    out.train.seed = data.seed;
    out.val.seed = data.seed;
    for (std::size_t i = 0; i < n; ++i)
        (is_val[i] ? out.val : out.train).records.push_back(data.records[i]);
    return out;
}

} // namespace dar
