#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace dar {

/// Mixes a master seed with a stream tag and an index into an independent
/// engine seed (splitmix64 finalizer applied per component).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

/// Named substreams. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    train_x = 1,
    train_y = 2,
    test_x = 3,
    test_y = 4,
    val_split = 5,
    batch = 6,
    rollout = 7,
    validation = 8,
    evaluation = 9,
    sft_batch = 10,
};

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, Stream stream, std::uint64_t index = 0)
        : engine_(derive_seed(master, static_cast<std::uint64_t>(stream), index)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::size_t index(std::size_t n);
    /// Inverse-CDF draw from a probability vector.
    std::size_t categorical(std::span<const double> probs);

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace dar
