#pragma once

#include "loadshare/model.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace loadshare {

/// Seeded 64-bit Mersenne Twister. std::mt19937_64 is specified exactly by
/// the standard, and uniforms are formed from raw 64-bit words here rather
/// than through std::uniform_real_distribution, so a seed yields the same
/// stream on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next() { return engine_(); }
    /// Uniform on the open interval (0, 1): (m + 0.5) / 2^52 for a 52-bit m.
    double uniform_open();
    /// Uniform integer in [lo, hi].
    std::size_t uniform_index(std::size_t lo, std::size_t hi);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer applied to (master, index); used to give every
/// Monte Carlo replicate or random instance its own stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Inverse CDF of an exponential spacing with total rate `rate`.
double exponential_spacing(double rate, double u);
/// Inverse CDF of a spacing under total hazard rate * t (Rayleigh).
double rayleigh_spacing(double rate, double u);

/// One system's k spacings, drawn stage by stage. The total rate of stage c
/// is (k-c) * lambda_c * theta.
std::vector<double> sample_system(const ModelSpec& spec, const Params& params, Rng& rng);

/// n independent systems. Throws Error(InvalidSampleSize) for n == 0.
SpacingsMatrix sample_dataset(const ModelSpec& spec, const Params& params, std::size_t n, Rng& rng);

struct McSummary {
    std::size_t reps = 0;
    std::size_t n = 0;
    Params truth;
    /// All per-parameter vectors are ordered (theta, lambda_1, ..., lambda_{k-1}).
    std::vector<double> mean_estimates;
    std::vector<double> bias;
    std::vector<double> mse;
    /// Monte Carlo standard error of mean_estimates.
    std::vector<double> std_error;
};

/// Fits the closed-form MLE to `reps` simulated datasets of size n.
/// Replicate r draws from Rng(derive_seed(master_seed, r)) and the reduction
/// runs in replicate order, so the summary is bit-identical for any thread
/// count. threads == 0 picks the hardware concurrency.
/// Throws Error(InvalidSampleSize) for n < 2 or reps == 0.
McSummary mc_study(const ModelSpec& spec, const Params& truth, std::size_t n, std::size_t reps,
                   std::uint64_t master_seed, unsigned threads = 1);

/// Validation instance with random k, n and log-uniform parameters.
struct RandomInstance {
    ModelSpec spec;
    Params truth;
    SpacingsMatrix data;
};

struct RandomInstanceOptions {
    std::size_t k_min = 2;
    std::size_t k_max = 6;
    std::size_t n_min = 1;
    std::size_t n_max = 20;
    double param_min = 0.1;
    double param_max = 10.0;
    /// SSK only: fixed switch index; otherwise s is drawn from [2, k-1].
    std::size_t fixed_s = 0;
};

/// Draws one instance from Rng(derive_seed(seed, index)). For SSK, k is
/// raised to at least max(3, fixed_s + 1) so that a valid s exists.
RandomInstance random_instance(ModelKind kind, std::uint64_t seed, std::uint64_t index,
                               const RandomInstanceOptions& options = {});

}  // namespace loadshare
