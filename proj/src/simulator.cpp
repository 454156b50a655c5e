#include "loadshare/simulator.hpp"

#include "loadshare/error.hpp"
#include "loadshare/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace loadshare {

double Rng::uniform_open() {
    const std::uint64_t mantissa = engine_() >> 12;
    return (static_cast<double>(mantissa) + 0.5) * 0x1.0p-52;
}

std::size_t Rng::uniform_index(std::size_t lo, std::size_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::size_t>(engine_() % span);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double exponential_spacing(double rate, double u) {
    return -std::log(u) / rate;
}

double rayleigh_spacing(double rate, double u) {
    return std::sqrt(2.0 * -std::log(u) / rate);
}

std::vector<double> sample_system(const ModelSpec& spec, const Params& params, Rng& rng) {
    if (params.size() != spec.k()) {
        throw Error(ErrorKind::InvalidParams,
                    "expected " + std::to_string(spec.k() - 1) + " lambda values, got " +
                        std::to_string(params.size() - 1));
    }
    std::vector<double> row(spec.k());
    for (std::size_t c = 0; c < spec.k(); ++c) {
        const double rate = spec.survivors(c) * params.lambda(c) * params.theta();
        const double u = rng.uniform_open();
        row[c] = spec.constant_hazard_stage(c) ? exponential_spacing(rate, u) : rayleigh_spacing(rate, u);
    }
    return row;
}

SpacingsMatrix sample_dataset(const ModelSpec& spec, const Params& params, std::size_t n, Rng& rng) {
    if (n == 0) {
        throw Error(ErrorKind::InvalidSampleSize, "sample size n must be >= 1");
    }
    std::vector<double> data;
    data.reserve(n * spec.k());
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> row = sample_system(spec, params, rng);
        data.insert(data.end(), row.begin(), row.end());
    }
    return SpacingsMatrix(Matrix(n, spec.k(), std::move(data)));
}

McSummary mc_study(const ModelSpec& spec, const Params& truth, std::size_t n, std::size_t reps,
                   std::uint64_t master_seed, unsigned threads) {
    if (n < 2) {
        throw Error(ErrorKind::InvalidSampleSize,
                    "Monte Carlo study needs n >= 2 (the mean of theta_hat is infinite at n = 1)");
    }
    if (reps == 0) {
        throw Error(ErrorKind::InvalidSampleSize, "Monte Carlo study needs reps >= 1");
    }
    if (truth.size() != spec.k()) {
        throw Error(ErrorKind::InvalidParams,
                    "expected " + std::to_string(spec.k() - 1) + " lambda values, got " +
                        std::to_string(truth.size() - 1));
    }

    const std::size_t p = spec.k();
    std::vector<double> estimates(reps * p);

    auto run_block = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            Rng rng(derive_seed(master_seed, r));
            const FitResult fit = closed_form_mle(spec, sample_dataset(spec, truth, n, rng));
            const std::vector<double> est = fit.params_hat.as_vector();
            std::copy(est.begin(), est.end(), estimates.begin() + static_cast<std::ptrdiff_t>(r * p));
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
    if (threads <= 1) {
        run_block(0, reps);
    } else {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        const std::size_t chunk = (reps + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(reps, begin + chunk);
            if (begin >= end) break;
            workers.emplace_back(run_block, begin, end);
        }
    }

    const std::vector<double> target = truth.as_vector();
    McSummary summary{reps, n, truth, std::vector<double>(p, 0.0), std::vector<double>(p, 0.0),
                      std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
    const auto count = static_cast<double>(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t q = 0; q < p; ++q) {
            const double e = estimates[r * p + q];
            summary.mean_estimates[q] += e;
            summary.mse[q] += (e - target[q]) * (e - target[q]);
        }
    }
    for (std::size_t q = 0; q < p; ++q) {
        summary.mean_estimates[q] /= count;
        summary.mse[q] /= count;
        summary.bias[q] = summary.mean_estimates[q] - target[q];
    }
    if (reps > 1) {
        std::vector<double> ss(p, 0.0);
        for (std::size_t r = 0; r < reps; ++r) {
            for (std::size_t q = 0; q < p; ++q) {
                const double d = estimates[r * p + q] - summary.mean_estimates[q];
                ss[q] += d * d;
            }
        }
        for (std::size_t q = 0; q < p; ++q) {
            summary.std_error[q] = std::sqrt(ss[q] / (count - 1.0) / count);
        }
    }
    return summary;
}

RandomInstance random_instance(ModelKind kind, std::uint64_t seed, std::uint64_t index,
                               const RandomInstanceOptions& options) {
    Rng rng(derive_seed(seed, index));
    std::size_t k_min = options.k_min;
    if (kind == ModelKind::SSK) k_min = std::max({k_min, std::size_t{3}, options.fixed_s + 1});
    const std::size_t k = rng.uniform_index(k_min, std::max(k_min, options.k_max));
    const std::size_t n = rng.uniform_index(options.n_min, options.n_max);

    ModelSpec spec = ModelSpec::kim_kvam(k);
    if (kind == ModelKind::SSK) {
        const std::size_t s = options.fixed_s != 0 ? options.fixed_s : rng.uniform_index(2, k - 1);
        spec = ModelSpec::ssk(k, s);
    }

    const double lo = std::log(options.param_min);
    const double hi = std::log(options.param_max);
    auto log_uniform = [&] { return std::exp(lo + (hi - lo) * rng.uniform_open()); };
    const double theta = log_uniform();
    std::vector<double> lambdas(k - 1);
    for (double& l : lambdas) l = log_uniform();
    Params truth(theta, std::move(lambdas));

    SpacingsMatrix data = sample_dataset(spec, truth, n, rng);
    return RandomInstance{spec, std::move(truth), std::move(data)};
}

}  // namespace loadshare
