#pragma once

#include "loadshare/model.hpp"

#include <cstddef>
#include <vector>

namespace loadshare {

/// Per-stage totals the closed-form estimators consume: plain column sums
/// t_{.j} for Kim-Kvam, transformed sums y_{.j} for SSK.
struct SufficientStats {
    std::vector<double> sums;
    std::size_t n = 0;
};

struct FitResult {
    Params params_hat;
    double loglik_at_mle = 0.0;
    SufficientStats stats;
    ModelSpec model;
    std::size_t n = 0;
    /// Coordinate-ascent sweeps used; 0 for the closed form.
    std::size_t iterations = 0;
};

SufficientStats sufficient_stats(const ModelSpec& spec, const SpacingsMatrix& t);

/// Closed-form maximum-likelihood estimates.
///
/// Both models share theta_hat = n / (k * sum_i t_i1). For stage j >= 2,
///   lambda_hat_{j-1} = k * sum_i t_i1 / ((k-j+1) * sum_i t_ij)          (constant hazard)
///   lambda_hat_{j-1} = k * sum_i t_i1 / ((k-j+1)/2 * sum_i t_ij^2)      (SSK linear hazard)
/// The SSK estimates are computed from the same factored totals, so theta_hat
/// and the constant-hazard lambda_hat are bitwise equal across the two models.
FitResult closed_form_mle(const ModelSpec& spec, const SpacingsMatrix& t);

}  // namespace loadshare
