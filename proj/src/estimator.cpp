#include "loadshare/estimator.hpp"

namespace loadshare {

SufficientStats sufficient_stats(const ModelSpec& spec, const SpacingsMatrix& t) {
    check_dimensions(spec, t);
    SufficientStats stats;
    stats.n = t.n();
    if (spec.kind() == ModelKind::SSK) {
        stats.sums = stage_exposures(spec, t);
        return stats;
    }
    stats.sums.assign(spec.k(), 0.0);
    for (std::size_t c = 0; c < spec.k(); ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < t.n(); ++i) sum += t(i, c);
        stats.sums[c] = sum;
    }
    return stats;
}

FitResult closed_form_mle(const ModelSpec& spec, const SpacingsMatrix& t) {
    SufficientStats stats = sufficient_stats(spec, t);
    const auto n = static_cast<double>(t.n());

    // Stage exposures (k-j+1) t_{.j}; for SSK the stats already hold y_{.j}.
    std::vector<double> exposure = stats.sums;
    if (spec.kind() == ModelKind::KimKvam) {
        for (std::size_t c = 0; c < spec.k(); ++c) exposure[c] = spec.survivors(c) * stats.sums[c];
    }

    const double theta_hat = n / exposure[0];
    std::vector<double> lambda_hat(spec.k() - 1);
    for (std::size_t c = 1; c < spec.k(); ++c) lambda_hat[c - 1] = exposure[0] / exposure[c];

    Params params(theta_hat, std::move(lambda_hat));
    const double loglik = log_likelihood(spec, params, t);
    return FitResult{std::move(params), loglik, std::move(stats), spec, t.n(), 0};
}

}  // namespace loadshare
