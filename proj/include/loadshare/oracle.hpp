#pragma once

// Derivative-free reference maximizer. It evaluates log_likelihood() and
// nothing else, so agreement with closed_form_mle() is an independent check
// of the closed forms (and fd_gradient() of the analytic score).

#include "loadshare/estimator.hpp"
#include "loadshare/model.hpp"

#include <cstddef>
#include <vector>

namespace loadshare {

struct OracleConfig {
    std::size_t max_iters = 200;   ///< coordinate-ascent sweeps
    double tol = 1e-10;            ///< max relative parameter change per sweep
    double bracket_expand = 4.0;   ///< geometric growth factor when bracketing
    double line_width = 1e-12;     ///< golden-section stop: relative bracket width (log scale)

    /// Throws Error(InvalidParams) on a violated invariant.
    void validate() const;
};

/// Log-likelihood after every accepted or rejected 1-D search, in order.
struct OracleTrace {
    std::vector<double> loglik;
    double final_change = 0.0;
};

/// Cyclic coordinate ascent over (log theta, log lambda_1, ...) from the
/// all-ones start. Each coordinate is bracketed by geometric expansion and
/// refined by golden-section search; a move is kept only if it raises the
/// log-likelihood. Throws Error(NoConvergence) if `max_iters` sweeps pass
/// without the relative change dropping below `tol`.
FitResult numeric_mle(const ModelSpec& spec, const SpacingsMatrix& t, const OracleConfig& cfg = {},
                      OracleTrace* trace = nullptr);

/// Central differences of log_likelihood with per-parameter step
/// step * max(1, |p|). Throws Error(InvalidParams) if p - h <= 0.
std::vector<double> fd_gradient(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t,
                                double step);

}  // namespace loadshare
