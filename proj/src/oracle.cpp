#include "loadshare/oracle.hpp"

#include "loadshare/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace loadshare {

void OracleConfig::validate() const {
    if (max_iters < 1) throw Error(ErrorKind::InvalidParams, "oracle max_iters must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParams, "oracle tol must be > 0");
    if (!(bracket_expand > 1.0)) throw Error(ErrorKind::InvalidParams, "oracle bracket_expand must be > 1");
    if (!(line_width > 0.0)) throw Error(ErrorKind::InvalidParams, "oracle line_width must be > 0");
}

namespace {

constexpr double kInvGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr std::size_t kMaxExpansions = 200;

class LogSpaceObjective {
public:
    LogSpaceObjective(const ModelSpec& spec, const SpacingsMatrix& t) : spec_(spec), t_(t) {}

    double operator()(const std::vector<double>& x) const {
        std::vector<double> p(x.size());
        std::transform(x.begin(), x.end(), p.begin(), [](double v) { return std::exp(v); });
        // Overflow or underflow of exp() is treated as an infinitely bad point.
        for (const double v : p) {
            if (!(v > 0.0) || !std::isfinite(v)) return -HUGE_VAL;
        }
        const double value = log_likelihood(spec_, Params::from_vector(p), t_);
        return std::isnan(value) ? -HUGE_VAL : value;
    }

private:
    const ModelSpec& spec_;
    const SpacingsMatrix& t_;
};

struct LinePoint {
    double x;
    double f;
};

// Maximizes the objective along coordinate `c` starting from x[c] with value
// fx. Returns the best point evaluated; x is left unchanged.
LinePoint line_maximize(const LogSpaceObjective& objective, std::vector<double> x, std::size_t c, double fx,
                        const OracleConfig& cfg) {
    auto eval = [&](double v) {
        x[c] = v;
        return objective(x);
    };
    const double x0 = x[c];
    LinePoint best{x0, fx};
    auto consider = [&](double v, double f) {
        if (f > best.f) best = {v, f};
    };

    // Bracket: find lo < mid < hi with f(mid) >= f(lo), f(hi).
    const double h = 1.0;
    const double fp = eval(x0 + h);
    const double fm = eval(x0 - h);
    consider(x0 + h, fp);
    consider(x0 - h, fm);

    double lo = x0 - h;
    double hi = x0 + h;
    if (fp > fx || fm > fx) {
        const double dir = fp >= fm ? 1.0 : -1.0;
        double a = x0;
        double b = x0 + dir * h;
        double fb = std::max(fp, fm);
        double step = h;
        double cpt = b;
        for (std::size_t e = 0; e < kMaxExpansions; ++e) {
            step *= cfg.bracket_expand;
            cpt = b + dir * step;
            const double fc = eval(cpt);
            consider(cpt, fc);
            if (fc < fb) break;
            a = b;
            b = cpt;
            fb = fc;
        }
        lo = std::min(a, cpt);
        hi = std::max(a, cpt);
    }

    // Golden-section refinement.
    double c1 = hi - kInvGolden * (hi - lo);
    double c2 = lo + kInvGolden * (hi - lo);
    double f1 = eval(c1);
    double f2 = eval(c2);
    consider(c1, f1);
    consider(c2, f2);
    while (hi - lo > cfg.line_width * std::max(1.0, std::abs(0.5 * (lo + hi)))) {
        if (f1 >= f2) {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - kInvGolden * (hi - lo);
            f1 = eval(c1);
            consider(c1, f1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + kInvGolden * (hi - lo);
            f2 = eval(c2);
            consider(c2, f2);
        }
    }
    return best;
}

}  // namespace

FitResult numeric_mle(const ModelSpec& spec, const SpacingsMatrix& t, const OracleConfig& cfg,
                      OracleTrace* trace) {
    cfg.validate();
    check_dimensions(spec, t);

    const LogSpaceObjective objective(spec, t);
    std::vector<double> x(spec.k(), 0.0);
    double fx = objective(x);
    if (trace != nullptr) trace->loglik.assign(1, fx);

    std::size_t sweep = 0;
    double change = HUGE_VAL;
    while (sweep < cfg.max_iters) {
        ++sweep;
        change = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) {
            const LinePoint best = line_maximize(objective, x, c, fx, cfg);
            if (best.f > fx) {
                change = std::max(change, std::abs(std::expm1(best.x - x[c])));
                x[c] = best.x;
                fx = best.f;
            }
            if (trace != nullptr) trace->loglik.push_back(fx);
        }
        if (change < cfg.tol) break;
    }
    if (trace != nullptr) trace->final_change = change;
    if (change >= cfg.tol) {
        std::ostringstream msg;
        msg << "coordinate ascent did not converge in " << cfg.max_iters
            << " sweeps (last relative change " << change << ", tol " << cfg.tol << ")";
        throw Error(ErrorKind::NoConvergence, msg.str());
    }

    std::vector<double> p(x.size());
    std::transform(x.begin(), x.end(), p.begin(), [](double v) { return std::exp(v); });
    return FitResult{Params::from_vector(p), fx, sufficient_stats(spec, t), spec, t.n(), sweep};
}

std::vector<double> fd_gradient(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t,
                                double step) {
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidParams, "finite-difference step must be > 0");
    check_dimensions(spec, params, t);
    const std::vector<double> base = params.as_vector();
    std::vector<double> grad(base.size());
    for (std::size_t q = 0; q < base.size(); ++q) {
        const double h = step * std::max(1.0, std::abs(base[q]));
        if (!(base[q] - h > 0.0)) {
            std::ostringstream msg;
            msg << "finite-difference step " << h << " leaves the positive orthant for parameter " << q;
            throw Error(ErrorKind::InvalidParams, msg.str());
        }
        std::vector<double> up = base;
        std::vector<double> down = base;
        up[q] += h;
        down[q] -= h;
        const double f_up = log_likelihood(spec, Params::from_vector(up), t);
        const double f_down = log_likelihood(spec, Params::from_vector(down), t);
        grad[q] = (f_up - f_down) / ((up[q] - down[q]));
    }
    return grad;
}

}  // namespace loadshare
