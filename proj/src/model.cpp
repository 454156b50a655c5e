#include "loadshare/model.hpp"

#include "loadshare/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace loadshare {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidModelSpec: return "InvalidModelSpec";
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ModelMismatch: return "ModelMismatch";
        case ErrorKind::NonPositiveLifetime: return "NonPositiveLifetime";
        case ErrorKind::DuplicateLifetime: return "DuplicateLifetime";
        case ErrorKind::NonPositiveSpacing: return "NonPositiveSpacing";
        case ErrorKind::InvalidSampleSize: return "InvalidSampleSize";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::MalformedData: return "MalformedData";
    }
    return "Unknown";
}

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::KimKvam ? "kim-kvam" : "ssk";
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec ModelSpec::kim_kvam(std::size_t k) {
    if (k < 2) {
        throw Error(ErrorKind::InvalidModelSpec,
                    "k must satisfy k >= 2 (got k = " + std::to_string(k) + ")");
    }
    return ModelSpec(ModelKind::KimKvam, k, 0);
}

ModelSpec ModelSpec::ssk(std::size_t k, std::size_t s) {
    if (k < 2) {
        throw Error(ErrorKind::InvalidModelSpec,
                    "k must satisfy k >= 2 (got k = " + std::to_string(k) + ")");
    }
    if (s < 2 || s + 1 > k) {
        throw Error(ErrorKind::InvalidModelSpec,
                    "s must satisfy 2 <= s <= k-1 (got s = " + std::to_string(s) +
                        ", k = " + std::to_string(k) + ")");
    }
    return ModelSpec(ModelKind::SSK, k, s);
}

std::optional<std::size_t> ModelSpec::s() const noexcept {
    if (kind_ == ModelKind::SSK) return s_;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Params

namespace {

void require_positive_param(double value, const char* name, std::size_t index) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << name;
        if (index > 0) msg << "_" << index;
        msg << " must be finite and > 0 (got " << value << ")";
        throw Error(ErrorKind::InvalidParams, msg.str());
    }
}

}  // namespace

Params::Params(double theta, std::vector<double> lambdas)
    : theta_(theta), lambdas_(std::move(lambdas)) {
    require_positive_param(theta_, "theta", 0);
    for (std::size_t j = 0; j < lambdas_.size(); ++j) {
        require_positive_param(lambdas_[j], "lambda", j + 1);
    }
}

Params Params::from_vector(std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorKind::InvalidParams, "parameter vector is empty");
    }
    return Params(values[0], std::vector<double>(values.begin() + 1, values.end()));
}

std::vector<double> Params::as_vector() const {
    std::vector<double> out;
    out.reserve(size());
    out.push_back(theta_);
    out.insert(out.end(), lambdas_.begin(), lambdas_.end());
    return out;
}

// ---------------------------------------------------------------------------
// Matrix / SpacingsMatrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorKind::DimensionMismatch,
                    "matrix storage holds " + std::to_string(data_.size()) + " values, expected " +
                        std::to_string(rows_ * cols_));
    }
}

SpacingsMatrix::SpacingsMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "spacings matrix must have at least one row and column");
    }
    for (std::size_t i = 0; i < values_.rows(); ++i) {
        for (std::size_t c = 0; c < values_.cols(); ++c) {
            const double v = values_(i, c);
            if (!(v > 0.0) || !std::isfinite(v)) {
                std::ostringstream msg;
                msg << "spacing at row " << i + 1 << ", column " << c + 1
                    << " must be finite and > 0 (got " << v << ")";
                throw Error(ErrorKind::NonPositiveSpacing, msg.str());
            }
        }
    }
}

SpacingsMatrix SpacingsMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t k = n == 0 ? 0 : rows.front().size();
    std::vector<double> data;
    data.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != k) {
            throw Error(ErrorKind::DimensionMismatch,
                        "row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                            " values, expected " + std::to_string(k));
        }
        data.insert(data.end(), rows[i].begin(), rows[i].end());
    }
    return SpacingsMatrix(Matrix(n, k, std::move(data)));
}

SpacingsMatrix spacings_from_lifetimes(const Matrix& lifetimes) {
    const std::size_t n = lifetimes.rows();
    const std::size_t k = lifetimes.cols();
    std::vector<double> out;
    out.reserve(n * k);
    std::vector<double> sorted(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < k; ++m) {
            const double x = lifetimes(i, m);
            if (!(x > 0.0) || !std::isfinite(x)) {
                std::ostringstream msg;
                msg << "lifetime at row " << i + 1 << ", column " << m + 1
                    << " must be finite and > 0 (got " << x << ")";
                throw Error(ErrorKind::NonPositiveLifetime, msg.str());
            }
        }
        const auto row = lifetimes.row(i);
        std::copy(row.begin(), row.end(), sorted.begin());
        std::sort(sorted.begin(), sorted.end());
        if (const auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
            std::ostringstream msg;
            msg << "row " << i + 1 << " contains the lifetime " << *dup
                << " more than once (ties give a zero spacing)";
            throw Error(ErrorKind::DuplicateLifetime, msg.str());
        }
        double previous = 0.0;
        for (const double x : sorted) {
            out.push_back(x - previous);
            previous = x;
        }
    }
    return SpacingsMatrix(Matrix(n, k, std::move(out)));
}

// ---------------------------------------------------------------------------
// Likelihood

void check_dimensions(const ModelSpec& spec, const SpacingsMatrix& t) {
    if (t.k() != spec.k()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "data has " + std::to_string(t.k()) + " columns but the model has k = " +
                        std::to_string(spec.k()));
    }
}

void check_dimensions(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t) {
    check_dimensions(spec, t);
    if (params.size() != spec.k()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "expected " + std::to_string(spec.k() - 1) + " lambda values, got " +
                        std::to_string(params.size() - 1));
    }
}

Matrix y_transform(const ModelSpec& spec, const SpacingsMatrix& t) {
    if (spec.kind() != ModelKind::SSK) {
        throw Error(ErrorKind::ModelMismatch, "y_transform is defined for the SSK model only");
    }
    check_dimensions(spec, t);
    Matrix y(t.n(), t.k());
    for (std::size_t i = 0; i < t.n(); ++i) {
        for (std::size_t c = 0; c < t.k(); ++c) {
            const double v = t(i, c);
            y(i, c) = spec.constant_hazard_stage(c) ? spec.survivors(c) * v
                                                    : 0.5 * spec.survivors(c) * v * v;
        }
    }
    return y;
}

std::vector<double> stage_exposures(const ModelSpec& spec, const SpacingsMatrix& t) {
    check_dimensions(spec, t);
    std::vector<double> out(spec.k(), 0.0);
    for (std::size_t c = 0; c < spec.k(); ++c) {
        double sum = 0.0;
        if (spec.constant_hazard_stage(c)) {
            for (std::size_t i = 0; i < t.n(); ++i) sum += t(i, c);
            out[c] = spec.survivors(c) * sum;
        } else {
            for (std::size_t i = 0; i < t.n(); ++i) sum += t(i, c) * t(i, c);
            out[c] = 0.5 * spec.survivors(c) * sum;
        }
    }
    return out;
}

double log_factorial(std::size_t k) {
    double sum = 0.0;
    for (std::size_t m = 2; m <= k; ++m) sum += std::log(static_cast<double>(m));
    return sum;
}

double log_likelihood(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t) {
    check_dimensions(spec, params, t);
    const auto n = static_cast<double>(t.n());
    const auto k = static_cast<double>(spec.k());

    double log_lambda_sum = 0.0;
    for (std::size_t c = 1; c < spec.k(); ++c) log_lambda_sum += std::log(params.lambda(c));

    // Exponent and Jacobian-like data term, evaluated term by term as the
    // density is written rather than through column totals.
    double exponent = 0.0;
    double log_t_sum = 0.0;
    for (std::size_t i = 0; i < t.n(); ++i) {
        for (std::size_t c = 0; c < spec.k(); ++c) {
            const double v = t(i, c);
            if (spec.constant_hazard_stage(c)) {
                exponent += spec.survivors(c) * params.lambda(c) * v;
            } else {
                exponent += 0.5 * spec.survivors(c) * params.lambda(c) * v * v;
                log_t_sum += std::log(v);
            }
        }
    }

    return n * log_factorial(spec.k()) + n * k * std::log(params.theta()) + n * log_lambda_sum -
           params.theta() * exponent + log_t_sum;
}

std::vector<double> score(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t) {
    check_dimensions(spec, params, t);
    const auto n = static_cast<double>(t.n());
    const auto k = static_cast<double>(spec.k());
    const std::vector<double> exposure = stage_exposures(spec, t);

    std::vector<double> grad(spec.k());
    double weighted = 0.0;
    for (std::size_t c = 0; c < spec.k(); ++c) weighted += params.lambda(c) * exposure[c];
    grad[0] = n * k / params.theta() - weighted;
    for (std::size_t c = 1; c < spec.k(); ++c) {
        grad[c] = n / params.lambda(c) - params.theta() * exposure[c];
    }
    return grad;
}

}  // namespace loadshare
