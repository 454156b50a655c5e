#pragma once

// Domain types and likelihood evaluation for k-component parallel
// load-sharing systems.
//
// Two models are supported:
//  - Kim-Kvam: after the (j-1)-th failure the k-j+1 survivors each fail at
//    constant rate lambda_{j-1} * theta.
//  - Singh-Sharma-Kumar (SSK): as Kim-Kvam for stages j <= s; for stages
//    j > s each survivor has the linear hazard lambda_{j-1} * theta * t,
//    where t is the time elapsed since the previous failure.
//
// Stages are indexed from 0 in code: stage c covers the spacing between the
// c-th and (c+1)-th failure, has k-c survivors and load-share multiplier
// lambda_c, with lambda_0 = 1.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace loadshare {

enum class ModelKind { KimKvam, SSK };

std::string_view to_string(ModelKind kind);

class ModelSpec {
public:
    /// Throws Error(InvalidModelSpec) unless k >= 2.
    static ModelSpec kim_kvam(std::size_t k);
    /// Throws Error(InvalidModelSpec) unless k >= 3 and 2 <= s <= k-1.
    static ModelSpec ssk(std::size_t k, std::size_t s);

    ModelKind kind() const noexcept { return kind_; }
    std::size_t k() const noexcept { return k_; }
    /// Switch index; empty for Kim-Kvam.
    std::optional<std::size_t> s() const noexcept;

    /// True when 0-based stage c has a constant hazard.
    bool constant_hazard_stage(std::size_t c) const noexcept {
        return kind_ == ModelKind::KimKvam || c < s_;
    }
    /// Number of components alive during stage c.
    double survivors(std::size_t c) const noexcept { return static_cast<double>(k_ - c); }

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

private:
    ModelSpec(ModelKind kind, std::size_t k, std::size_t s) : kind_(kind), k_(k), s_(s) {}

    ModelKind kind_;
    std::size_t k_;
    std::size_t s_;  // 0 for Kim-Kvam
};

/// (theta, lambda_1, ..., lambda_{k-1}); lambda_0 = 1 is implicit.
class Params {
public:
    /// Throws Error(InvalidParams) for a nonpositive or non-finite entry.
    Params(double theta, std::vector<double> lambdas);

    /// Inverse of as_vector().
    static Params from_vector(std::span<const double> values);

    double theta() const noexcept { return theta_; }
    std::span<const double> lambdas() const noexcept { return lambdas_; }
    /// Multiplier of stage c, with lambda(0) == 1.
    double lambda(std::size_t c) const noexcept { return c == 0 ? 1.0 : lambdas_[c - 1]; }
    std::size_t size() const noexcept { return lambdas_.size() + 1; }

    std::vector<double> as_vector() const;

    friend bool operator==(const Params&, const Params&) = default;

private:
    double theta_;
    std::vector<double> lambdas_;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, std::vector<double>(rows * cols)) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// n x k inter-failure spacings; every entry finite and strictly positive.
class SpacingsMatrix {
public:
    /// Throws Error(NonPositiveSpacing) naming the first offending cell, or
    /// Error(DimensionMismatch) for an empty matrix.
    explicit SpacingsMatrix(Matrix values);
    static SpacingsMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t n() const noexcept { return values_.rows(); }
    std::size_t k() const noexcept { return values_.cols(); }
    double operator()(std::size_t i, std::size_t c) const noexcept { return values_(i, c); }
    std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
    const Matrix& matrix() const noexcept { return values_; }

    friend bool operator==(const SpacingsMatrix&, const SpacingsMatrix&) = default;

private:
    Matrix values_;
};

/// Sorts each row of raw component lifetimes and differences it against a
/// zero start time. Rows must be strictly positive with distinct values.
SpacingsMatrix spacings_from_lifetimes(const Matrix& lifetimes);

/// Elementwise y_ij: (k-j+1) t_ij in constant-hazard stages and
/// (k-j+1) t_ij^2 / 2 in linear-hazard stages. SSK only.
Matrix y_transform(const ModelSpec& spec, const SpacingsMatrix& t);

/// Per-stage exposure totals sum_i y_ij, evaluated in the factored form
/// (k-j+1) * sum_i t_ij  or  (k-j+1)/2 * sum_i t_ij^2.
/// For Kim-Kvam every stage is constant-hazard.
std::vector<double> stage_exposures(const ModelSpec& spec, const SpacingsMatrix& t);

/// log(k!) by summing logarithms.
double log_factorial(std::size_t k);

/// Exact log-density of the sample, including n log(k!) and, for SSK, the
/// sum of log t_ij over linear-hazard stages.
double log_likelihood(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t);

/// Analytic gradient (d/dtheta, d/dlambda_1, ..., d/dlambda_{k-1}).
std::vector<double> score(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t);

/// Throws Error(DimensionMismatch) unless spec, params and data agree on k.
void check_dimensions(const ModelSpec& spec, const Params& params, const SpacingsMatrix& t);
void check_dimensions(const ModelSpec& spec, const SpacingsMatrix& t);

}  // namespace loadshare
