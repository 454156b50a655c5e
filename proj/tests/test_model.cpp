#include <catch2/catch_amalgamated.hpp>

#include "loadshare/error.hpp"
#include "loadshare/estimator.hpp"
#include "loadshare/model.hpp"
#include "loadshare/oracle.hpp"
#include "loadshare/simulator.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>

using namespace loadshare;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected loadshare::Error");
    return ErrorKind::MalformedData;
}

}  // namespace

TEST_CASE("ModelSpec enforces k and s ranges", "[model]") {
    CHECK(kind_of([] { ModelSpec::kim_kvam(1); }) == ErrorKind::InvalidModelSpec);
    CHECK(kind_of([] { ModelSpec::kim_kvam(0); }) == ErrorKind::InvalidModelSpec);
    CHECK(kind_of([] { ModelSpec::ssk(3, 3); }) == ErrorKind::InvalidModelSpec);
    CHECK(kind_of([] { ModelSpec::ssk(3, 1); }) == ErrorKind::InvalidModelSpec);
    CHECK(kind_of([] { ModelSpec::ssk(2, 2); }) == ErrorKind::InvalidModelSpec);

    const auto kk = ModelSpec::kim_kvam(2);
    CHECK(kk.k() == 2);
    CHECK_FALSE(kk.s().has_value());

    const auto ssk = ModelSpec::ssk(5, 3);
    REQUIRE(ssk.s().has_value());
    CHECK(*ssk.s() == 3);
    // Stages j = 1..s (c = 0..s-1) have constant hazard.
    CHECK(ssk.constant_hazard_stage(0));
    CHECK(ssk.constant_hazard_stage(2));
    CHECK_FALSE(ssk.constant_hazard_stage(3));
    CHECK_FALSE(ssk.constant_hazard_stage(4));
    CHECK(ssk.survivors(0) == 5.0);
    CHECK(ssk.survivors(4) == 1.0);
}

TEST_CASE("Params validates positivity and exposes lambda_0 = 1", "[model]") {
    const Params p(2.0, {3.0, 4.0});
    CHECK(p.lambda(0) == 1.0);
    CHECK(p.lambda(2) == 4.0);
    CHECK(p.as_vector() == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(Params::from_vector(p.as_vector()) == p);

    CHECK(kind_of([] { Params(0.0, {1.0}); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([] { Params(1.0, {1.0, -2.0}); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([] { Params(std::nan(""), {1.0}); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([] { Params(1.0, {HUGE_VAL}); }) == ErrorKind::InvalidParams);
}

TEST_CASE("SpacingsMatrix rejects nonpositive cells and names them", "[model]") {
    CHECK_NOTHROW(SpacingsMatrix::from_rows({{1.0, 2.0}}));
    try {
        SpacingsMatrix::from_rows({{1.0, 2.0}, {3.0, 0.0}});
        FAIL("zero spacing accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonPositiveSpacing);
        CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("row 2, column 2"));
    }
    CHECK(kind_of([] { SpacingsMatrix::from_rows({{1.0, -1.0}}); }) == ErrorKind::NonPositiveSpacing);
    CHECK(kind_of([] { SpacingsMatrix::from_rows({{1.0, std::nan("")}}); }) == ErrorKind::NonPositiveSpacing);
    CHECK(kind_of([] { SpacingsMatrix::from_rows({{1.0, 2.0}, {1.0}}); }) == ErrorKind::DimensionMismatch);
    CHECK(kind_of([] { SpacingsMatrix::from_rows({}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("spacings_from_lifetimes sorts and differences each row", "[model]") {
    CHECK(spacings_from_lifetimes(Matrix(1, 3, {3, 1, 2})) == SpacingsMatrix::from_rows({{1, 1, 1}}));
    CHECK(spacings_from_lifetimes(Matrix(2, 3, {1, 2, 4, 5, 1, 2})) ==
          SpacingsMatrix::from_rows({{1, 1, 2}, {1, 1, 3}}));

    CHECK(kind_of([] { spacings_from_lifetimes(Matrix(1, 3, {2, 2, 3})); }) == ErrorKind::DuplicateLifetime);
    CHECK(kind_of([] { spacings_from_lifetimes(Matrix(1, 3, {0, 2, 3})); }) == ErrorKind::NonPositiveLifetime);
    CHECK(kind_of([] { spacings_from_lifetimes(Matrix(1, 2, {-1, 2})); }) == ErrorKind::NonPositiveLifetime);
}

TEST_CASE("y_transform applies the phase-dependent weights", "[model]") {
    const auto spec = ModelSpec::ssk(3, 2);
    CHECK(y_transform(spec, SpacingsMatrix::from_rows({{1, 1, 1}})) == Matrix(1, 3, {3, 2, 0.5}));
    CHECK(y_transform(spec, SpacingsMatrix::from_rows({{2, 1, 2}})) == Matrix(1, 3, {6, 2, 2}));
    CHECK(y_transform(ModelSpec::ssk(4, 3), SpacingsMatrix::from_rows({{1, 1, 1, 1}})) ==
          Matrix(1, 4, {4, 3, 2, 0.5}));

    CHECK(kind_of([] { y_transform(ModelSpec::kim_kvam(3), SpacingsMatrix::from_rows({{1, 1, 1}})); }) ==
          ErrorKind::ModelMismatch);
    CHECK(kind_of([&] { y_transform(spec, SpacingsMatrix::from_rows({{1, 1}})); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("stage_exposures equal the column sums of y_transform", "[model]") {
    const auto spec = ModelSpec::ssk(5, 2);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto inst = random_instance(ModelKind::SSK, 11, i, {.k_min = 5, .k_max = 5, .fixed_s = 2});
        const Matrix y = y_transform(spec, inst.data);
        const auto exposure = stage_exposures(spec, inst.data);
        for (std::size_t c = 0; c < spec.k(); ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < y.rows(); ++r) sum += y(r, c);
            CHECK_THAT(exposure[c], WithinRel(sum, 1e-13));
        }
    }
}

TEST_CASE("log_factorial sums logs without overflow", "[model]") {
    CHECK(log_factorial(0) == 0.0);
    CHECK(log_factorial(1) == 0.0);
    CHECK_THAT(log_factorial(3), WithinRel(std::log(6.0), 1e-15));
    CHECK_THAT(log_factorial(170), WithinRel(std::lgamma(171.0), 1e-13));
    CHECK_THAT(log_factorial(5000), WithinRel(std::lgamma(5001.0), 1e-12));
}

TEST_CASE("log_likelihood hand-evaluated values", "[model]") {
    // L = 2! * exp(-(2*1 + 1*1)) for Kim-Kvam k=2, theta=lambda_1=1, t=(1,1).
    CHECK_THAT(log_likelihood(ModelSpec::kim_kvam(2), Params(1.0, {1.0}), SpacingsMatrix::from_rows({{1, 1}})),
               WithinAbs(std::log(2.0) - 3.0, 1e-14));
    // SSK k=3, s=2: exponent 3 + 2 + 0.5, prefactor 3!, data term log(1) = 0.
    CHECK_THAT(
        log_likelihood(ModelSpec::ssk(3, 2), Params(1.0, {1.0, 1.0}), SpacingsMatrix::from_rows({{1, 1, 1}})),
        WithinAbs(std::log(6.0) - 5.5, 1e-14));
    CHECK_THAT(log_likelihood(ModelSpec::kim_kvam(2), Params(1.0, {1.0}), SpacingsMatrix::from_rows({{1, 1}})),
               WithinAbs(-2.3068528194400546, 1e-12));
    CHECK_THAT(
        log_likelihood(ModelSpec::ssk(3, 2), Params(1.0, {1.0, 1.0}), SpacingsMatrix::from_rows({{1, 1, 1}})),
        WithinAbs(-3.7082405307719455, 1e-12));
}

TEST_CASE("log_likelihood rejects inconsistent dimensions", "[model]") {
    const auto t = SpacingsMatrix::from_rows({{1, 1, 1}});
    CHECK(kind_of([&] { log_likelihood(ModelSpec::kim_kvam(2), Params(1.0, {1.0}), t); }) ==
          ErrorKind::DimensionMismatch);
    CHECK(kind_of([&] { log_likelihood(ModelSpec::kim_kvam(3), Params(1.0, {1.0}), t); }) ==
          ErrorKind::DimensionMismatch);
    CHECK(kind_of([&] { score(ModelSpec::kim_kvam(3), Params(1.0, {1.0}), t); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("log_likelihood matches the product of per-spacing densities", "[model][property]") {
    for (const auto kind : {ModelKind::KimKvam, ModelKind::SSK}) {
        for (std::uint64_t i = 0; i < 100; ++i) {
            const auto inst = random_instance(kind, 21, i);
            const auto other = random_instance(kind, 22, i, {.k_min = inst.spec.k(), .k_max = inst.spec.k()});
            const double expected = testing::density_product_loglik(inst.spec, other.truth, inst.data);
            CHECK_THAT(log_likelihood(inst.spec, other.truth, inst.data), WithinRel(expected, 1e-11));
        }
    }
}

TEST_CASE("log_likelihood is lower at (2 theta_hat, lambda_hat)", "[model][property]") {
    for (const auto kind : {ModelKind::KimKvam, ModelKind::SSK}) {
        for (std::uint64_t i = 0; i < 50; ++i) {
            const auto inst = random_instance(kind, 31, i);
            const FitResult fit = closed_form_mle(inst.spec, inst.data);
            const auto lambdas = fit.params_hat.lambdas();
            const Params doubled(2.0 * fit.params_hat.theta(), {lambdas.begin(), lambdas.end()});
            CHECK(log_likelihood(inst.spec, doubled, inst.data) < fit.loglik_at_mle);
        }
    }
}

TEST_CASE("log_likelihood is invariant to row permutation", "[model][property]") {
    for (const auto kind : {ModelKind::KimKvam, ModelKind::SSK}) {
        for (std::uint64_t i = 0; i < 30; ++i) {
            const auto inst = random_instance(kind, 41, i);
            std::vector<std::vector<double>> rows;
            for (std::size_t r = inst.data.n(); r-- > 0;) {
                rows.emplace_back(inst.data.row(r).begin(), inst.data.row(r).end());
            }
            const auto reversed = SpacingsMatrix::from_rows(rows);
            // Summation order only; rounding grows with the number of terms.
            const double ref = log_likelihood(inst.spec, inst.truth, inst.data);
            const double bound = 1e-13 * static_cast<double>(inst.data.n() * inst.spec.k()) * std::max(1.0, std::abs(ref));
            CHECK_THAT(log_likelihood(inst.spec, inst.truth, reversed), WithinAbs(ref, bound));
        }
    }
}

TEST_CASE("score hand-evaluated value", "[model]") {
    const auto g = score(ModelSpec::kim_kvam(2), Params(1.0, {1.0}), SpacingsMatrix::from_rows({{1, 1}}));
    REQUIRE(g.size() == 2);
    CHECK_THAT(g[0], WithinAbs(-1.0, 1e-15));
    CHECK_THAT(g[1], WithinAbs(0.0, 1e-15));
}

TEST_CASE("score vanishes at the closed-form MLE", "[model][property]") {
    for (const auto kind : {ModelKind::KimKvam, ModelKind::SSK}) {
        for (std::uint64_t i = 0; i < 100; ++i) {
            const auto inst = random_instance(kind, 51, i);
            const FitResult fit = closed_form_mle(inst.spec, inst.data);
            const auto g = score(inst.spec, fit.params_hat, inst.data);
            const double bound = 1e-8 * static_cast<double>(inst.data.n() * inst.spec.k());
            for (const double v : g) CHECK(std::abs(v) <= bound);
        }
    }
}

TEST_CASE("score agrees with central finite differences", "[model][property]") {
    for (const auto kind : {ModelKind::KimKvam, ModelKind::SSK}) {
        for (std::uint64_t i = 0; i < 100; ++i) {
            const auto inst = random_instance(kind, 61, i);
            const auto at = random_instance(kind, 62, i, {.k_min = inst.spec.k(), .k_max = inst.spec.k()}).truth;
            const auto analytic = score(inst.spec, at, inst.data);
            const auto numeric = fd_gradient(inst.spec, at, inst.data, 1e-6);
            for (std::size_t q = 0; q < analytic.size(); ++q) {
                const double err = std::abs(numeric[q] - analytic[q]) / std::max(1.0, std::abs(analytic[q]));
                CHECK(err <= 1e-5);
            }
        }
    }
}

TEST_CASE("SSK and Kim-Kvam scores coincide on constant-hazard stages", "[model][property]") {
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto inst = random_instance(ModelKind::SSK, 71, i);
        const auto kk = ModelSpec::kim_kvam(inst.spec.k());
        const auto g_ssk = score(inst.spec, inst.truth, inst.data);
        const auto g_kk = score(kk, inst.truth, inst.data);
        for (std::size_t c = 1; c < *inst.spec.s(); ++c) CHECK(g_ssk[c] == g_kk[c]);
    }
}

TEST_CASE("Kim-Kvam scale law", "[model][estimator][property]") {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto inst = random_instance(ModelKind::KimKvam, 81, i);
        const double scale = 3.5;
        Matrix scaled(inst.data.n(), inst.data.k());
        for (std::size_t r = 0; r < inst.data.n(); ++r) {
            for (std::size_t c = 0; c < inst.data.k(); ++c) scaled(r, c) = scale * inst.data(r, c);
        }
        const auto base = closed_form_mle(inst.spec, inst.data);
        const auto fit = closed_form_mle(inst.spec, SpacingsMatrix(scaled));
        for (std::size_t c = 0; c < inst.spec.k(); ++c) {
            CHECK_THAT(fit.stats.sums[c], WithinRel(scale * base.stats.sums[c], 1e-13));
        }
        CHECK_THAT(fit.params_hat.theta(), WithinRel(base.params_hat.theta() / scale, 1e-13));
        for (std::size_t c = 1; c < inst.spec.k(); ++c) {
            CHECK_THAT(fit.params_hat.lambda(c), WithinRel(base.params_hat.lambda(c), 1e-13));
        }
    }
}
