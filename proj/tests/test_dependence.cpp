#include <doctest.h>
#include <xtproc/dependence.hpp>

#include "oracles.hpp"

using namespace xtproc;

namespace {

MatrixXd corr2(double r)
{
    MatrixXd m(2, 2);
    m << 1, r, r, 1;
    return m;
}

MatrixXd equicorrelation(Eigen::Index d, double r)
{
    MatrixXd m = MatrixXd::Constant(d, d, r);
    m.diagonal().setOnes();
    return m;
}

MatrixXd test_corr3()
{
    MatrixXd m(3, 3);
    m << 1.0, 0.45, -0.2, 0.45, 1.0, 0.3, -0.2, 0.3, 1.0;
    return m;
}

VectorXd vec(std::initializer_list<double> xs)
{
    VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

const double inf = std::numeric_limits<double>::infinity();

} // namespace

TEST_CASE("mvt_cdf: univariate shortcut is exact")
{
    const auto r = mvt_cdf(vec({1.0}), 1.0, MatrixXd::Identity(1, 1), {});
    CHECK(std::abs(r.value - 0.75) < 1e-12);
    CHECK(r.error_estimate == 0.0);
    // dispersion 4 halves the standardized argument
    MatrixXd four(1, 1);
    four << 4.0;
    CHECK(std::abs(mvt_cdf(vec({2.0}), 1.0, four, {}).value - 0.75) < 1e-12);
}

TEST_CASE("mvt_cdf: bivariate orthant probabilities")
{
    for (double df : {0.7, 1.0, 3.0, 25.0}) {
        const auto r0 = mvt_cdf(vec({0.0, 0.0}), df, MatrixXd::Identity(2, 2), {});
        CHECK(std::abs(r0.value - 0.25) <= r0.error_estimate + 1e-12);
        for (double rho : {-0.7, 0.3, 0.95}) {
            const auto r = mvt_cdf(vec({0.0, 0.0}), df, corr2(rho), {});
            const double exact = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
            CHECK(std::abs(r.value - exact) <= r.error_estimate + 1e-12);
            CHECK(r.error_estimate < 1e-4);
        }
    }
}

TEST_CASE("mvt_cdf: trivariate value against a plain Monte Carlo oracle")
{
    const MatrixXd r = test_corr3();
    const VectorXd x = vec({0.3, -0.5, 1.2});
    const auto q = mvt_cdf(x, 2.5, r, {});
    const auto [mc, se] = oracle::mvt_cdf_monte_carlo(x, 2.5, r, 2000000, 17);
    CHECK(std::abs(q.value - mc) <= q.error_estimate + 3.0 * se);
    CHECK_FALSE(q.budget_exceeded);
}

TEST_CASE("mvt_cdf: infinite limits and scale handling")
{
    const MatrixXd r = test_corr3();
    // +inf marginalizes the coordinate out
    const auto full = mvt_cdf(vec({0.4, inf, -0.1}), 3.0, r, {});
    MatrixXd sub(2, 2);
    sub << 1.0, -0.2, -0.2, 1.0;
    const auto reduced = mvt_cdf(vec({0.4, -0.1}), 3.0, sub, {});
    CHECK(std::abs(full.value - reduced.value) <= full.error_estimate + reduced.error_estimate + 1e-12);
    CHECK(mvt_cdf(vec({inf, inf, inf}), 3.0, r, {}).value == 1.0);
    CHECK(mvt_cdf(vec({0.0, -inf, 1.0}), 3.0, r, {}).value == 0.0);

    // scaling sigma by D and x by sqrt(D) leaves the probability unchanged
    const VectorXd scale = vec({4.0, 0.25, 9.0});
    const MatrixXd scaled = scale.cwiseSqrt().asDiagonal() * r * scale.cwiseSqrt().asDiagonal();
    const VectorXd x = vec({0.3, -0.5, 1.2});
    const auto a = mvt_cdf(x, 2.5, r, {});
    const auto b = mvt_cdf(x.cwiseProduct(scale.cwiseSqrt()), 2.5, scaled, {});
    CHECK(std::abs(a.value - b.value) < 1e-12);
}

TEST_CASE("mvt_cdf: reproducible for a fixed evaluation seed")
{
    const auto a = mvt_cdf(vec({0.3, -0.5, 1.2}), 2.5, test_corr3(), {});
    const auto b = mvt_cdf(vec({0.3, -0.5, 1.2}), 2.5, test_corr3(), {});
    CHECK(a.value == b.value);
    CHECK(a.error_estimate == b.error_estimate);
}

TEST_CASE("mvt_cdf: budget flag when the target is unreachable")
{
    QmcSettings q;
    q.lattice_points = 64;
    q.max_lattice_points = 128;
    q.randomizations = 4;
    q.target_error = 1e-12;
    const auto r = mvt_cdf(vec({0.3, -0.5, 1.2}), 2.5, test_corr3(), q);
    CHECK(r.budget_exceeded);
    CHECK(r.points_used == 128 * 4);
    CHECK(r.value > 0.0);
    CHECK(r.value < 1.0);
}

TEST_CASE("mvt_cdf: rejects invalid input")
{
    CHECK_THROWS_AS(mvt_cdf(vec({0.0, 0.0}), 0.0, MatrixXd::Identity(2, 2), {}), Error);
    CHECK_THROWS_AS(mvt_cdf(vec({0.0, 0.0}), 1.0, MatrixXd::Identity(3, 3), {}), Error);
    MatrixXd bad(3, 3);
    bad << 1, 0.95, -0.95, 0.95, 1, 0.9, -0.95, 0.9, 1;
    try {
        mvt_cdf(vec({0.0, 0.0, 0.0}), 1.0, bad, {});
        FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }
}

TEST_CASE("exponent_function: worked examples")
{
    for (double alpha : {0.3, 1.0, 7.0}) {
        CHECK(std::abs(exponent_function(vec({2.5}), TailIndex(alpha), MatrixXd::Identity(1, 1)).value - 0.4) < 1e-15);
    }
    CHECK(std::abs(exponent_function(vec({1.0, 1.0}), TailIndex(1.0), corr2(0.0)).value - (1.0 + 0.5 * std::sqrt(2.0))) <
          1e-12);
    CHECK(std::abs(exponent_function(vec({1.0, 1.0}), TailIndex(0.01), corr2(0.0)).value - 1.5) < 0.01);
}

TEST_CASE("exponent_function: zero, negative and infinite coordinates")
{
    const auto v = exponent_function(vec({1.0, 0.0, 2.0}), TailIndex(1.0), test_corr3());
    CHECK(v.is_infinite());
    CHECK(v.value > 0.0);
    try {
        exponent_function(vec({1.0, -0.5}), TailIndex(1.0), corr2(0.3));
        FAIL("expected DomainError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DomainError);
    }
    CHECK_THROWS_AS(exponent_function(vec({1.0, 1.0, 1.0}), TailIndex(1.0), corr2(0.3)), Error);
}

TEST_CASE("bivariate_extremal_coefficient_closed")
{
    CHECK(std::abs(bivariate_extremal_coefficient_closed(TailIndex(1.0), 0.0) - (1.0 + 0.5 * std::sqrt(2.0))) < 1e-12);
    CHECK(bivariate_extremal_coefficient_closed(TailIndex(2.0), 1.0 - 1e-12) < 1.0 + 1e-5);
    CHECK(bivariate_extremal_coefficient_closed(TailIndex(100.0), 0.0) >= 1.99);
    const double low = bivariate_extremal_coefficient_closed(TailIndex(0.01), 0.0);
    CHECK(low >= 1.49);
    CHECK(low <= 1.51);
    double prev = 0.0;
    for (double a : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
        const double v = bivariate_extremal_coefficient_closed(TailIndex(a), 0.0);
        CHECK(v >= prev);
        prev = v;
    }
    // decreasing in rho for fixed alpha
    prev = 3.0;
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9, 0.999}) {
        const double v = bivariate_extremal_coefficient_closed(TailIndex(2.0), rho);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(bivariate_extremal_coefficient_closed(TailIndex(1.0), 1.0), Error);
    CHECK_THROWS_AS(bivariate_extremal_coefficient_closed(TailIndex(1.0), -1.0), Error);
}

TEST_CASE("extremal_t_cdf")
{
    for (double alpha : {0.5, 1.0, 4.0}) {
        CHECK(std::abs(extremal_t_cdf(vec({1.0}), TailIndex(alpha), MatrixXd::Identity(1, 1)).value - std::exp(-1.0)) <
              1e-15);
        const double z = 1.7;
        CHECK(std::abs(extremal_t_cdf(vec({z}), TailIndex(alpha), MatrixXd::Identity(1, 1)).value -
                       std::exp(-std::pow(z, -alpha))) < 1e-15);
    }
    const auto p = extremal_t_cdf(vec({1.0, 1.0}), TailIndex(1.0), corr2(0.0));
    CHECK(std::abs(p.value - std::exp(-(1.0 + 0.5 * std::sqrt(2.0)))) < 1e-12);
    CHECK(std::abs(p.value - 0.1813) < 1e-4);  // quoted to four digits

    const MatrixXd r = test_corr3();
    double prev = 0.0;
    for (double t : {0.3, 0.6, 1.0, 2.0, 5.0}) {
        const auto v = extremal_t_cdf(vec({t, 1.3 * t, 0.8 * t}), TailIndex(2.0), r);
        CHECK(v.value >= prev - v.error_estimate);
        prev = v.value;
    }
    CHECK(extremal_t_cdf(vec({1.0, 0.0, 1.0}), TailIndex(2.0), r).value == 0.0);
}

TEST_CASE("extremal_coefficient: range, full dependence and d = 2 agreement")
{
    for (double a : {0.5, 1.0, 2.0, 5.0}) {
        for (double rho : {-0.5, 0.0, 0.5, 0.9}) {
            const auto e = extremal_coefficient(TailIndex(a), corr2(rho));
            CHECK(std::abs(e.value - bivariate_extremal_coefficient_closed(TailIndex(a), rho)) <= e.error_estimate + 1e-12);
        }
    }
    for (Eigen::Index d : {2, 3, 4}) {
        const auto e = extremal_coefficient(TailIndex(1.5), equicorrelation(d, 0.9999));
        CHECK(e.value < 1.05);
        CHECK(e.value >= 1.0 - e.error_estimate);
    }
    const auto e = extremal_coefficient(TailIndex(1.0), equicorrelation(4, 0.2));
    CHECK(e.value >= 1.0 - e.error_estimate);
    CHECK(e.value <= 4.0 + e.error_estimate);
}

TEST_CASE("exponent_function: spectral-moment identity at alpha = 1")
{
    for (const MatrixXd& r : {MatrixXd(MatrixXd::Identity(3, 3)), test_corr3()}) {
        for (const VectorXd& z : {vec({1.0, 1.0, 1.0}), vec({0.5, 2.0, 1.3})}) {
            const auto m = exponent_function(z, TailIndex(1.0), r);
            const auto [mc, se] = oracle::spectral_moment_alpha1(z, r, 2000000, 5);
            CHECK(std::abs(m.value - mc) <= 3.0 * se + m.error_estimate);
        }
    }
}

TEST_CASE("exponent_function: homogeneity, permutation, bounds")
{
    const MatrixXd r = test_corr3();
    const VectorXd z = vec({0.7, 1.4, 2.2});
    for (double alpha : {0.5, 2.0, 4.0}) {
        const auto base = exponent_function(z, TailIndex(alpha), r);
        CHECK(base.value >= z.cwiseInverse().maxCoeff() - base.error_estimate);
        CHECK(base.value <= z.cwiseInverse().sum() + base.error_estimate);
        for (double t : {0.5, 2.0, 10.0}) {
            const auto scaled = exponent_function(t * z, TailIndex(alpha), r);
            CHECK(std::abs(scaled.value - base.value / t) <= scaled.error_estimate + base.error_estimate / t + 1e-12);
        }
        const Eigen::Vector3i p(2, 0, 1);
        VectorXd zp(3);
        MatrixXd rp(3, 3);
        for (int i = 0; i < 3; ++i) {
            zp[i] = z[p[i]];
            for (int j = 0; j < 3; ++j) rp(i, j) = r(p[i], p[j]);
        }
        const auto permuted = exponent_function(zp, TailIndex(alpha), rp);
        CHECK(std::abs(permuted.value - base.value) <= permuted.error_estimate + base.error_estimate + 1e-12);
    }
}

TEST_CASE("exponent_function: letting one coordinate grow recovers the lower-dimensional value")
{
    const MatrixXd r = test_corr3();
    for (double alpha : {1.0, 3.0}) {
        const auto big = exponent_function(vec({0.8, 1.5, 1e6}), TailIndex(alpha), r);
        MatrixXd sub(2, 2);
        sub << 1.0, 0.45, 0.45, 1.0;
        const auto small = exponent_function(vec({0.8, 1.5}), TailIndex(alpha), sub);
        CHECK(std::abs(big.value - small.value) <= 1e-4 + big.error_estimate + small.error_estimate);
        const auto dropped = exponent_function(vec({0.8, 1.5, inf}), TailIndex(alpha), r);
        CHECK(std::abs(dropped.value - small.value) <= 1e-4 + dropped.error_estimate + small.error_estimate);
    }
}
