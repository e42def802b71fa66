#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <xtproc/core_types.hpp>
#include <xtproc/numerics.hpp>

namespace xtproc {

/// Randomized QMC estimate of a multivariate t probability.
/// error_estimate is three standard deviations of the mean across the
/// independent randomizations.
struct MvtCdfResult
{
    double value = 0.0;
    double error_estimate = 0.0;
    std::uint64_t points_used = 0;
    bool budget_exceeded = false;
};

/// P(T <= x) for T ~ t_df(0, sigma). sigma is a dispersion matrix (not
/// necessarily unit diagonal). +inf entries of x are marginalized out.
///
/// Separation of variables over the chi-scaled Gaussian representation
/// T = Z / sqrt(S / df), S ~ chi^2_df: one QMC coordinate drives the radial
/// scale through the inverse regularized incomplete gamma, the remaining
/// k - 1 drive sequential conditioning after Cholesky factorization with
/// variables reordered greedily by smallest expected conditional probability.
/// Points come from a Richtmyer (square roots of primes) Kronecker sequence
/// with random shifts and the baker's transform; the point count doubles
/// until the target error or the budget is reached.
MvtCdfResult mvt_cdf(const Eigen::Ref<const VectorXd>& x, double df, const Eigen::Ref<const MatrixXd>& sigma,
                     const QmcSettings& q);

/// Value of the dependence function M; +inf when some z_j is 0.
struct ExponentValue
{
    double value = 0.0;
    double error_estimate = 0.0;
    std::uint64_t points_used = 0;
    bool budget_exceeded = false;

    bool is_infinite() const noexcept { return std::isinf(value); }
};

/// Extremal t dependence function
///   M(z) = sum_j z_j^{-1} t_{nu+1}((z_{-j}/z_j)^{1/nu} | S_{-j,j},
///                                  (S_{-j,-j} - S_{-j,j} S_{j,-j}) / (nu + 1))
/// with nu = alpha and S the correlation matrix sigma_star. Each term's
/// shifted, scaled t CDF is reduced to mvt_cdf.
ExponentValue exponent_function(const Eigen::Ref<const VectorXd>& z, TailIndex alpha,
                                const Eigen::Ref<const MatrixXd>& sigma_star, const QmcSettings& q = {});

/// 2 T_{alpha+1}(sqrt((alpha+1)(1-rho)/(1+rho))), the d = 2 value M(1, 1).
double bivariate_extremal_coefficient_closed(TailIndex alpha, double rho);

struct ProbabilityValue
{
    double value = 0.0;
    double error_estimate = 0.0;
    std::uint64_t points_used = 0;
    bool budget_exceeded = false;
};

/// P(Z <= z) = exp(-M(z^alpha)) for the alpha-Frechet extremal t vector.
ProbabilityValue extremal_t_cdf(const Eigen::Ref<const VectorXd>& z, TailIndex alpha,
                                const Eigen::Ref<const MatrixXd>& sigma_star, const QmcSettings& q = {});

/// M(1, ..., 1), in [1, d].
ExponentValue extremal_coefficient(TailIndex alpha, const Eigen::Ref<const MatrixXd>& sigma_star,
                                   const QmcSettings& q = {});

} // namespace xtproc
