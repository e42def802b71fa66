#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <vector>
#include <xtproc/core_types.hpp>
#include <xtproc/dependence.hpp>
#include <xtproc/numerics.hpp>
#include <xtproc/random.hpp>
#include <xtproc/samplers.hpp>

namespace xtproc {

/// How the t draws inside a block are generated.
enum class TSampler
{
    variance_mixture,  // sqrt(Y) W
    radial,            // R_d L U
};

/// Which norming constant divides the block maximum.
enum class NormingRule
{
    asymptotic,      // (n / c_nu)^{1/nu}
    exact_quantile,  // inf{x : P(T >= x) <= 1/n}
};

inline double norming_constant(std::uint64_t n, double nu, NormingRule rule)
{
    return rule == NormingRule::asymptotic ? numerics::frechet_norming_a_n(n, nu)
                                           : numerics::exact_norming_a_n(n, nu);
}

/// Componentwise maximum of n iid t_nu(0, Sigma*) draws divided by a_n (b_n = 0).
template <class Scalar>
vec_type<Scalar> block_max_normalized(double nu, const CholeskyFactor<Scalar>& chol, std::uint64_t n,
                                      RandomStream& stream, TSampler sampler = TSampler::variance_mixture,
                                      NormingRule rule = NormingRule::asymptotic)
{
    if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "block maxima require nu > 0");
    if (n < 1) throw Error(ErrorCode::DomainError, "block size must be >= 1");
    const Eigen::Index d = chol.dim();
    vec_type<Scalar> block_max = vec_type<Scalar>::Constant(d, -std::numeric_limits<Scalar>::infinity());
    vec_type<Scalar> draw(d);
    vec_type<Scalar> work;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (sampler == TSampler::variance_mixture) fill_t_process(chol, nu, stream, draw, work);
        else fill_elliptical_t_vector(chol, nu, stream, draw, work);
        block_max = block_max.cwiseMax(draw);
    }
    return block_max / Scalar(norming_constant(n, nu, rule));
}

template <class Derived>
VectorXd block_max_normalized(double nu, const Eigen::MatrixBase<Derived>& corr, std::uint64_t n,
                              RandomStream& stream)
{
    return block_max_normalized(nu, numerics::cholesky_with_jitter(corr.template cast<double>().eval()), n, stream);
}

struct MdaPoint
{
    VectorXd z;
    double empirical = 0.0;
    double theoretical = 0.0;
    double theoretical_error = 0.0;
    double gap = 0.0;
    double binomial_3se = 0.0;
    double band = 0.0;
    bool pass = false;
};

struct MdaReport
{
    double nu = 0.0;
    std::uint64_t block_size = 0;
    std::uint64_t replicates = 0;
    double bias_allowance = 0.0;
    std::vector<MdaPoint> points;
    double max_abs_gap = 0.0;

    bool all_pass() const
    {
        for (const auto& p : points) if (!p.pass) return false;
        return true;
    }
};

struct MdaOptions
{
    double bias_allowance = 0.01;
    TSampler sampler = TSampler::variance_mixture;
    NormingRule norming = NormingRule::asymptotic;
    unsigned threads = 0;
};

/// Tensor grid {0.5, 1, 2}^d, available for d <= 3.
std::vector<VectorXd> default_mda_grid(Eigen::Index d);

/// Normalized block maxima for `replicates` blocks, one row per block;
/// block r draws from RandomStream(seed, r).
MatrixXd simulate_block_maxima(double nu, const Eigen::Ref<const MatrixXd>& corr, std::uint64_t n,
                               std::uint64_t replicates, std::uint64_t seed, const MdaOptions& opts = {});

/// Fraction of rows of `samples` lying componentwise below z.
double empirical_joint_cdf(const Eigen::Ref<const MatrixXd>& samples, const Eigen::Ref<const VectorXd>& z);

/// Compares the empirical CDF of normalized t block maxima with the extremal
/// t CDF exp(-M(z^nu)). A grid point passes when
/// |gap| <= 3 binomial se + QMC error + bias allowance.
MdaReport run_mda_check(double nu, const Eigen::Ref<const MatrixXd>& corr, std::uint64_t n,
                        std::uint64_t replicates, const std::vector<VectorXd>& grid, const QmcSettings& q,
                        std::uint64_t seed, const MdaOptions& opts = {});

/// Grid comparison of an already simulated sample against exp(-M(z^nu)).
MdaReport compare_with_extremal_t(const Eigen::Ref<const MatrixXd>& samples, double nu,
                                  const Eigen::Ref<const MatrixXd>& corr, const std::vector<VectorXd>& grid,
                                  const QmcSettings& q, double bias_allowance);

/// max_abs_gap for each block size, exposing the pre-asymptotic bias trend.
std::vector<double> mda_bias_sweep(double nu, const Eigen::Ref<const MatrixXd>& corr,
                                   const std::vector<std::uint64_t>& block_sizes, std::uint64_t replicates,
                                   const std::vector<VectorXd>& grid, const QmcSettings& q, std::uint64_t seed,
                                   const MdaOptions& opts = {});

} // namespace xtproc
