#include <xtproc/mda_harness.hpp>
#include <xtproc/parallel.hpp>

#include <cmath>

namespace xtproc {

std::vector<VectorXd> default_mda_grid(Eigen::Index d)
{
    if (d < 1 || d > 3) {
        throw Error(ErrorCode::UsageError, "the default tensor grid covers 1 <= d <= 3; supply z points explicitly");
    }
    const double levels[] = {0.5, 1.0, 2.0};
    std::vector<VectorXd> grid;
    const int count = d == 1 ? 3 : d == 2 ? 9 : 27;
    for (int idx = 0; idx < count; ++idx) {
        VectorXd z(d);
        int rest = idx;
        for (Eigen::Index j = d - 1; j >= 0; --j) {
            z[j] = levels[rest % 3];
            rest /= 3;
        }
        grid.push_back(z);
    }
    return grid;
}

MatrixXd simulate_block_maxima(double nu, const Eigen::Ref<const MatrixXd>& corr, std::uint64_t n,
                               std::uint64_t replicates, std::uint64_t seed, const MdaOptions& opts)
{
    const auto check = validate_correlation_matrix(corr);
    if (!check) throw Error(ErrorCode::DegenerateCorrelation, "invalid correlation matrix: " + check.message);
    const auto chol = numerics::cholesky_with_jitter(MatrixXd(corr));
    MatrixXd out(static_cast<Eigen::Index>(replicates), corr.rows());
    parallel_for(replicates, opts.threads, [&](std::uint64_t r) {
        RandomStream stream(seed, r);
        out.row(static_cast<Eigen::Index>(r)) =
            block_max_normalized(nu, chol, n, stream, opts.sampler, opts.norming).transpose();
    });
    return out;
}

double empirical_joint_cdf(const Eigen::Ref<const MatrixXd>& samples, const Eigen::Ref<const VectorXd>& z)
{
    if (samples.cols() != z.size()) throw Error(ErrorCode::DimensionMismatch, "grid point dimension mismatch");
    std::uint64_t hits = 0;
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
        if ((samples.row(r).transpose().array() <= z.array()).all()) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.rows());
}

MdaReport compare_with_extremal_t(const Eigen::Ref<const MatrixXd>& samples, double nu,
                                  const Eigen::Ref<const MatrixXd>& corr, const std::vector<VectorXd>& grid,
                                  const QmcSettings& q, double bias_allowance)
{
    MdaReport report;
    report.nu = nu;
    report.replicates = static_cast<std::uint64_t>(samples.rows());
    report.bias_allowance = bias_allowance;
    const TailIndex alpha(nu);
    for (const auto& z : grid) {
        if (!(z.array() > 0.0).all()) throw Error(ErrorCode::DomainError, "MDA grid points must be strictly positive");
        MdaPoint p;
        p.z = z;
        p.empirical = empirical_joint_cdf(samples, z);
        const auto theory = extremal_t_cdf(z, alpha, corr, q);
        p.theoretical = theory.value;
        p.theoretical_error = theory.error_estimate;
        p.gap = p.empirical - p.theoretical;
        p.binomial_3se = 3.0 * std::sqrt(p.theoretical * (1.0 - p.theoretical) / static_cast<double>(samples.rows()));
        p.band = p.binomial_3se + p.theoretical_error + bias_allowance;
        p.pass = std::abs(p.gap) <= p.band;
        report.max_abs_gap = std::max(report.max_abs_gap, std::abs(p.gap));
        report.points.push_back(std::move(p));
    }
    return report;
}

MdaReport run_mda_check(double nu, const Eigen::Ref<const MatrixXd>& corr, std::uint64_t n,
                        std::uint64_t replicates, const std::vector<VectorXd>& grid, const QmcSettings& q,
                        std::uint64_t seed, const MdaOptions& opts)
{
    if (replicates < 1) throw Error(ErrorCode::DomainError, "replicates must be >= 1");
    for (const auto& z : grid) {
        if (z.size() != corr.rows()) throw Error(ErrorCode::DimensionMismatch, "grid point dimension mismatch");
        if (!(z.array() > 0.0).all()) throw Error(ErrorCode::DomainError, "MDA grid points must be strictly positive");
    }
    const MatrixXd maxima = simulate_block_maxima(nu, corr, n, replicates, seed, opts);
    auto report = compare_with_extremal_t(maxima, nu, corr, grid, q, opts.bias_allowance);
    report.block_size = n;
    return report;
}

std::vector<double> mda_bias_sweep(double nu, const Eigen::Ref<const MatrixXd>& corr,
                                   const std::vector<std::uint64_t>& block_sizes, std::uint64_t replicates,
                                   const std::vector<VectorXd>& grid, const QmcSettings& q, std::uint64_t seed,
                                   const MdaOptions& opts)
{
    std::vector<double> gaps;
    for (auto n : block_sizes) gaps.push_back(run_mda_check(nu, corr, n, replicates, grid, q, seed, opts).max_abs_gap);
    return gaps;
}

} // namespace xtproc
