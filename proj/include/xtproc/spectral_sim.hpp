#pragma once
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>
#include <xtproc/core_types.hpp>
#include <xtproc/numerics.hpp>
#include <xtproc/parallel.hpp>
#include <xtproc/random.hpp>
#include <xtproc/samplers.hpp>

namespace xtproc {

template <class Scalar = double>
struct FieldReplicate
{
    vec_type<Scalar> values;
    std::uint64_t points_used = 0;
    bool truncation_triggered = false;
};

enum class MAlphaMethod
{
    analytic,
    monte_carlo,
};

inline std::string_view to_string(MAlphaMethod m)
{
    return m == MAlphaMethod::analytic ? "analytic" : "monte_carlo";
}

struct MAlphaEstimate
{
    double value = 0.0;
    double std_error = 0.0;
    MAlphaMethod method = MAlphaMethod::analytic;

    static MAlphaEstimate analytic(double v) { return {v, 0.0, MAlphaMethod::analytic}; }
};

/// Core of the spectral constructions: the componentwise maximum of
/// V_i X_i^+ over decreasing Poisson points, scaled by m_alpha^{-1/alpha}.
///
/// Generation stops before drawing X_i once V_i * truncation_c falls below
/// the smallest running (unscaled) maximum; truncation_c acts as a bound on
/// the spectral vector. Hitting max_points sets truncation_triggered.
template <class Scalar, class SpectralDraw>
FieldReplicate<Scalar> spectral_maximum(Eigen::Index d, TailIndex alpha, double m_alpha,
                                        const SpectralSettings& settings, RandomStream& stream,
                                        SpectralDraw&& draw)
{
    FieldReplicate<Scalar> rep;
    rep.values = vec_type<Scalar>::Zero(d);
    vec_type<Scalar> spectral(d);
    PoissonPointIterator points(alpha);
    const Scalar bound = Scalar(settings.truncation_c);
    bool stopped = false;
    while (rep.points_used < settings.max_points) {
        const Scalar v = Scalar(points.next(stream));
        if (v * bound < rep.values.minCoeff()) {
            stopped = true;
            break;
        }
        draw(stream, spectral);
        rep.values = rep.values.cwiseMax(v * spectral.cwiseMax(Scalar(0)));
        ++rep.points_used;
    }
    rep.truncation_triggered = !stopped;
    rep.values *= Scalar(std::pow(m_alpha, -1.0 / alpha.value()));
    return rep;
}

/// Extremal t field from Gaussian spectral fields, given the Cholesky
/// factor of the site correlation matrix. m_alpha is the Gaussian closed form.
template <class Scalar>
FieldReplicate<Scalar> simulate_extremal_t_field(TailIndex alpha, const CholeskyFactor<Scalar>& chol,
                                                 const SpectralSettings& settings, RandomStream& stream)
{
    vec_type<Scalar> work;
    return spectral_maximum<Scalar>(
        chol.dim(), alpha, numerics::m_alpha_gaussian(alpha), settings, stream,
        [&](RandomStream& s, vec_type<Scalar>& out) { fill_gaussian_field(chol, s, out, work); });
}

inline FieldReplicate<double> simulate_extremal_t_field(const ExtremalTModel& model, const SiteSet& sites,
                                                        const SpectralSettings& settings, RandomStream& stream)
{
    settings.validate();
    const MatrixXd corr = build_correlation_matrix(model.correlation, sites);
    const auto chol = numerics::cholesky_with_jitter(corr);
    return simulate_extremal_t_field(model.alpha, chol, settings, stream);
}

inline void require_finite_moment(double alpha, double spectral_nu)
{
    if (!(spectral_nu > 0.0)) throw Error(ErrorCode::DomainError, "spectral_nu must be positive");
    if (!(alpha < spectral_nu)) {
        throw Error(ErrorCode::InfiniteMoment,
                    "m_alpha = E[(X+)^alpha] is infinite: alpha=" + std::to_string(alpha) +
                        " is not below spectral_nu=" + std::to_string(spectral_nu));
    }
}

/// Multivariate extremal t vector from elliptical t spectral vectors with
/// spectral_nu degrees of freedom and dispersion chol.L chol.L^T.
template <class Scalar>
FieldReplicate<Scalar> simulate_extremal_t_mv(TailIndex alpha, double spectral_nu,
                                              const CholeskyFactor<Scalar>& chol, const MAlphaEstimate& m_alpha,
                                              const SpectralSettings& settings, RandomStream& stream)
{
    require_finite_moment(alpha, spectral_nu);
    vec_type<Scalar> work;
    return spectral_maximum<Scalar>(
        chol.dim(), alpha, m_alpha.value, settings, stream,
        [&](RandomStream& s, vec_type<Scalar>& out) { fill_elliptical_t_vector(chol, spectral_nu, s, out, work); });
}

template <class Derived>
FieldReplicate<typename Derived::Scalar> simulate_extremal_t_mv(
    TailIndex alpha, double spectral_nu, const Eigen::MatrixBase<Derived>& corr,
    const MAlphaEstimate& m_alpha, const SpectralSettings& settings, RandomStream& stream)
{
    require_finite_moment(alpha, spectral_nu);
    settings.validate();
    const auto check = validate_correlation_matrix(corr);
    if (!check) throw Error(ErrorCode::DegenerateCorrelation, "invalid correlation matrix: " + check.message);
    const auto chol = numerics::cholesky_with_jitter(corr.eval());
    return simulate_extremal_t_mv(alpha, spectral_nu, chol, m_alpha, settings, stream);
}

/// Sample mean and standard error of (T+)^alpha over n standard t_nu draws.
inline MAlphaEstimate estimate_m_alpha_mc(TailIndex alpha, double spectral_nu, std::uint64_t n, RandomStream& stream)
{
    require_finite_moment(alpha, spectral_nu);
    if (n < 2) throw Error(ErrorCode::DomainError, "estimate_m_alpha_mc needs n >= 2");
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double t = stream.normal() * std::sqrt(sample_t_mixing_variance(spectral_nu, stream));
        const double x = t > 0.0 ? std::pow(t, alpha.value()) : 0.0;
        const double delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (x - mean);
    }
    const double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n)), MAlphaMethod::monte_carlo};
}

/// Runs `replicates` independent simulations; replicate r draws from
/// RandomStream(seed, r), so output is identical for any thread count.
template <class Simulate>
auto simulate_replicates(const SpectralSettings& settings, unsigned threads, Simulate&& simulate)
{
    settings.validate();
    using result_t = decltype(simulate(std::declval<RandomStream&>()));
    std::vector<result_t> out(settings.replicates);
    parallel_for(settings.replicates, threads, [&](std::uint64_t r) {
        RandomStream stream(settings.seed, r);
        out[r] = simulate(stream);
    });
    return out;
}

/// Replicates stacked as rows of a (replicates x d) matrix.
template <class Scalar>
mat_type<Scalar> stack_values(const std::vector<FieldReplicate<Scalar>>& reps)
{
    if (reps.empty()) return {};
    mat_type<Scalar> out(static_cast<Eigen::Index>(reps.size()), reps.front().values.size());
    for (std::size_t r = 0; r < reps.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = reps[r].values.transpose();
    return out;
}

} // namespace xtproc
