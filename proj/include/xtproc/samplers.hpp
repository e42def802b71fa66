#pragma once
#include <Eigen/Core>
#include <cmath>
#include <xtproc/core_types.hpp>
#include <xtproc/numerics.hpp>
#include <xtproc/random.hpp>

namespace xtproc {

using numerics::CholeskyFactor;

/// Points of PRM(alpha v^{-(alpha+1)} dv) on (0, inf) in decreasing order,
/// V_i = (E_1 + ... + E_i)^{-1/alpha} with E_j iid unit exponentials.
class PoissonPointIterator
{
public:
    explicit PoissonPointIterator(TailIndex alpha) noexcept
        : inv_alpha_(1.0 / alpha.value())
    {}

    double next(RandomStream& stream) noexcept
    {
        arrival_ += stream.exponential();
        return std::pow(arrival_, -inv_alpha_);
    }

    double cumulative_arrival() const noexcept { return arrival_; }

private:
    double inv_alpha_;
    double arrival_ = 0.0;
};

inline double next_poisson_point(PoissonPointIterator& it, RandomStream& stream) noexcept
{
    return it.next(stream);
}

/// Writes L g into out, g iid standard normal. out must have chol.dim() rows.
template <class Scalar, class Derived>
void fill_gaussian_field(const CholeskyFactor<Scalar>& chol, RandomStream& stream,
                         Eigen::MatrixBase<Derived>& out, vec_type<Scalar>& work)
{
    const Eigen::Index d = chol.dim();
    work.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) work[i] = Scalar(stream.normal());
    out.noalias() = chol.L.template triangularView<Eigen::Lower>() * work;
}

template <class Scalar>
vec_type<Scalar> sample_gaussian_field(const CholeskyFactor<Scalar>& chol, RandomStream& stream)
{
    vec_type<Scalar> out(chol.dim());
    vec_type<Scalar> work;
    fill_gaussian_field(chol, stream, out, work);
    return out;
}

/// Draw of Y with nu / Y ~ Gamma(nu/2, scale 2), i.e. nu / chi^2_nu.
inline double sample_t_mixing_variance(double nu, RandomStream& stream) noexcept
{
    return nu / stream.gamma(0.5 * nu, 2.0);
}

/// Centered t process sqrt(Y) W: the Gaussian field is drawn first, then Y.
template <class Scalar, class Derived>
void fill_t_process(const CholeskyFactor<Scalar>& chol, double nu, RandomStream& stream,
                    Eigen::MatrixBase<Derived>& out, vec_type<Scalar>& work)
{
    fill_gaussian_field(chol, stream, out, work);
    out *= Scalar(std::sqrt(sample_t_mixing_variance(nu, stream)));
}

template <class Scalar>
vec_type<Scalar> sample_t_process(const CholeskyFactor<Scalar>& chol, double nu, RandomStream& stream)
{
    if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "t process requires nu > 0");
    vec_type<Scalar> out(chol.dim());
    vec_type<Scalar> work;
    fill_t_process(chol, nu, stream, out, work);
    return out;
}

/// Uniform direction on the unit sphere of R^d.
template <class Scalar = double, class Derived>
void fill_sphere_uniform(RandomStream& stream, Eigen::MatrixBase<Derived>& out)
{
    for (;;) {
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = Scalar(stream.normal());
        const Scalar norm = out.norm();
        if (norm > Scalar(0)) {
            out /= norm;
            return;
        }
    }
}

template <class Scalar = double>
vec_type<Scalar> sample_sphere_uniform(Eigen::Index d, RandomStream& stream)
{
    if (d < 1) throw Error(ErrorCode::DomainError, "sphere dimension must be >= 1");
    vec_type<Scalar> out(d);
    fill_sphere_uniform<Scalar>(stream, out);
    return out;
}

/// Radial variable R_d of the d-dimensional t_nu law, d^{-1} R_d^2 ~ F(d, nu),
/// built as sqrt(d (G1/d) / (G2/nu)) with G1 ~ Gamma(d/2, 2), G2 ~ Gamma(nu/2, 2).
inline double sample_t_radial(Eigen::Index d, double nu, RandomStream& stream) noexcept
{
    const double g1 = stream.gamma(0.5 * static_cast<double>(d), 2.0);
    const double g2 = stream.gamma(0.5 * nu, 2.0);
    return std::sqrt(g1 * nu / g2);
}

/// Elliptical t_nu(0, L L^T) vector R_d L U; U first, then R_d.
template <class Scalar, class Derived>
void fill_elliptical_t_vector(const CholeskyFactor<Scalar>& chol, double nu, RandomStream& stream,
                              Eigen::MatrixBase<Derived>& out, vec_type<Scalar>& work)
{
    const Eigen::Index d = chol.dim();
    work.resize(d);
    fill_sphere_uniform<Scalar>(stream, work);
    const Scalar radial = Scalar(sample_t_radial(d, nu, stream));
    out.noalias() = chol.L.template triangularView<Eigen::Lower>() * work;
    out *= radial;
}

template <class Scalar>
vec_type<Scalar> sample_elliptical_t_vector(const CholeskyFactor<Scalar>& chol, double nu, Eigen::Index d,
                                            RandomStream& stream)
{
    if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "elliptical t requires nu > 0");
    if (d != chol.dim()) throw Error(ErrorCode::DimensionMismatch, "dimension does not match the Cholesky factor");
    vec_type<Scalar> out(d);
    vec_type<Scalar> work;
    fill_elliptical_t_vector(chol, nu, stream, out, work);
    return out;
}

} // namespace xtproc
