#pragma once
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>
#include <xtproc/types.hpp>

namespace xtproc {
namespace stats {

template <class Derived>
std::vector<double> to_vector(const Eigen::DenseBase<Derived>& x)
{
    std::vector<double> out(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(x.derived().coeff(i));
    return out;
}

/// sup_x |F_n(x) - F(x)| for a continuous reference CDF.
template <class Derived, class Cdf>
double ks_distance(const Eigen::DenseBase<Derived>& sample, Cdf&& cdf)
{
    std::vector<double> xs = to_vector(sample);
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        dist = std::max({dist, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return dist;
}

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
template <class DerivedA, class DerivedB>
double ks_two_sample(const Eigen::DenseBase<DerivedA>& a_in, const Eigen::DenseBase<DerivedB>& b_in)
{
    std::vector<double> a = to_vector(a_in);
    std::vector<double> b = to_vector(b_in);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double dist = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        dist = std::max(dist, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return dist;
}

/// alpha-Frechet CDF exp(-z^{-alpha}).
inline double frechet_cdf(double z, double alpha)
{
    return z > 0.0 ? std::exp(-std::pow(z, -alpha)) : 0.0;
}

/// Bivariate extremal coefficient estimated by the F-madogram with known
/// alpha-Frechet margins: nu_F = E|F(Z1) - F(Z2)| / 2 and
/// theta = (1 + 2 nu_F) / (1 - 2 nu_F).
template <class DerivedA, class DerivedB>
double madogram_extremal_coefficient(const Eigen::DenseBase<DerivedA>& z1, const Eigen::DenseBase<DerivedB>& z2,
                                     double alpha)
{
    if (z1.size() != z2.size() || z1.size() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "madogram needs two equally sized, non-empty samples");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < z1.size(); ++i) {
        sum += std::abs(frechet_cdf(z1[i], alpha) - frechet_cdf(z2[i], alpha));
    }
    const double nu_f = 0.5 * sum / static_cast<double>(z1.size());
    return (1.0 + 2.0 * nu_f) / (1.0 - 2.0 * nu_f);
}

/// Naive estimator n / sum_i min_j Z_ij^{-alpha}; min_j Z_j^{-alpha} is
/// exponential with rate theta.
template <class Derived>
double min_exponential_extremal_coefficient(const Eigen::MatrixBase<Derived>& z, double alpha)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) sum += std::pow(z.row(i).maxCoeff(), -alpha);
    return static_cast<double>(z.rows()) / sum;
}

/// Mean and standard error of a sample.
struct MeanSe
{
    double mean = 0.0;
    double se = 0.0;
};

template <class Derived>
MeanSe mean_se(const Eigen::DenseBase<Derived>& x)
{
    const double n = static_cast<double>(x.size());
    const double mean = x.derived().array().mean();
    const double var = (x.derived().array() - mean).square().sum() / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

} // namespace stats
} // namespace xtproc
