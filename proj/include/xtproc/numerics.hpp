#pragma once
#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <xtproc/types.hpp>

namespace xtproc {
namespace numerics {

namespace detail {

// Stirling correction lnG(x) - [(x-1/2)ln x - x + ln(2 pi)/2], valid for x >= 15.
inline double stirling_correction(double x)
{
    const double r = 1.0 / x;
    const double r2 = r * r;
    return r * (1.0 / 12.0 +
           r2 * (-1.0 / 360.0 +
           r2 * (1.0 / 1260.0 +
           r2 * (-1.0 / 1680.0 +
           r2 * (1.0 / 1188.0 +
           r2 * (-691.0 / 360360.0 +
           r2 * (1.0 / 156.0 +
           r2 * (-3617.0 / 122400.0))))))));
}

inline constexpr double stirling_threshold = 15.0;

} // namespace detail

inline double ln_gamma(double x)
{
    if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "ln_gamma requires x > 0");
    if (std::isinf(x)) return x;
    constexpr double half_ln_two_pi = 0.91893853320467274178;
    if (x >= detail::stirling_threshold) {
        return (x - 0.5) * std::log(x) - x + half_ln_two_pi + detail::stirling_correction(x);
    }
    // shift upward, then divide out the rising factorial
    double shifted = x;
    double product = 1.0;
    while (shifted < detail::stirling_threshold) {
        product *= shifted;
        shifted += 1.0;
    }
    return (shifted - 0.5) * std::log(shifted) - shifted + half_ln_two_pi +
           detail::stirling_correction(shifted) - std::log(product);
}

/// ln Gamma(x + b) - ln Gamma(x), without the cancellation of two large logs.
inline double ln_gamma_ratio(double x, double b)
{
    if (x >= detail::stirling_threshold && x + b >= detail::stirling_threshold) {
        return (x - 0.5) * std::log1p(b / x) + b * std::log(x + b) - b +
               detail::stirling_correction(x + b) - detail::stirling_correction(x);
    }
    return ln_gamma(x + b) - ln_gamma(x);
}

inline double ln_beta(double a, double b)
{
    if (a < b) std::swap(a, b);
    if (a < detail::stirling_threshold) return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    if (b < detail::stirling_threshold) return ln_gamma(b) - ln_gamma_ratio(a, b);
    // both large
    const double s = a + b;
    return 0.91893853320467274178 + (a - 0.5) * std::log(a / s) + (b - 0.5) * std::log(b / s) -
           0.5 * std::log(s) + detail::stirling_correction(a) + detail::stirling_correction(b) -
           detail::stirling_correction(s);
}

namespace detail {

// Modified Lentz evaluation of the incomplete beta continued fraction.
inline double beta_continued_fraction(double a, double b, double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 100000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

// I_x(a, b) given both x and y = 1 - x, so callers that know 1 - x exactly
// keep full precision near x = 1.
inline double incomplete_beta(double a, double b, double x, double y)
{
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log(y) - ln_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(ln_front) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(ln_front) * beta_continued_fraction(b, a, y) / b;
}

} // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::DomainError, "regularized_incomplete_beta requires a, b > 0 and x in [0, 1]");
    }
    return detail::incomplete_beta(a, b, x, 1.0 - x);
}

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_lower_gamma(double a, double x)
{
    if (!(a > 0.0) || !(x >= 0.0)) throw Error(ErrorCode::DomainError, "regularized_lower_gamma requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double ln_front = a * std::log(x) - x - ln_gamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 100000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17) break;
        }
        return sum * std::exp(ln_front);
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(ln_front) * h;
}

/// Inverse of P(a, .) by Halley iteration from a Wilson-Hilferty start.
inline double inverse_regularized_lower_gamma(double a, double p)
{
    if (!(a > 0.0) || !(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::DomainError, "inverse gamma requires a > 0, p in [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    const double gln = ln_gamma(a);
    const double a1 = a - 1.0;
    double x;
    double lna1 = 0.0, afac = 0.0;
    if (a > 1.0) {
        lna1 = std::log(a1);
        afac = std::exp(a1 * (lna1 - 1.0) - gln);
        const double pp = p < 0.5 ? p : 1.0 - p;
        const double t = std::sqrt(-2.0 * std::log(pp));
        x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if (p < 0.5) x = -x;
        x = std::max(1e-3, a * std::pow(1.0 - 1.0 / (9.0 * a) - x / (3.0 * std::sqrt(a)), 3));
    } else {
        const double t = 1.0 - a * (0.253 + a * 0.12);
        if (p < t) x = std::pow(p / t, 1.0 / a);
        else x = 1.0 - std::log(1.0 - (p - t) / (1.0 - t));
    }
    for (int j = 0; j < 100; ++j) {
        if (x <= 0.0) return 0.0;
        const double err = regularized_lower_gamma(a, x) - p;
        double t;
        if (a > 1.0) t = afac * std::exp(-(x - a1) + a1 * (std::log(x) - lna1));
        else t = std::exp(-x + a1 * std::log(x) - gln);
        if (t == 0.0) break;
        const double u = err / t;
        const double dx = u / (1.0 - 0.5 * std::min(1.0, u * ((a - 1.0) / x - 1.0)));
        x -= dx;
        if (x <= 0.0) x = 0.5 * (x + dx);
        if (std::abs(dx) < 1e-14 * x) break;
    }
    return x;
}

inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Standard normal quantile (Wichura, AS 241, ~1e-16 relative accuracy).
inline double normal_quantile(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::DomainError, "normal_quantile requires p in [0, 1]");
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                        45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                     133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

/// CDF of the standard Student t distribution; df need not be an integer.
inline double student_t_cdf(double x, double df)
{
    if (!(df > 0.0)) throw Error(ErrorCode::DomainError, "student_t_cdf requires df > 0");
    if (std::isnan(x)) return x;
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    if (x == 0.0) return 0.5;
    const double x2 = x * x;
    // I_{df/(df+x^2)}(df/2, 1/2) is the two-sided tail mass
    const double w = df / (df + x2);
    const double y = x2 / (df + x2);
    const double tail = 0.5 * detail::incomplete_beta(0.5 * df, 0.5, w, y);
    return x > 0.0 ? 1.0 - tail : tail;
}

/// Student t quantile by safeguarded Newton iteration on student_t_cdf.
double student_t_quantile(double p, double df);

/// E[(W+)^alpha] for W standard normal:
/// pi^{-1/2} 2^{(alpha-2)/2} Gamma((alpha+1)/2).
inline double m_alpha_gaussian(double alpha)
{
    if (!(alpha > 0.0)) throw Error(ErrorCode::DomainError, "m_alpha requires alpha > 0");
    return std::exp(-0.5 * std::log(std::numbers::pi) + 0.5 * (alpha - 2.0) * std::numbers::ln2 +
                    ln_gamma(0.5 * (alpha + 1.0)));
}

/// E[(T+)^alpha] for T standard Student t with df > alpha degrees of freedom.
inline double m_alpha_student_t(double alpha, double df)
{
    if (!(alpha > 0.0)) throw Error(ErrorCode::DomainError, "m_alpha requires alpha > 0");
    if (!(alpha < df)) {
        throw Error(ErrorCode::InfiniteMoment,
                    "E[(T+)^alpha] is infinite for alpha >= df (alpha=" + std::to_string(alpha) +
                        ", df=" + std::to_string(df) + ")");
    }
    return 0.5 * std::exp(0.5 * alpha * std::log(df) + ln_gamma(0.5 * (alpha + 1.0)) +
                          ln_gamma(0.5 * (df - alpha)) - 0.5 * std::log(std::numbers::pi) -
                          ln_gamma(0.5 * df));
}

/// c_nu = Gamma((nu+1)/2)^{-1} nu^{1-nu/2} sqrt(pi) Gamma(nu/2), in log space.
/// The upper tail of the standard t_nu is P(T > x) ~ x^{-nu} / c_nu.
inline double ln_c_nu(double nu)
{
    if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "c_nu requires nu > 0");
    return -ln_gamma(0.5 * (nu + 1.0)) + (1.0 - 0.5 * nu) * std::log(nu) + 0.5 * std::log(std::numbers::pi) +
           ln_gamma(0.5 * nu);
}

inline double c_nu(double nu)
{
    return std::exp(ln_c_nu(nu));
}

/// Frechet norming constant a_n for block maxima of n unit-dispersion t_nu
/// draws: n P(T > a_n) -> 1, i.e. a_n = (n / c_nu)^{1/nu}.
inline double frechet_norming_a_n(std::uint64_t n, double nu)
{
    if (n < 1) throw Error(ErrorCode::DomainError, "block size must be >= 1");
    if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "frechet_norming_a_n requires nu > 0");
    return std::exp((std::log(static_cast<double>(n)) - ln_c_nu(nu)) / nu);
}

/// Exact tail quantile inf{x : P(T >= x) <= 1/n} of the standard t_nu.
inline double exact_norming_a_n(std::uint64_t n, double nu)
{
    if (n < 1) throw Error(ErrorCode::DomainError, "block size must be >= 1");
    return student_t_quantile(1.0 - 1.0 / static_cast<double>(n), nu);
}

template <class Scalar>
struct CholeskyFactor
{
    mat_type<Scalar> L;
    Scalar jitter_used = 0;

    Eigen::Index dim() const noexcept { return L.rows(); }
};

inline constexpr std::array<double, 4> jitter_ladder = {0.0, 1e-12, 1e-10, 1e-8};
inline constexpr double cholesky_reconstruction_tolerance = 1e-8;

/// Lower Cholesky factor of m + jitter*I, escalating jitter through the
/// fixed ladder {0, 1e-12, 1e-10, 1e-8} but never above max_jitter.
template <class Derived>
CholeskyFactor<typename Derived::Scalar> cholesky_with_jitter(
    const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar max_jitter = 1e-8)
{
    using Scalar = typename Derived::Scalar;
    using mat_t = mat_type<Scalar>;
    if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "cholesky needs a square matrix");
    const mat_t sym = (Scalar(0.5) * (m + m.transpose())).eval();
    for (double jitter : jitter_ladder) {
        if (jitter > max_jitter) break;
        mat_t shifted = sym;
        shifted.diagonal().array() += Scalar(jitter);
        Eigen::LLT<mat_t> llt(shifted);
        if (llt.info() != Eigen::Success) continue;
        mat_t L = llt.matrixL();
        if ((L.diagonal().array() <= Scalar(0)).any()) continue;
        const Scalar recon = (L * L.transpose() - shifted).cwiseAbs().maxCoeff();
        if (!(recon <= Scalar(cholesky_reconstruction_tolerance))) continue;
        return {std::move(L), Scalar(jitter)};
    }
    throw Error(ErrorCode::NotPositiveDefinite, "matrix is not positive definite within the jitter ladder");
}

} // namespace numerics
} // namespace xtproc
