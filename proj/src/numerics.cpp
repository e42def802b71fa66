#include <xtproc/numerics.hpp>

namespace xtproc {
namespace numerics {

double student_t_quantile(double p, double df)
{
    if (!(df > 0.0)) throw Error(ErrorCode::DomainError, "student_t_quantile requires df > 0");
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw Error(ErrorCode::DomainError, "student_t_quantile requires p in [0, 1]");
    }
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, df);

    // bracket [lo, hi] with cdf(lo) < p <= cdf(hi)
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_cdf(hi, df) < p) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return hi;
    }
    const double ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) -
                           0.5 * std::log(df * std::numbers::pi);
    const double q = 1.0 - p;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        // work on the upper tail to keep precision for p close to 1
        const double tail = 1.0 - student_t_cdf(x, df);
        const double f = q - tail;
        if (f > 0.0) hi = x; else lo = x;
        const double density = std::exp(ln_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
        double next = x - f / density;
        if (!(next > lo && next < hi) || density == 0.0) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

} // namespace numerics
} // namespace xtproc
