#include <xtproc/dependence.hpp>
#include <xtproc/random.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

namespace xtproc {

namespace {

using numerics::normal_cdf;
using numerics::normal_quantile;

std::vector<double> richtmyer_generators(Eigen::Index dims)
{
    std::vector<double> gens;
    gens.reserve(static_cast<std::size_t>(dims));
    for (long candidate = 2; static_cast<Eigen::Index>(gens.size()) < dims; ++candidate) {
        bool prime = true;
        for (long f = 2; f * f <= candidate; ++f) {
            if (candidate % f == 0) {
                prime = false;
                break;
            }
        }
        if (prime) {
            const double s = std::sqrt(static_cast<double>(candidate));
            gens.push_back(s - std::floor(s));
        }
    }
    return gens;
}

// Greedy ordering: at each step pick the remaining variable with the
// smallest expected conditional probability, conditioning earlier
// variables on their truncated-normal means.
std::vector<Eigen::Index> order_variables(const VectorXd& upper, const MatrixXd& corr)
{
    const Eigen::Index k = upper.size();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    MatrixXd r = corr;
    VectorXd y = upper;
    MatrixXd L = MatrixXd::Zero(k, k);
    VectorXd means = VectorXd::Zero(k);
    constexpr double tiny_variance = 1e-14;

    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index best = i;
        double best_prob = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = i; j < k; ++j) {
            const double shift = L.row(j).head(i).dot(means.head(i));
            const double var = std::max(r(j, j) - L.row(j).head(i).squaredNorm(), tiny_variance);
            const double p = normal_cdf((y[j] - shift) / std::sqrt(var));
            if (p < best_prob) {
                best_prob = p;
                best = j;
            }
        }
        if (best != i) {
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(best)]);
            std::swap(y[i], y[best]);
            r.row(i).swap(r.row(best));
            r.col(i).swap(r.col(best));
            L.row(i).swap(L.row(best));
        }
        const double diag = std::sqrt(std::max(r(i, i) - L.row(i).head(i).squaredNorm(), tiny_variance));
        L(i, i) = diag;
        for (Eigen::Index j = i + 1; j < k; ++j) {
            L(j, i) = (r(j, i) - L.row(j).head(i).dot(L.row(i).head(i))) / diag;
        }
        const double b = (y[i] - L.row(i).head(i).dot(means.head(i))) / diag;
        const double phi_b = normal_cdf(b);
        means[i] = phi_b > 1e-300 ? -std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi) / phi_b : b;
    }
    return perm;
}

struct SeparatedIntegrand
{
    VectorXd upper;  // standardized, reordered limits
    MatrixXd L;      // Cholesky factor of the reordered correlation
    double df;

    double operator()(const double* w) const
    {
        const Eigen::Index k = upper.size();
        constexpr double lo = 1e-15;
        constexpr double hi = 1.0 - 1e-15;
        const double w0 = std::clamp(w[0], lo, hi);
        const double scale = std::sqrt(2.0 * numerics::inverse_regularized_lower_gamma(0.5 * df, w0) / df);
        double f = 1.0;
        double z[64];
        std::vector<double> z_heap;
        double* zs = z;
        if (k > 64) {
            z_heap.resize(static_cast<std::size_t>(k));
            zs = z_heap.data();
        }
        for (Eigen::Index i = 0; i < k; ++i) {
            double shift = 0.0;
            for (Eigen::Index m = 0; m < i; ++m) shift += L(i, m) * zs[m];
            const double e = normal_cdf((scale * upper[i] - shift) / L(i, i));
            f *= e;
            if (f == 0.0) return 0.0;
            if (i + 1 < k) zs[i] = normal_quantile(std::clamp(w[i + 1] * e, lo, hi));
        }
        return f;
    }
};

} // namespace

MvtCdfResult mvt_cdf(const Eigen::Ref<const VectorXd>& x, double df, const Eigen::Ref<const MatrixXd>& sigma,
                     const QmcSettings& q)
{
    q.validate();
    if (!(df > 0.0)) throw Error(ErrorCode::DomainError, "mvt_cdf requires df > 0");
    const Eigen::Index k_full = x.size();
    if (k_full < 1) throw Error(ErrorCode::DimensionMismatch, "mvt_cdf requires k >= 1");
    if (sigma.rows() != k_full || sigma.cols() != k_full) {
        throw Error(ErrorCode::DimensionMismatch, "mvt_cdf: sigma does not match the dimension of x");
    }
    if (x.array().isNaN().any()) throw Error(ErrorCode::DomainError, "mvt_cdf: NaN limit");

    // drop +inf limits, short-circuit -inf
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < k_full; ++i) {
        if (x[i] == -std::numeric_limits<double>::infinity()) return {0.0, 0.0, 0, false};
        if (x[i] != std::numeric_limits<double>::infinity()) keep.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(keep.size());
    if (k == 0) return {1.0, 0.0, 0, false};

    VectorXd y(k);
    MatrixXd corr(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double sii = sigma(keep[i], keep[i]);
        if (!(sii > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "mvt_cdf: non-positive dispersion diagonal");
        y[i] = x[keep[i]] / std::sqrt(sii);
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            corr(i, j) = sigma(keep[i], keep[j]) / std::sqrt(sigma(keep[i], keep[i]) * sigma(keep[j], keep[j]));
        }
    }
    if (k == 1) return {numerics::student_t_cdf(y[0], df), 0.0, 0, false};

    const auto perm = order_variables(y, corr);
    SeparatedIntegrand integrand;
    integrand.df = df;
    integrand.upper.resize(k);
    MatrixXd reordered(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        integrand.upper[i] = y[perm[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < k; ++j) {
            reordered(i, j) = corr(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
    }
    integrand.L = numerics::cholesky_with_jitter(reordered).L;

    const auto gens = richtmyer_generators(k);
    const std::uint64_t batches = q.randomizations;
    std::vector<std::vector<double>> shifts(batches, std::vector<double>(static_cast<std::size_t>(k)));
    for (std::uint64_t b = 0; b < batches; ++b) {
        RandomStream stream(q.seed, b);
        for (auto& s : shifts[b]) s = stream.uniform();
    }
    std::vector<double> sums(batches, 0.0);
    std::vector<double> w(static_cast<std::size_t>(k));

    std::uint64_t done = 0;
    std::uint64_t target = q.lattice_points;
    MvtCdfResult result;
    for (;;) {
        for (std::uint64_t b = 0; b < batches; ++b) {
            for (std::uint64_t i = done + 1; i <= target; ++i) {
                for (std::size_t j = 0; j < w.size(); ++j) {
                    const double u = static_cast<double>(i) * gens[j] + shifts[b][j];
                    w[j] = std::abs(2.0 * (u - std::floor(u)) - 1.0);
                }
                sums[b] += integrand(w.data());
            }
        }
        done = target;
        double mean = 0.0;
        for (double s : sums) mean += s / static_cast<double>(done);
        mean /= static_cast<double>(batches);
        double var = 0.0;
        for (double s : sums) {
            const double dev = s / static_cast<double>(done) - mean;
            var += dev * dev;
        }
        var /= static_cast<double>(batches - 1);
        result.value = std::clamp(mean, 0.0, 1.0);
        result.error_estimate = 3.0 * std::sqrt(var / static_cast<double>(batches));
        result.points_used = done * batches;
        if (result.error_estimate <= q.target_error) break;
        if (2 * done > q.max_lattice_points) {
            result.budget_exceeded = true;
            break;
        }
        target = 2 * done;
    }
    return result;
}

ExponentValue exponent_function(const Eigen::Ref<const VectorXd>& z, TailIndex alpha,
                                const Eigen::Ref<const MatrixXd>& sigma_star, const QmcSettings& q)
{
    const Eigen::Index d = z.size();
    if (d < 1) throw Error(ErrorCode::DimensionMismatch, "exponent_function requires d >= 1");
    if (sigma_star.rows() != d || sigma_star.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "exponent_function: correlation matrix does not match z");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        if (std::isnan(z[j]) || z[j] < 0.0) throw Error(ErrorCode::DomainError, "exponent_function requires z >= 0");
    }
    if ((z.array() == 0.0).any()) return {std::numeric_limits<double>::infinity(), 0.0, 0, false};
    if ((z.array() == std::numeric_limits<double>::infinity()).all()) {
        throw Error(ErrorCode::DomainError, "exponent_function: all coordinates infinite");
    }
    const auto check = validate_correlation_matrix(sigma_star);
    if (!check) throw Error(ErrorCode::DegenerateCorrelation, "invalid correlation matrix: " + check.message);

    const double nu = alpha.value();
    ExponentValue out;
    if (d == 1) {
        out.value = 1.0 / z[0];
        return out;
    }
    const Eigen::Index k = d - 1;
    VectorXd limit(k);
    VectorXd location(k);
    MatrixXd dispersion(k, k);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (std::isinf(z[j])) continue;  // zero weight
        for (Eigen::Index a = 0, ia = 0; a < d; ++a) {
            if (a == j) continue;
            location[ia] = sigma_star(a, j);
            limit[ia] = std::pow(z[a] / z[j], 1.0 / nu) - location[ia];
            for (Eigen::Index b = 0, ib = 0; b < d; ++b) {
                if (b == j) continue;
                dispersion(ia, ib) = (sigma_star(a, b) - sigma_star(a, j) * sigma_star(j, b)) / (nu + 1.0);
                ++ib;
            }
            ++ia;
        }
        QmcSettings qj = q;
        qj.seed = q.seed + static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ull;
        const auto cdf = mvt_cdf(limit, nu + 1.0, dispersion, qj);
        out.value += cdf.value / z[j];
        out.error_estimate += cdf.error_estimate / z[j];
        out.points_used += cdf.points_used;
        out.budget_exceeded = out.budget_exceeded || cdf.budget_exceeded;
    }
    return out;
}

double bivariate_extremal_coefficient_closed(TailIndex alpha, double rho)
{
    if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::DomainError, "bivariate extremal coefficient requires |rho| < 1");
    const double a = alpha.value();
    return 2.0 * numerics::student_t_cdf(std::sqrt((a + 1.0) * (1.0 - rho) / (1.0 + rho)), a + 1.0);
}

ProbabilityValue extremal_t_cdf(const Eigen::Ref<const VectorXd>& z, TailIndex alpha,
                                const Eigen::Ref<const MatrixXd>& sigma_star, const QmcSettings& q)
{
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (std::isnan(z[j]) || z[j] < 0.0) throw Error(ErrorCode::DomainError, "extremal_t_cdf requires z >= 0");
    }
    const VectorXd z_alpha = z.array().pow(alpha.value()).matrix();
    const auto m = exponent_function(z_alpha, alpha, sigma_star, q);
    if (m.is_infinite()) return {0.0, 0.0, m.points_used, m.budget_exceeded};
    const double p = std::exp(-m.value);
    return {p, m.error_estimate * p, m.points_used, m.budget_exceeded};
}

ExponentValue extremal_coefficient(TailIndex alpha, const Eigen::Ref<const MatrixXd>& sigma_star, const QmcSettings& q)
{
    return exponent_function(VectorXd::Ones(sigma_star.rows()), alpha, sigma_star, q);
}

} // namespace xtproc
