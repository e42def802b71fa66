// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
// with the measured quantity and wall time; the exit status is non-zero if
// any criterion fails.
#include <xtproc/cli.hpp>
#include <xtproc/dependence.hpp>
#include <xtproc/spectral_sim.hpp>
#include <xtproc/mda_harness.hpp>
#include <xtproc/stats.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <unistd.h>

#include "oracles.hpp"

using namespace xtproc;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double time_limit_s, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %2d: %s | %s | %.2fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", id, title.c_str(),
                o.detail.c_str(), secs, time_limit_s, in_time ? "" : " TOO SLOW");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

MatrixXd corr2(double r)
{
    MatrixXd m(2, 2);
    m << 1, r, r, 1;
    return m;
}

MatrixXd exponential_corr(int d, double range)
{
    MatrixXd coords(d, 2);
    for (int i = 0; i < d; ++i) {
        coords(i, 0) = 0.5 * i;
        coords(i, 1) = 0.3 * (i % 2);
    }
    return build_correlation_matrix(CorrelationSpec(ParametricCorrelation(CorrelationFamily::exponential, range)),
                                    SiteSet(coords));
}

MatrixXd gaussian_spectral(double alpha, const MatrixXd& corr, std::uint64_t reps, std::uint64_t seed)
{
    SpectralSettings s;
    s.replicates = reps;
    s.seed = seed;
    const auto chol = numerics::cholesky_with_jitter(corr);
    return stack_values(simulate_replicates(
        s, 0, [&](RandomStream& st) { return simulate_extremal_t_field(TailIndex(alpha), chol, s, st); }));
}

MatrixXd t_spectral(double alpha, double nu, const MatrixXd& corr, std::uint64_t reps, std::uint64_t seed)
{
    SpectralSettings s;
    s.replicates = reps;
    s.seed = seed;
    s.truncation_c = default_truncation_student_t;
    const auto chol = numerics::cholesky_with_jitter(corr);
    const auto m = MAlphaEstimate::analytic(numerics::m_alpha_student_t(alpha, nu));
    return stack_values(simulate_replicates(
        s, 0, [&](RandomStream& st) { return simulate_extremal_t_mv(TailIndex(alpha), nu, chol, m, s, st); }));
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr)
{
    args.insert(args.begin(), "xtproc");
    std::ostringstream out, err;
    const int status = cli::main_entry(args, out, err);
    if (out_text) *out_text = out.str();
    return status;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

int main()
{
    const double exact_1707 = 1.0 + 0.5 * std::sqrt(2.0);

    criterion(1, "extremal coefficient alpha=1, d=2, rho=0 is 1+sqrt(2)/2", 1.0, [&] {
        const double closed = bivariate_extremal_coefficient_closed(TailIndex(1.0), 0.0);
        const auto general = extremal_coefficient(TailIndex(1.0), corr2(0.0));
        std::string printed;
        const int status = run_cli({"extremal-coeff", "--alpha", "1", "--rho", "0", "--json"}, &printed);
        const double via_cli = nlohmann::json::parse(printed)["value"].get<double>();
        const bool ok = std::abs(closed - exact_1707) <= 1e-6 &&
                        std::abs(general.value - exact_1707) <= general.error_estimate + 1e-12 && status == 0 &&
                        std::abs(via_cli - exact_1707) <= 1e-6;
        return Outcome{ok, fmt("closed %.9f, general %.9f +- %.1e, cli %.9f", closed, general.value,
                               general.error_estimate, via_cli)};
    });

    criterion(2, "limit values and monotonicity in alpha at rho=0", 1.0, [&] {
        const double lo = bivariate_extremal_coefficient_closed(TailIndex(0.01), 0.0);
        const double hi = bivariate_extremal_coefficient_closed(TailIndex(100.0), 0.0);
        bool monotone = true;
        double prev = 0.0;
        for (double a : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
            const double v = bivariate_extremal_coefficient_closed(TailIndex(a), 0.0);
            monotone = monotone && v >= prev;
            prev = v;
        }
        return Outcome{lo >= 1.49 && lo <= 1.51 && hi >= 1.99 && monotone,
                       fmt("theta(0.01)=%.6f theta(100)=%.6f monotone=%s", lo, hi, monotone ? "yes" : "no")};
    });

    criterion(3, "m_alpha closed form vs 1e7-draw Monte Carlo", 30.0, [&] {
        bool ok = std::abs(numerics::m_alpha_gaussian(2.0) - 0.5) <= 1e-12 &&
                  std::abs(numerics::m_alpha_gaussian(4.0) - 1.5) <= 1e-12;
        std::string detail;
        std::mt19937_64 gen(2013);
        std::normal_distribution<double> normal;
        std::vector<double> w(10000000);
        for (auto& x : w) x = normal(gen);
        for (double a : {0.5, 1.0, 2.0, 3.0, 5.0}) {
            double mean = 0.0, m2 = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double x = w[i] > 0.0 ? std::pow(w[i], a) : 0.0;
                const double d = x - mean;
                mean += d / static_cast<double>(i + 1);
                m2 += d * (x - mean);
            }
            const double se = std::sqrt(m2 / (w.size() - 1.0) / w.size());
            const double z = (mean - numerics::m_alpha_gaussian(a)) / se;
            ok = ok && std::abs(z) <= 3.0;
            detail += fmt("a=%g z=%+.2f ", a, z);
        }
        return Outcome{ok, detail};
    });

    criterion(4, "PIT uniformity of the spectral construction, d=5", 120.0, [&] {
        const MatrixXd corr = exponential_corr(5, 1.0);
        bool ok = true;
        std::string detail;
        for (double a : {1.0, 2.0, 5.0}) {
            const MatrixXd z = gaussian_spectral(a, corr, 10000, 4000 + static_cast<std::uint64_t>(a));
            double worst = 0.0;
            for (int j = 0; j < 5; ++j) {
                const VectorXd u = z.col(j).unaryExpr([&](double v) { return stats::frechet_cdf(v, a); });
                worst = std::max(worst, stats::ks_distance(u, [](double x) { return x; }));
            }
            ok = ok && worst < 0.015;
            detail += fmt("a=%g maxKS=%.4f ", a, worst);
        }
        return Outcome{ok, detail};
    });

    criterion(5, "empirical extremal coefficient vs closed form", 180.0, [&] {
        bool ok = true;
        std::string detail;
        for (auto [a, r] : {std::pair{1.0, 0.0}, std::pair{1.0, 0.5}, std::pair{2.0, 0.0}, std::pair{3.0, 0.8}}) {
            const MatrixXd z = gaussian_spectral(a, corr2(r), 10000, 500);
            const double est = stats::madogram_extremal_coefficient(z.col(0), z.col(1), a);
            const double exact = bivariate_extremal_coefficient_closed(TailIndex(a), r);
            ok = ok && std::abs(est - exact) <= 0.03;
            detail += fmt("(%g,%g) %.4f/%.4f ", a, r, est, exact);
        }
        return Outcome{ok, detail};
    });

    criterion(6, "Gaussian vs t(50) spectral vectors at alpha=1", 180.0, [&] {
        const MatrixXd corr = exponential_corr(3, 1.0);
        const MatrixXd g = gaussian_spectral(1.0, corr, 10000, 6000);
        const MatrixXd t = t_spectral(1.0, 50.0, corr, 10000, 6001);
        double worst_ks = 0.0, worst_theta = 0.0;
        for (int j = 0; j < 3; ++j) worst_ks = std::max(worst_ks, stats::ks_two_sample(g.col(j), t.col(j)));
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double eg = stats::madogram_extremal_coefficient(g.col(i), g.col(j), 1.0);
                const double et = stats::madogram_extremal_coefficient(t.col(i), t.col(j), 1.0);
                worst_theta = std::max(worst_theta, std::abs(eg - et));
            }
        }
        return Outcome{worst_ks < 0.02 && worst_theta <= 0.03,
                       fmt("max KS %.4f, max |theta_G - theta_t| %.4f", worst_ks, worst_theta)};
    });

    criterion(7, "MDA: nu=2, rho=0.5, n=1e4, 5000 blocks on {0.5,1,2}^2", 300.0, [&] {
        const auto rep = run_mda_check(2.0, corr2(0.5), 10000, 5000, default_mda_grid(2), {}, 700, {});
        int passed = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& p : rep.points) {
            passed += p.pass;
            worst = std::max(worst, std::abs(p.gap) - p.band);
        }
        return Outcome{rep.all_pass() && rep.points.size() == 9,
                       fmt("%d/9 grid points inside band, max gap %.4f, tightest |gap| - band %.4f", passed,
                           rep.max_abs_gap, worst)};
    });

    criterion(8, "multivariate t CDF engine vs Monte Carlo and orthant formula", 60.0, [&] {
        std::mt19937_64 gen(8);
        std::normal_distribution<double> normal;
        MatrixXd a(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = normal(gen);
        MatrixXd s = a * a.transpose() + 0.2 * MatrixXd::Identity(3, 3);
        const VectorXd inv = s.diagonal().cwiseSqrt().cwiseInverse();
        s = inv.asDiagonal() * s * inv.asDiagonal();
        const Eigen::Vector3d x(0.4, -0.3, 1.1);
        const auto q = mvt_cdf(x, 2.5, s, {});
        const auto [mc, se] = oracle::mvt_cdf_monte_carlo(x, 2.5, s, 10000000, 88);
        const bool k3 = std::abs(q.value - mc) <= q.error_estimate + 3.0 * se;
        const double rho = 0.6;
        const auto orth = mvt_cdf(Eigen::Vector2d(0.0, 0.0), 2.5, corr2(rho), {});
        const double exact = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        const bool k2 = std::abs(orth.value - exact) <= orth.error_estimate + 1e-12;
        return Outcome{k3 && k2, fmt("k=3 qmc %.6f +- %.1e vs mc %.6f (3se %.1e); k=2 %.6f vs %.6f", q.value,
                                     q.error_estimate, mc, 3 * se, orth.value, exact)};
    });

    criterion(9, "spectral-moment oracle, alpha=1, d=3, identity", 60.0, [&] {
        const Eigen::Vector3d ones(1.0, 1.0, 1.0);
        const auto m = exponent_function(ones, TailIndex(1.0), MatrixXd::Identity(3, 3));
        const auto [mc, se] = oracle::spectral_moment_alpha1(ones, MatrixXd::Identity(3, 3), 10000000, 99);
        return Outcome{std::abs(m.value - mc) <= 3.0 * se + m.error_estimate,
                       fmt("M(1,1,1) %.6f +- %.1e vs Monte Carlo %.6f (se %.1e)", m.value, m.error_estimate, mc, se)};
    });

    criterion(10, "simulate reruns with identical seed are byte-identical", 60.0, [&] {
        const fs::path dir = fs::temp_directory_path() / ("xtproc_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        {
            std::ofstream f(dir / "sites.csv");
            f << "id,x1,x2\ns1,0,0\ns2,0.7,0\ns3,0,1.2\ns4,1.5,1.5\ns5,-0.4,2\n";
        }
        auto sim = [&](const std::string& sub, const std::string& threads) {
            return run_cli({"simulate", "--alpha", "2", "--corr", "exponential", "--range", "1", "--sites",
                            (dir / "sites.csv").string(), "--replicates", "1000", "--seed", "42", "--threads",
                            threads, "--out-dir", (dir / sub).string()});
        };
        const int s1 = sim("a", "1");
        const int s2 = sim("b", "4");
        const int s3 = run_cli({"simulate-mv", "--alpha", "1", "--spectral-nu", "4", "--rho", "0.5",
                                "--replicates", "1000", "--seed", "7", "--out-dir", (dir / "c").string()});
        const int s4 = run_cli({"simulate-mv", "--alpha", "1", "--spectral-nu", "4", "--rho", "0.5",
                                "--replicates", "1000", "--seed", "7", "--out-dir", (dir / "d").string()});
        const std::string a = slurp(dir / "a" / "simulate.csv");
        const bool same_field = !a.empty() && a == slurp(dir / "b" / "simulate.csv");
        const std::string c = slurp(dir / "c" / "simulate-mv.csv");
        const bool same_mv = !c.empty() && c == slurp(dir / "d" / "simulate-mv.csv");
        fs::remove_all(dir);
        return Outcome{s1 == 0 && s2 == 0 && s3 == 0 && s4 == 0 && same_field && same_mv,
                       fmt("simulate %zu bytes identical=%s; simulate-mv identical=%s", a.size(),
                           same_field ? "yes" : "no", same_mv ? "yes" : "no")};
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
