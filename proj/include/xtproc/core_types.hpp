#pragma once
#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <xtproc/types.hpp>

namespace xtproc {

/// Tail index alpha of the alpha-Frechet margins. The same number is the
/// general degree of freedom nu of the extremal t dependence structure.
class TailIndex
{
public:
    explicit TailIndex(double alpha) : alpha_(alpha)
    {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw Error(ErrorCode::DomainError,
                        "tail index must be positive and finite, got " + std::to_string(alpha));
        }
    }

    double value() const noexcept { return alpha_; }
    operator double() const noexcept { return alpha_; }

private:
    double alpha_;
};

enum class CorrelationFamily
{
    exponential,
    gaussian,
    powered_exponential,
};

inline std::string_view to_string(CorrelationFamily f)
{
    switch (f) {
        case CorrelationFamily::exponential: return "exponential";
        case CorrelationFamily::gaussian: return "gaussian";
        case CorrelationFamily::powered_exponential: return "powered_exponential";
    }
    return "unknown";
}

CorrelationFamily parse_correlation_family(std::string_view name);

/// Isotropic stationary correlation function rho(h) of the Euclidean lag h.
class ParametricCorrelation
{
public:
    ParametricCorrelation(CorrelationFamily family, double range, double power = 1.0)
        : family_(family), range_(range), power_(power)
    {
        if (!(range > 0.0) || !std::isfinite(range)) {
            throw Error(ErrorCode::DomainError, "correlation range must be positive and finite");
        }
        if (family == CorrelationFamily::powered_exponential && !(power > 0.0 && power <= 2.0)) {
            throw Error(ErrorCode::DomainError, "powered exponential power must lie in (0, 2]");
        }
        if (family == CorrelationFamily::exponential) power_ = 1.0;
        if (family == CorrelationFamily::gaussian) power_ = 2.0;
    }

    double operator()(double lag) const
    {
        const double scaled = std::abs(lag) / range_;
        switch (family_) {
            case CorrelationFamily::exponential: return std::exp(-scaled);
            case CorrelationFamily::gaussian: return std::exp(-scaled * scaled);
            case CorrelationFamily::powered_exponential: return std::exp(-std::pow(scaled, power_));
        }
        return 0.0;
    }

    CorrelationFamily family() const noexcept { return family_; }
    double range() const noexcept { return range_; }
    double power() const noexcept { return power_; }

private:
    CorrelationFamily family_;
    double range_;
    double power_;
};

/// Either a parametric correlation function or an explicit correlation matrix.
class CorrelationSpec
{
public:
    CorrelationSpec(ParametricCorrelation p) : spec_(std::move(p)) {}
    explicit CorrelationSpec(MatrixXd explicit_matrix);

    bool is_parametric() const noexcept { return std::holds_alternative<ParametricCorrelation>(spec_); }
    const ParametricCorrelation& parametric() const { return std::get<ParametricCorrelation>(spec_); }
    const MatrixXd& matrix() const { return std::get<MatrixXd>(spec_); }

private:
    std::variant<ParametricCorrelation, MatrixXd> spec_;
};

/// Ordered sites in R^p, stored one site per row.
class SiteSet
{
public:
    explicit SiteSet(MatrixXd coords);

    Eigen::Index size() const noexcept { return coords_.rows(); }
    Eigen::Index dim() const noexcept { return coords_.cols(); }
    const MatrixXd& coords() const noexcept { return coords_; }
    auto site(Eigen::Index i) const { return coords_.row(i); }

private:
    MatrixXd coords_;
};

struct ExtremalTModel
{
    TailIndex alpha;
    CorrelationSpec correlation;
};

struct SpectralSettings
{
    double truncation_c = 6.0;
    std::uint64_t max_points = 100000;
    std::uint64_t replicates = 1;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (!(truncation_c > 0.0) || !std::isfinite(truncation_c))
            throw Error(ErrorCode::DomainError, "truncation_c must be positive");
        if (max_points < 1) throw Error(ErrorCode::DomainError, "max_points must be >= 1");
        if (replicates < 1) throw Error(ErrorCode::DomainError, "replicates must be >= 1");
    }
};

inline constexpr double default_truncation_gaussian = 6.0;
inline constexpr double default_truncation_student_t = 25.0;

/// Randomized quasi-Monte Carlo budget for multivariate t probabilities.
struct QmcSettings
{
    std::uint64_t lattice_points = 1u << 13;
    std::uint64_t randomizations = 12;
    double target_error = 5e-5;
    std::uint64_t max_lattice_points = 1u << 17;
    std::uint64_t seed = 20130101;

    void validate() const
    {
        if (lattice_points < 1 || randomizations < 2)
            throw Error(ErrorCode::DomainError, "QMC needs >= 1 lattice point and >= 2 randomizations");
        if (max_lattice_points < lattice_points)
            throw Error(ErrorCode::DomainError, "QMC max_lattice_points below lattice_points");
        if (!(target_error > 0.0)) throw Error(ErrorCode::DomainError, "QMC target_error must be positive");
    }
};

enum class ValidationFailure
{
    none,
    not_square,
    non_finite,
    not_symmetric,
    non_unit_diagonal,
    off_diagonal_out_of_range,
    not_positive_semidefinite,
};

struct ValidationResult
{
    ValidationFailure failure = ValidationFailure::none;
    Eigen::Index row = -1;
    Eigen::Index col = -1;
    std::string message;

    bool ok() const noexcept { return failure == ValidationFailure::none; }
    explicit operator bool() const noexcept { return ok(); }
};

inline constexpr double symmetry_tolerance = 1e-12;
inline constexpr double psd_tolerance = 1e-10;

/// Checks the correlation-matrix contract used throughout: symmetric, unit
/// diagonal, off-diagonals strictly inside (-1, 1), smallest eigenvalue
/// no lower than -1e-10. Never throws.
template <class Derived>
ValidationResult validate_correlation_matrix(const Eigen::MatrixBase<Derived>& m)
{
    using Eigen::Index;
    ValidationResult r;
    if (m.rows() != m.cols()) {
        r.failure = ValidationFailure::not_square;
        r.message = "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols());
        return r;
    }
    const Index d = m.rows();
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            const double v = static_cast<double>(m(i, j));
            if (!std::isfinite(v)) {
                r = {ValidationFailure::non_finite, i, j, "non-finite entry"};
                return r;
            }
        }
    }
    for (Index i = 0; i < d; ++i) {
        if (std::abs(static_cast<double>(m(i, i)) - 1.0) > symmetry_tolerance) {
            r = {ValidationFailure::non_unit_diagonal, i, i,
                 "diagonal entry " + std::to_string(static_cast<double>(m(i, i))) + " is not 1"};
            return r;
        }
        for (Index j = i + 1; j < d; ++j) {
            const double a = static_cast<double>(m(i, j));
            const double b = static_cast<double>(m(j, i));
            if (std::abs(a - b) > symmetry_tolerance) {
                r = {ValidationFailure::not_symmetric, i, j, "matrix is not symmetric"};
                return r;
            }
            if (!(std::abs(a) < 1.0)) {
                r = {ValidationFailure::off_diagonal_out_of_range, i, j,
                     "off-diagonal entry " + std::to_string(a) + " not strictly inside (-1, 1)"};
                return r;
            }
        }
    }
    // min eigenvalue >= -tol  <=>  m + tol*I admits a Cholesky factor
    MatrixXd shifted = (0.5 * (m + m.transpose())).template cast<double>();
    shifted.diagonal().array() += psd_tolerance;
    Eigen::LLT<MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) {
        r = {ValidationFailure::not_positive_semidefinite, -1, -1, "matrix is not positive semi-definite"};
    }
    return r;
}

/// Sigma* for the given sites. Parametric specs evaluate rho at pairwise
/// Euclidean distances; explicit specs are checked against the site count.
MatrixXd build_correlation_matrix(const CorrelationSpec& spec, const SiteSet& sites);

/// Correlation matrix for a model that is given only by an explicit matrix.
MatrixXd build_correlation_matrix(const CorrelationSpec& spec);

} // namespace xtproc
