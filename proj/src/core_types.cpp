#include <xtproc/core_types.hpp>

namespace xtproc {

CorrelationFamily parse_correlation_family(std::string_view name)
{
    if (name == "exponential") return CorrelationFamily::exponential;
    if (name == "gaussian") return CorrelationFamily::gaussian;
    if (name == "powered_exponential" || name == "powered-exponential")
        return CorrelationFamily::powered_exponential;
    throw Error(ErrorCode::UsageError, "unknown correlation family '" + std::string(name) + "'");
}

CorrelationSpec::CorrelationSpec(MatrixXd explicit_matrix)
    : spec_(std::move(explicit_matrix))
{
    const auto check = validate_correlation_matrix(std::get<MatrixXd>(spec_));
    if (!check) {
        const auto code = check.failure == ValidationFailure::not_square
            ? ErrorCode::DimensionMismatch
            : check.failure == ValidationFailure::not_positive_semidefinite
                ? ErrorCode::NotPositiveDefinite
                : ErrorCode::DegenerateCorrelation;
        throw Error(code, "invalid correlation matrix: " + check.message);
    }
}

SiteSet::SiteSet(MatrixXd coords) : coords_(std::move(coords))
{
    if (coords_.rows() < 1 || coords_.cols() < 1) {
        throw Error(ErrorCode::InvalidSites, "site set needs at least one site with p >= 1 coordinates");
    }
    if (!coords_.allFinite()) {
        throw Error(ErrorCode::InvalidSites, "site coordinates must be finite");
    }
    for (Eigen::Index i = 0; i < coords_.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < coords_.rows(); ++j) {
            if ((coords_.row(i).array() == coords_.row(j).array()).all()) {
                throw Error(ErrorCode::DegenerateCorrelation,
                            "sites " + std::to_string(i) + " and " + std::to_string(j) +
                                " coincide; their correlation would be 1");
            }
        }
    }
}

MatrixXd build_correlation_matrix(const CorrelationSpec& spec, const SiteSet& sites)
{
    const Eigen::Index d = sites.size();
    if (!spec.is_parametric()) {
        if (spec.matrix().rows() != d) {
            throw Error(ErrorCode::DimensionMismatch,
                        "correlation matrix is " + std::to_string(spec.matrix().rows()) + "x" +
                            std::to_string(spec.matrix().cols()) + " but there are " +
                            std::to_string(d) + " sites");
        }
        return spec.matrix();
    }

    const auto& rho = spec.parametric();
    MatrixXd m = MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double h = (sites.site(i) - sites.site(j)).norm();
            const double r = rho(h);
            if (!(std::abs(r) < 1.0)) {
                throw Error(ErrorCode::DegenerateCorrelation,
                            "correlation between sites " + std::to_string(i) + " and " +
                                std::to_string(j) + " rounds to 1 (lag " + std::to_string(h) + ")");
            }
            m(i, j) = m(j, i) = r;
        }
    }
    const auto check = validate_correlation_matrix(m);
    if (!check) {
        throw Error(ErrorCode::NotPositiveDefinite, "parametric correlation matrix failed validation: " + check.message);
    }
    return m;
}

MatrixXd build_correlation_matrix(const CorrelationSpec& spec)
{
    if (spec.is_parametric()) {
        throw Error(ErrorCode::UsageError, "a parametric correlation spec needs a site set");
    }
    return spec.matrix();
}

} // namespace xtproc
