#pragma once
#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xtproc {

template <class Scalar_, int Rows_ = Eigen::Dynamic, int Cols_ = Eigen::Dynamic>
using mat_type = Eigen::Matrix<Scalar_, Rows_, Cols_, Eigen::ColMajor>;

template <class Scalar_, int Rows_ = Eigen::Dynamic>
using vec_type = Eigen::Matrix<Scalar_, Rows_, 1>;

using MatrixXd = mat_type<double>;
using VectorXd = vec_type<double>;

/// Stable machine-readable error codes. The CLI prints these verbatim.
enum class ErrorCode
{
    DomainError,
    DimensionMismatch,
    DegenerateCorrelation,
    NotPositiveDefinite,
    InfiniteMoment,
    InvalidSites,
    IoError,
    UsageError,
};

inline constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegenerateCorrelation: return "DegenerateCorrelation";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::InfiniteMoment: return "InfiniteMoment";
        case ErrorCode::InvalidSites: return "InvalidSites";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace xtproc
