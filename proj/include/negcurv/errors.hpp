#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace negcurv {

enum class ErrorKind {
    InvalidArgument,
    GridTooSmall,
    DimensionError,
    SingularHessian,
    SingularMetric,
    NotLorentzian,
    NotSpacelike,
    EmptyDomain,
    CFLViolation,
    SignatureLost,
    InadmissiblePerturbation,
    StepTooLarge,
    SupportTouchesBoundary,
    UnknownCheck,
    ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Numerical failures (as opposed to bad input) map to exit code 2.
    bool is_numerical() const noexcept;

private:
    ErrorKind kind_;
};

}  // namespace negcurv
