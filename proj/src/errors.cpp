#include "negcurv/errors.hpp"

namespace negcurv {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::GridTooSmall: return "GridTooSmall";
        case ErrorKind::DimensionError: return "DimensionError";
        case ErrorKind::SingularHessian: return "SingularHessian";
        case ErrorKind::SingularMetric: return "SingularMetric";
        case ErrorKind::NotLorentzian: return "NotLorentzian";
        case ErrorKind::NotSpacelike: return "NotSpacelike";
        case ErrorKind::EmptyDomain: return "EmptyDomain";
        case ErrorKind::CFLViolation: return "CFLViolation";
        case ErrorKind::SignatureLost: return "SignatureLost";
        case ErrorKind::InadmissiblePerturbation: return "InadmissiblePerturbation";
        case ErrorKind::StepTooLarge: return "StepTooLarge";
        case ErrorKind::SupportTouchesBoundary: return "SupportTouchesBoundary";
        case ErrorKind::UnknownCheck: return "UnknownCheck";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool Error::is_numerical() const noexcept {
    switch (kind_) {
        case ErrorKind::SingularHessian:
        case ErrorKind::SingularMetric:
        case ErrorKind::CFLViolation:
        case ErrorKind::SignatureLost:
        case ErrorKind::StepTooLarge:
            return true;
        default:
            return false;
    }
}

}  // namespace negcurv
