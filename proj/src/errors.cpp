#include "tempstable/errors.hpp"

namespace tempstable {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Domain: return "DomainError";
        case ErrorCode::NotAMartingaleCandidate: return "NotAMartingaleCandidate";
        case ErrorCode::PhysicalNotMartingale: return "PhysicalNotMartingale";
        case ErrorCode::NoEsscherMeasure: return "NoEsscherMeasure";
        case ErrorCode::EmptyMartingaleFamily: return "EmptyMartingaleFamily";
        case ErrorCode::LambdaTooSmall: return "LambdaTooSmall";
        case ErrorCode::NoFsMeasure: return "NoFsMeasure";
        case ErrorCode::ContourViolation: return "ContourViolation";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::PriceOutOfBand: return "PriceOutOfBand";
        case ErrorCode::TooFewObservations: return "TooFewObservations";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::NoSolution: return "NoSolution";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Usage: return "UsageError";
    }
    return "Unknown";
}

}  // namespace tempstable
