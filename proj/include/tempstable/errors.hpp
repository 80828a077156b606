#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tempstable {

enum class ErrorCode {
    Domain,
    NotAMartingaleCandidate,
    PhysicalNotMartingale,
    NoEsscherMeasure,
    EmptyMartingaleFamily,
    LambdaTooSmall,
    NoFsMeasure,
    ContourViolation,
    QuadratureFailure,
    PriceOutOfBand,
    TooFewObservations,
    DegenerateSample,
    NoSolution,
    Parse,
    Usage,
};

/// Stable identifier used in CLI reports and per-cell status markers.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};

class NotAMartingaleCandidate : public Error {
public:
    explicit NotAMartingaleCandidate(const std::string& what)
        : Error(ErrorCode::NotAMartingaleCandidate, what) {}
};

class PhysicalNotMartingale : public Error {
public:
    PhysicalNotMartingale(const std::string& what, double residual)
        : Error(ErrorCode::PhysicalNotMartingale, what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class NoEsscherMeasure : public Error {
public:
    enum class Reason { LambdaSum, RateRange };
    NoEsscherMeasure(Reason reason, const std::string& what)
        : Error(ErrorCode::NoEsscherMeasure, what), reason_(reason) {}
    Reason reason() const noexcept { return reason_; }
    std::string_view reason_name() const noexcept {
        return reason_ == Reason::LambdaSum ? "lambda_sum" : "rate_range";
    }

private:
    Reason reason_;
};

class EmptyMartingaleFamily : public Error {
public:
    explicit EmptyMartingaleFamily(const std::string& what)
        : Error(ErrorCode::EmptyMartingaleFamily, what) {}
};

class LambdaTooSmall : public Error {
public:
    explicit LambdaTooSmall(const std::string& what) : Error(ErrorCode::LambdaTooSmall, what) {}
};

/// Carries c and the residuals of the two existence conditions; the measure
/// exists iff both residuals are <= 0.
class NoFsMeasure : public Error {
public:
    NoFsMeasure(const std::string& what, double c, double cond1, double cond2)
        : Error(ErrorCode::NoFsMeasure, what), c_(c), cond1_(cond1), cond2_(cond2) {}
    double c() const noexcept { return c_; }
    double cond1_residual() const noexcept { return cond1_; }
    double cond2_residual() const noexcept { return cond2_; }

private:
    double c_, cond1_, cond2_;
};

class ContourViolation : public Error {
public:
    explicit ContourViolation(const std::string& what) : Error(ErrorCode::ContourViolation, what) {}
};

class QuadratureFailure : public Error {
public:
    explicit QuadratureFailure(const std::string& what) : Error(ErrorCode::QuadratureFailure, what) {}
};

class PriceOutOfBand : public Error {
public:
    explicit PriceOutOfBand(const std::string& what) : Error(ErrorCode::PriceOutOfBand, what) {}
};

class TooFewObservations : public Error {
public:
    explicit TooFewObservations(const std::string& what) : Error(ErrorCode::TooFewObservations, what) {}
};

class DegenerateSample : public Error {
public:
    explicit DegenerateSample(const std::string& what) : Error(ErrorCode::DegenerateSample, what) {}
};

class NoSolution : public Error {
public:
    NoSolution(const std::string& what, std::array<double, 4> residuals)
        : Error(ErrorCode::NoSolution, what), residuals_(residuals) {}
    const std::array<double, 4>& residuals() const noexcept { return residuals_; }

private:
    std::array<double, 4> residuals_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorCode::Parse, what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorCode::Usage, what) {}
};

}  // namespace tempstable
