#pragma once

// Tempered stable laws TS(a+, b+, l+; a-, b-, l-): cumulant generating
// functions, characteristic function, Levy density, cumulants, density and
// distribution function by Fourier inversion, and an approximate sampler.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace tempstable {

using cplx = std::complex<double>;

struct TsParams {
    double alpha_plus = 1.0;
    double beta_plus = 0.5;
    double lambda_plus = 1.0;
    double alpha_minus = 1.0;
    double beta_minus = 0.5;
    double lambda_minus = 1.0;

    bool operator==(const TsParams&) const = default;
};

/// Throws DomainError unless alpha, lambda > 0 and beta in (0, 1) on both tails.
void validate(const TsParams& p);

/// Gamma(-beta) for beta in (0, 1), evaluated as Gamma(1 - beta) / (-beta).
double gamma_neg(double beta);

/// (base + delta)^beta - base^beta for base > 0, base + delta >= 0, without
/// cancellation when delta is small relative to base.
double pow_diff(double base, double delta, double beta);
/// Complex counterpart on the principal branch; requires Re(base + delta) > 0.
cplx pow_diff(double base, cplx delta, double beta);

struct LawComponent {
    TsParams params;
    double time_scale = 1.0;

    bool operator==(const LawComponent&) const = default;
};

/// Law of a sum of independent time-scaled tempered stable variables.
class TsLaw {
public:
    explicit TsLaw(std::vector<LawComponent> components);
    explicit TsLaw(const TsParams& p, double time_scale = 1.0);

    const std::vector<LawComponent>& components() const noexcept { return components_; }
    bool single() const noexcept { return components_.size() == 1; }

    /// Same law with every time scale multiplied by t (the law of X_t from X_1).
    TsLaw scaled(double t) const;
    /// Esscher tilt by theta on every component: l+ -> l+ - theta, l- -> l- + theta.
    TsLaw tilted(double theta) const;

    /// Smallest tempering rates across components (the strip of analyticity).
    double lambda_plus_min() const noexcept;
    double lambda_minus_min() const noexcept;

    /// ln E[exp(s X)] for complex s with Re(s) in [-lambda_minus_min, lambda_plus_min].
    cplx log_mgf(cplx s) const;
    /// Real version; DomainError outside [-lambda_minus_min, lambda_plus_min].
    double log_mgf(double s) const;

    bool operator==(const TsLaw&) const = default;

private:
    std::vector<LawComponent> components_;
};

double cgf(const TsParams& p, double z);
double cgf_plus(const TsParams& p, double z);
double cgf_minus(const TsParams& p, double z);
/// Analytic continuation of cgf to complex arguments (principal branch).
cplx cgf(const TsParams& p, cplx z);

/// E[exp(i z X)] for Im(z) strictly inside (-lambda_plus_min, lambda_minus_min).
cplx cf(const TsLaw& law, cplx z);

double levy_density(const TsParams& p, double x);

double mean(const TsLaw& law);
double cumulant(const TsParams& p, int k);
double cumulant(const TsLaw& law, int k);

struct InversionConfig {
    double tail_eps = 1e-12;
    std::size_t max_evals = 200000;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
};

double density(const TsLaw& law, double x, const InversionConfig& cfg = {});
/// P(X > x), computed directly (no 1 - F cancellation in the right tail).
double survival(const TsLaw& law, double x, const InversionConfig& cfg = {});
double cdf(const TsLaw& law, double x, const InversionConfig& cfg = {});
/// cdf on an ascending grid, clamped to [0, 1] and made non-decreasing.
std::vector<double> cdf_grid(const TsLaw& law, std::span<const double> xs,
                             const InversionConfig& cfg = {});

/// Positive-jump and negative-jump totals (X = positive - negative).
struct JumpParts {
    std::vector<double> positive;
    std::vector<double> negative;
};

inline constexpr double kDefaultJumpFloor = 1e-6;

/// n approximate draws of X for the law: jumps below jump_floor are replaced
/// by their expected sum, larger jumps are drawn exactly from the compound
/// Poisson part. Throws DomainError when the variance of the discarded jumps
/// exceeds 1e-8. Deterministic for a given seed.
std::vector<double> sample_approx(const TsLaw& law, std::size_t n,
                                  double jump_floor = kDefaultJumpFloor, std::uint64_t seed = 1);
JumpParts sample_jump_parts(const TsLaw& law, std::size_t n,
                            double jump_floor = kDefaultJumpFloor, std::uint64_t seed = 1);

}  // namespace tempstable
