#pragma once

// Equivalent martingale measures for the exponential tempered stable model
// S_t = S_0 exp(X_t): Esscher transform, the bilateral Esscher family and its
// minimal-entropy and p-optimal members, and the Foellmer-Schweizer minimal
// martingale measure.

#include <optional>
#include <string_view>
#include <vector>

#include "tempstable/tsdist.hpp"

namespace tempstable {

/// Rates are per trading day.
struct Market {
    double r = 0.0;
    double q = 0.0;
    double s0 = 1.0;
    int days_per_year = 255;

    static Market from_annual(double annual_rate, double annual_dividend, double s0,
                              int days_per_year = 255);
};

/// Throws DomainError unless r >= q >= 0 and s0 > 0.
void validate(const Market& m);

enum class MeasureKind { Physical, Esscher, MinEntropyBilateral, POptimalBilateral, FsMinimal };

std::string_view to_string(MeasureKind kind) noexcept;
/// Accepts the CLI spellings: physical, esscher, min-entropy, p-optimal, fs.
MeasureKind parse_measure_kind(std::string_view name);

struct MeasureSpec {
    MeasureKind kind = MeasureKind::MinEntropyBilateral;
    double p = 2.0;  // only used by POptimalBilateral; must exceed 1
};

struct MeasureDiagnostics {
    double residual = 0.0;
    int iterations = 0;
    std::optional<double> objective_value;
    // Scan points (other than the neighbours of the minimum) whose objective
    // ties with the minimum within 1e-10; non-zero hints at multiple minima.
    int grid_ties = 0;
};

struct MeasureSolution {
    MeasureSpec spec;
    std::optional<double> theta_plus;
    std::optional<double> theta_minus;
    std::optional<double> c;
    TsLaw law_per_day;
    MeasureDiagnostics diagnostics;
};

/// Psi_law(1) - (r - q); zero iff the law makes the discounted price a martingale.
double martingale_residual(const TsLaw& law, const Market& mkt);

// --- Esscher ---------------------------------------------------------------

double esscher_f_plus(const TsParams& p, double theta);
double esscher_f_minus(const TsParams& p, double theta);
/// f(theta) = Psi of the Esscher-tilted law evaluated at 1, on [-l-, l+ - 1].
double esscher_f(const TsParams& p, double theta);

/// The admissible range (f(-l-), f(l+ - 1)] written out in closed form.
struct EsscherRateBounds {
    double lower;  // exclusive
    double upper;  // inclusive
};
EsscherRateBounds esscher_rate_bounds(const TsParams& p);

MeasureSolution esscher_solve(const TsParams& p, const Market& mkt);

// --- Bilateral Esscher -----------------------------------------------------

/// f+ of the bilateral family (equal to esscher_f_plus), on (-inf, l+ - 1].
double bilateral_f_plus(const TsParams& p, double theta_plus);
/// f- of the bilateral family, strictly decreasing on (-inf, l-].
double bilateral_f_minus(const TsParams& p, double theta_minus);

struct BilateralDomain {
    double theta1;           // -infinity when r == q
    double theta2;           // <= l+ - 1
    double theta1_surrogate; // finite stand-in for theta1 (f+ < 1e-14 below it when r == q)
};
BilateralDomain bilateral_domain(const TsParams& p, const Market& mkt);
double bilateral_phi(const TsParams& p, const Market& mkt, double theta_plus);

/// Relative entropy of the bilateral Esscher transform with respect to P.
double entropy(const TsParams& p, double theta_plus, double theta_minus);
/// E[(dQ/dP)^pexp] over one unit of time.
double p_distance(const TsParams& p, double theta_plus, double theta_minus, double pexp);

MeasureSolution min_entropy_solve(const TsParams& p, const Market& mkt);
MeasureSolution p_optimal_solve(const TsParams& p, const Market& mkt, double pexp);

/// Scan grid used by the bilateral minimizers: 256 points strictly inside
/// (lo, hi), uniformly spaced in asinh(theta).
std::vector<double> bilateral_scan_grid(double lo, double hi, std::size_t n = 256);

// --- Foellmer-Schweizer ----------------------------------------------------

double fs_constant(const TsParams& p, const Market& mkt);
MeasureSolution fs_solve(const TsParams& p, const Market& mkt);

// --- Misc ------------------------------------------------------------------

MeasureSolution physical_solve(const TsParams& p, const Market& mkt);
MeasureSolution solve_measure(const TsParams& p, const Market& mkt, const MeasureSpec& spec);

/// Existence verdict for the unconstrained minimal entropy martingale measure.
bool global_min_entropy_exists(const TsParams& p, const Market& mkt);

/// Laws of two TS processes are equivalent iff alphas and betas coincide.
bool same_ts_equivalence_class(const TsParams& a, const TsParams& b);

}  // namespace tempstable
