#pragma once

// Method-of-moments calibration of TS(a+, b, l+; a-, b, l-) from daily log
// returns, and the Gaussian reference fit.

#include <array>
#include <span>
#include <vector>

#include "tempstable/tsdist.hpp"

namespace tempstable {

/// Raw moments m_k = (1/n) sum x_i^k.
struct RawMoments {
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

/// No length requirement; empirical_moments adds the sample-size check.
RawMoments raw_moments(std::span<const double> xs);

struct ReturnSample {
    std::vector<double> returns;
    RawMoments moments;
};

/// Throws TooFewObservations for fewer than 5 returns.
ReturnSample empirical_moments(std::vector<double> returns);

/// Log returns ln(P_t / P_{t-1}); prices must be positive.
std::vector<double> log_returns(std::span<const double> prices);

struct MomCoefficients {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;

    double operator[](int k) const { return k == 1 ? c1 : k == 2 ? c2 : k == 3 ? c3 : c4; }
};

/// c_k = k-th cumulant / Gamma(k - beta). Throws DegenerateSample when the
/// variance vanishes (relative to m2).
MomCoefficients moment_coefficients(const RawMoments& m, double beta);
MomCoefficients moment_coefficients(const ReturnSample& s, double beta);

/// Exact c_k of a parameter set with beta+ = beta- = beta.
MomCoefficients coefficients_of(const TsParams& p);

struct MomFit {
    TsParams params;
    std::array<double, 4> residuals{};  // model c_k - c_k, k = 1..4
    TsParams initial;                   // starting point handed to Newton
    int iterations = 0;
};

/// Solves sum over tails of alpha / lambda^(k - beta) (sign (-1)^k on the
/// negative tail) = c_k for k = 1..4. Throws NoSolution with the final
/// residuals when no positive solution is found.
TsParams mom_solve(const MomCoefficients& c, double beta);
MomFit mom_solve_detailed(const MomCoefficients& c, double beta);

struct NormalFit {
    double mu = 0.0;
    double sigma = 0.0;  // per square root of a trading day
};

NormalFit fit_normal(const RawMoments& m);
NormalFit fit_normal(const ReturnSample& s);

}  // namespace tempstable
