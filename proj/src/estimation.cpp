#include "tempstable/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "tempstable/errors.hpp"

namespace tempstable {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
}

double variance_of(const RawMoments& m) {
    const double var = m.m2 - m.m1 * m.m1;
    if (!(var > 64.0 * kEps * m.m2)) throw DegenerateSample("sample variance is zero");
    return var;
}

// Model c_k for given tails with a common beta.
double model_c(const TsParams& p, int k) {
    const double b = p.beta_plus;
    const double plus = p.alpha_plus * std::pow(p.lambda_plus, b - k);
    const double minus = p.alpha_minus * std::pow(p.lambda_minus, b - k);
    return k % 2 == 0 ? plus + minus : plus - minus;
}

// Alphas that match c1 and c2 exactly for the given lambdas.
std::pair<double, double> alphas_for(const MomCoefficients& c, double beta, double lp, double lm) {
    const double a11 = std::pow(lp, beta - 1.0), a12 = -std::pow(lm, beta - 1.0);
    const double a21 = std::pow(lp, beta - 2.0), a22 = std::pow(lm, beta - 2.0);
    const double det = a11 * a22 - a12 * a21;
    return {(c.c1 * a22 - a12 * c.c2) / det, (a11 * c.c2 - a21 * c.c1) / det};
}

// With a = alpha+ l+^b, b' = alpha- l-^b, x = 1/l+, y = -1/l-, the system reads
// c_k = a x^k + b' y^k: a two-term exponential sum recovered in closed form.
std::optional<std::pair<double, double>> prony_lambdas(const MomCoefficients& c) {
    const double det = c.c2 * c.c2 - c.c1 * c.c3;
    if (!(std::abs(det) > 1e-12 * c.c2 * c.c2)) return std::nullopt;
    const double p = (c.c3 * c.c2 - c.c1 * c.c4) / det;
    const double q = (c.c2 * c.c4 - c.c3 * c.c3) / det;
    if (!(q > 0.0)) return std::nullopt;
    const double root = std::sqrt(p * p + 4.0 * q);
    const double x = 0.5 * (p + root), y = 0.5 * (p - root);
    if (!(x > 0.0 && y < 0.0) || !std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
    return std::pair{1.0 / x, -1.0 / y};
}

std::optional<TsParams> initial_guess(const MomCoefficients& c, double beta) {
    auto lams = prony_lambdas(c);
    if (!lams) {
        // Bilateral gamma limit (beta = 0) of the same cumulants.
        MomCoefficients g{c.c1 * std::tgamma(1.0 - beta), c.c2 * std::tgamma(2.0 - beta),
                          c.c3 * std::tgamma(3.0 - beta) / 2.0, c.c4 * std::tgamma(4.0 - beta) / 6.0};
        lams = prony_lambdas(g);
    }
    if (!lams) return std::nullopt;
    const auto [ap, am] = alphas_for(c, beta, lams->first, lams->second);
    return TsParams{ap, beta, lams->first, am, beta, lams->second};
}

}  // namespace

RawMoments raw_moments(std::span<const double> xs) {
    RawMoments m;
    if (xs.empty()) return m;
    for (double x : xs) {
        const double x2 = x * x;
        m.m1 += x;
        m.m2 += x2;
        m.m3 += x2 * x;
        m.m4 += x2 * x2;
    }
    const double n = static_cast<double>(xs.size());
    m.m1 /= n;
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

ReturnSample empirical_moments(std::vector<double> returns) {
    if (returns.size() < 5) {
        throw TooFewObservations("need at least 5 returns, got " + std::to_string(returns.size()));
    }
    for (double x : returns) {
        if (!std::isfinite(x)) throw DomainError("returns must be finite");
    }
    ReturnSample s;
    s.moments = raw_moments(returns);
    s.returns = std::move(returns);
    return s;
}

std::vector<double> log_returns(std::span<const double> prices) {
    std::vector<double> out;
    for (double p : prices) {
        if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("prices must be positive");
    }
    for (std::size_t i = 1; i < prices.size(); ++i) out.push_back(std::log(prices[i] / prices[i - 1]));
    return out;
}

MomCoefficients moment_coefficients(const RawMoments& m, double beta) {
    require_beta(beta);
    variance_of(m);
    const double m1 = m.m1, m2 = m.m2, m3 = m.m3, m4 = m.m4;
    const double m1s = m1 * m1;
    MomCoefficients c;
    c.c1 = m1 / std::tgamma(1.0 - beta);
    c.c2 = (m2 - m1s) / std::tgamma(2.0 - beta);
    c.c3 = (m3 - 3.0 * m1 * m2 + 2.0 * m1s * m1) / std::tgamma(3.0 - beta);
    c.c4 = (m4 - 4.0 * m1 * m3 - 3.0 * m2 * m2 + 12.0 * m1s * m2 - 6.0 * m1s * m1s) / std::tgamma(4.0 - beta);
    return c;
}

MomCoefficients moment_coefficients(const ReturnSample& s, double beta) {
    return moment_coefficients(s.moments, beta);
}

MomCoefficients coefficients_of(const TsParams& p) {
    validate(p);
    if (p.beta_plus != p.beta_minus) throw DomainError("moment coefficients need beta+ == beta-");
    return {model_c(p, 1), model_c(p, 2), model_c(p, 3), model_c(p, 4)};
}

MomFit mom_solve_detailed(const MomCoefficients& c, double beta) {
    require_beta(beta);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(c.c2 > 0.0) || !(c.c4 > 0.0)) {
        throw NoSolution("moment system needs c2 > 0 and c4 > 0", {nan, nan, nan, nan});
    }
    const auto start = initial_guess(c, beta);
    if (!start) throw NoSolution("no starting point for the moment system", {nan, nan, nan, nan});

    const double s3 = std::sqrt(c.c2 * c.c4), s4 = c.c4;
    auto params_at = [&](double vp, double vm) {
        const double lp = std::exp(vp), lm = std::exp(vm);
        const auto [ap, am] = alphas_for(c, beta, lp, lm);
        return TsParams{ap, beta, lp, am, beta, lm};
    };
    auto residual = [&](double vp, double vm) {
        const auto p = params_at(vp, vm);
        return std::array<double, 2>{(model_c(p, 3) - c.c3) / s3, (model_c(p, 4) - c.c4) / s4};
    };
    auto norm = [](const std::array<double, 2>& r) { return std::hypot(r[0], r[1]); };

    // Damped Newton on (log l+, log l-) with a central-difference Jacobian.
    double vp = std::log(start->lambda_plus), vm = std::log(start->lambda_minus);
    auto r = residual(vp, vm);
    int it = 0;
    for (; it < 100 && norm(r) > 1e-15; ++it) {
        constexpr double h = 1e-6;
        const auto rp1 = residual(vp + h, vm), rp0 = residual(vp - h, vm);
        const auto rm1 = residual(vp, vm + h), rm0 = residual(vp, vm - h);
        const double j11 = (rp1[0] - rp0[0]) / (2 * h), j21 = (rp1[1] - rp0[1]) / (2 * h);
        const double j12 = (rm1[0] - rm0[0]) / (2 * h), j22 = (rm1[1] - rm0[1]) / (2 * h);
        const double det = j11 * j22 - j12 * j21;
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
        const double dp = -(r[0] * j22 - j12 * r[1]) / det;
        const double dm = -(j11 * r[1] - j21 * r[0]) / det;
        double t = 1.0;
        bool moved = false;
        while (t > 1e-10) {
            const auto trial = residual(vp + t * dp, vm + t * dm);
            if (std::isfinite(norm(trial)) && norm(trial) < norm(r)) {
                vp += t * dp;
                vm += t * dm;
                r = trial;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }

    MomFit fit;
    fit.params = params_at(vp, vm);
    fit.initial = *start;
    fit.iterations = it;
    for (int k = 1; k <= 4; ++k) fit.residuals[k - 1] = model_c(fit.params, k) - c[k];
    const auto& p = fit.params;
    if (!(p.alpha_plus > 0.0 && p.alpha_minus > 0.0 && p.lambda_plus > 0.0 && p.lambda_minus > 0.0)) {
        throw NoSolution("moment system has no solution with positive parameters", fit.residuals);
    }
    if (!(norm(r) < 1e-10)) throw NoSolution("moment system did not converge", fit.residuals);
    return fit;
}

TsParams mom_solve(const MomCoefficients& c, double beta) { return mom_solve_detailed(c, beta).params; }

NormalFit fit_normal(const RawMoments& m) { return {m.m1, std::sqrt(variance_of(m))}; }

NormalFit fit_normal(const ReturnSample& s) { return fit_normal(s.moments); }

}  // namespace tempstable
