#include "tempstable/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "tempstable/errors.hpp"
#include "tempstable/roots.hpp"

namespace tempstable {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualTol = 1e-10;
constexpr roots::RootOptions kRootOpts{1e-14, 1e-12, 500};
// Phi feeds the minimizers, whose objectives are flat at the optimum: solve to
// full precision.
constexpr roots::RootOptions kPhiOpts{0.0, 0.0, 500};

double rate(const Market& m) { return m.r - m.q; }

TsParams shifted(const TsParams& p, double theta_plus, double theta_minus) {
    TsParams out = p;
    out.lambda_plus -= theta_plus;
    out.lambda_minus -= theta_minus;
    return out;
}

// Entropy contributed by one subordinator tilted by theta:
// theta * Psi'(theta) - Psi(theta), always >= 0.
double side_entropy(double alpha, double beta, double lambda, double theta) {
    if (theta == 0.0) return 0.0;
    if (std::abs(theta) <= 0.5 * lambda) {
        // theta^2 * alpha * Gamma(2 - beta) * int_0^1 t (lambda - theta t)^(beta - 2) dt
        auto integrand = [&](double t) { return t * std::pow(lambda - theta * t, beta - 2.0); };
        const double integral = boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, 1.0);
        return alpha * std::tgamma(2.0 - beta) * theta * theta * integral;
    }
    const double base = lambda - theta;
    const double dpsi = alpha * std::tgamma(1.0 - beta) * std::pow(base, beta - 1.0);
    const double psi = alpha * gamma_neg(beta) * pow_diff(lambda, -theta, beta);
    return std::max(0.0, theta * dpsi - psi);
}

MeasureSolution finish(MeasureSpec spec, const TsLaw& law, const Market& mkt) {
    MeasureSolution sol{spec, std::nullopt, std::nullopt, std::nullopt, law, {}};
    sol.diagnostics.residual = martingale_residual(law, mkt);
    return sol;
}

}  // namespace

Market Market::from_annual(double annual_rate, double annual_dividend, double s0, int days_per_year) {
    if (days_per_year <= 0) throw DomainError("days_per_year must be positive");
    Market m{annual_rate / days_per_year, annual_dividend / days_per_year, s0, days_per_year};
    validate(m);
    return m;
}

void validate(const Market& m) {
    if (!(m.q >= 0.0)) throw DomainError("dividend rate must be nonnegative");
    if (!(m.r >= m.q)) throw DomainError("interest rate must be at least the dividend rate");
    if (!(m.s0 > 0.0)) throw DomainError("spot price must be positive");
    if (m.days_per_year <= 0) throw DomainError("days_per_year must be positive");
}

std::string_view to_string(MeasureKind kind) noexcept {
    switch (kind) {
        case MeasureKind::Physical: return "physical";
        case MeasureKind::Esscher: return "esscher";
        case MeasureKind::MinEntropyBilateral: return "min-entropy";
        case MeasureKind::POptimalBilateral: return "p-optimal";
        case MeasureKind::FsMinimal: return "fs";
    }
    return "unknown";
}

MeasureKind parse_measure_kind(std::string_view name) {
    for (auto k : {MeasureKind::Physical, MeasureKind::Esscher, MeasureKind::MinEntropyBilateral,
                   MeasureKind::POptimalBilateral, MeasureKind::FsMinimal}) {
        if (name == to_string(k)) return k;
    }
    throw UsageError("unknown measure kind '" + std::string(name) + "'");
}

double martingale_residual(const TsLaw& law, const Market& mkt) {
    for (const auto& c : law.components()) {
        if (c.params.lambda_plus < 1.0) {
            throw NotAMartingaleCandidate("lambda_plus < 1: exp(X) has no first moment, so the "
                                          "measure is never a martingale measure");
        }
    }
    return law.log_mgf(1.0) - rate(mkt);
}

// --- Esscher ---------------------------------------------------------------

double esscher_f_plus(const TsParams& p, double theta) {
    if (!(theta <= p.lambda_plus - 1.0)) throw DomainError("theta above lambda_plus - 1");
    return p.alpha_plus * gamma_neg(p.beta_plus) * pow_diff(p.lambda_plus - theta, -1.0, p.beta_plus);
}

double esscher_f_minus(const TsParams& p, double theta) {
    if (!(theta >= -p.lambda_minus)) throw DomainError("theta below -lambda_minus");
    return p.alpha_minus * gamma_neg(p.beta_minus) * pow_diff(p.lambda_minus + theta, 1.0, p.beta_minus);
}

double esscher_f(const TsParams& p, double theta) {
    return esscher_f_plus(p, theta) + esscher_f_minus(p, theta);
}

EsscherRateBounds esscher_rate_bounds(const TsParams& p) {
    const double s = p.lambda_plus + p.lambda_minus;
    if (!(s > 1.0)) throw DomainError("lambda_plus + lambda_minus must exceed 1");
    const double gp = p.alpha_plus * gamma_neg(p.beta_plus);
    const double gm = p.alpha_minus * gamma_neg(p.beta_minus);
    return {gp * (std::pow(s - 1.0, p.beta_plus) - std::pow(s, p.beta_plus)) + gm,
            -gp + gm * (std::pow(s, p.beta_minus) - std::pow(s - 1.0, p.beta_minus))};
}

MeasureSolution esscher_solve(const TsParams& p, const Market& mkt) {
    validate(p);
    validate(mkt);
    if (!(p.lambda_plus + p.lambda_minus > 1.0)) {
        throw NoEsscherMeasure(NoEsscherMeasure::Reason::LambdaSum,
                               "no Esscher martingale measure: lambda_plus + lambda_minus <= 1");
    }
    const double y = rate(mkt);
    const double lo = -p.lambda_minus, hi = p.lambda_plus - 1.0;
    const double f_lo = esscher_f(p, lo), f_hi = esscher_f(p, hi);
    if (!(y > f_lo && y <= f_hi + 1e-12)) {
        throw NoEsscherMeasure(NoEsscherMeasure::Reason::RateRange,
                               "no Esscher martingale measure: r - q = " + std::to_string(y) +
                                   " outside (" + std::to_string(f_lo) + ", " + std::to_string(f_hi) + "]");
    }
    roots::RootResult root{hi, f_hi - y, 0};
    if (std::abs(f_hi - y) > 1e-12) {
        root = roots::find_root([&](double t) { return esscher_f(p, t) - y; }, lo, hi, kRootOpts);
    }
    const double theta = root.x;
    auto sol = finish({MeasureKind::Esscher}, TsLaw(shifted(p, theta, -theta)), mkt);
    sol.theta_plus = theta;
    sol.theta_minus = -theta;
    sol.diagnostics.iterations = root.iterations;
    return sol;
}

// --- Bilateral Esscher -----------------------------------------------------

double bilateral_f_plus(const TsParams& p, double theta_plus) { return esscher_f_plus(p, theta_plus); }

double bilateral_f_minus(const TsParams& p, double theta_minus) {
    if (!(theta_minus <= p.lambda_minus)) throw DomainError("theta_minus above lambda_minus");
    return p.alpha_minus * gamma_neg(p.beta_minus) *
           pow_diff(p.lambda_minus - theta_minus, 1.0, p.beta_minus);
}

namespace {

// Solves f+(theta) = target for theta in (-inf, l+ - 1]; target in (0, f+(l+ - 1)].
double invert_f_plus(const TsParams& p, double target) {
    const double top = p.lambda_plus - 1.0;
    auto g = [&](double t) { return bilateral_f_plus(p, t) - target; };
    if (g(top) <= 0.0) return top;
    const auto [lo, hi] = roots::expand_bracket(g, top, -1, 1.0, -1e300);
    return roots::find_root(g, lo, hi, kRootOpts).x;
}

void require_nonempty_family(const TsParams& p, const Market& mkt) {
    if (!(-p.alpha_plus * gamma_neg(p.beta_plus) > rate(mkt))) {
        throw EmptyMartingaleFamily("no bilateral Esscher martingale measure: -alpha_plus * "
                                    "Gamma(-beta_plus) <= r - q");
    }
}

}  // namespace

BilateralDomain bilateral_domain(const TsParams& p, const Market& mkt) {
    validate(p);
    validate(mkt);
    require_nonempty_family(p, mkt);
    const double y = rate(mkt);
    BilateralDomain d{};
    if (y == 0.0) {
        d.theta1 = -kInf;
        d.theta1_surrogate = invert_f_plus(p, 1e-14);
    } else {
        d.theta1 = invert_f_plus(p, y);
        d.theta1_surrogate = d.theta1;
    }
    const double y2 = y - p.alpha_minus * gamma_neg(p.beta_minus);
    const double cap = p.lambda_plus - 1.0;
    d.theta2 = y2 >= bilateral_f_plus(p, cap) ? cap : invert_f_plus(p, y2);
    return d;
}

double bilateral_phi(const TsParams& p, const Market& mkt, double theta_plus) {
    const auto d = bilateral_domain(p, mkt);
    if (!(theta_plus > d.theta1 && theta_plus < d.theta2)) {
        throw DomainError("theta_plus outside the bilateral martingale domain");
    }
    const double target = rate(mkt) - bilateral_f_plus(p, theta_plus);
    auto g = [&](double t) { return bilateral_f_minus(p, t) - target; };
    const auto [lo, hi] = roots::expand_bracket(g, p.lambda_minus, -1, 1.0, -1e300);
    return roots::find_root(g, lo, hi, kPhiOpts).x;
}

double entropy(const TsParams& p, double theta_plus, double theta_minus) {
    if (!(theta_plus < p.lambda_plus) || !(theta_minus < p.lambda_minus)) {
        throw DomainError("entropy requires theta_plus < lambda_plus and theta_minus < lambda_minus");
    }
    return side_entropy(p.alpha_plus, p.beta_plus, p.lambda_plus, theta_plus) +
           side_entropy(p.alpha_minus, p.beta_minus, p.lambda_minus, theta_minus);
}

namespace {

double log_p_distance(const TsParams& p, double tp, double tm, double pexp) {
    if (!(pexp > 1.0)) throw DomainError("p-distance exponent must exceed 1");
    if (!(tp < p.lambda_plus / pexp) || !(tm < p.lambda_minus / pexp)) {
        throw DomainError("p-distance requires theta < lambda / p on both tails");
    }
    return -pexp * (cgf_plus(p, tp) + cgf_minus(p, tm)) + cgf_plus(p, pexp * tp) +
           cgf_minus(p, pexp * tm);
}

MeasureSolution bilateral_minimize(const TsParams& p, const Market& mkt, double lo,
                                                  double hi, MeasureSpec spec,
                                                  const std::function<double(double, double)>& objective) {
    const auto grid = bilateral_scan_grid(lo, hi);
    // Phi needs the domain on every call; compute it once here.
    const double y = rate(mkt);
    auto phi = [&](double t) {
        const double target = y - bilateral_f_plus(p, t);
        auto g = [&](double s) { return bilateral_f_minus(p, s) - target; };
        const auto [a, b] = roots::expand_bracket(g, p.lambda_minus, -1, 1.0, -1e300);
        return roots::find_root(g, a, b, kPhiOpts).x;
    };
    auto f = [&](double t) { return objective(t, phi(t)); };
    const auto best = roots::scan_and_refine(f, grid, 1e-8);
    const double tp = best.x, tm = phi(tp);
    auto sol = finish(spec, TsLaw(shifted(p, tp, tm)), mkt);
    sol.theta_plus = tp;
    sol.theta_minus = tm;
    sol.diagnostics.iterations = best.iterations;
    sol.diagnostics.objective_value = best.fx;
    sol.diagnostics.grid_ties = best.ties;
    return sol;
}

}  // namespace

double p_distance(const TsParams& p, double theta_plus, double theta_minus, double pexp) {
    return std::exp(log_p_distance(p, theta_plus, theta_minus, pexp));
}

std::vector<double> bilateral_scan_grid(double lo, double hi, std::size_t n) {
    if (!(hi > lo)) throw DomainError("empty scan interval");
    const double a = std::asinh(lo), b = std::asinh(hi);
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = std::sinh(a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n + 1));
    }
    return grid;
}

MeasureSolution min_entropy_solve(const TsParams& p, const Market& mkt) {
    const auto d = bilateral_domain(p, mkt);
    return bilateral_minimize(p, mkt, d.theta1_surrogate, d.theta2, {MeasureKind::MinEntropyBilateral},
                               [&](double tp, double tm) { return entropy(p, tp, tm); });
}

MeasureSolution p_optimal_solve(const TsParams& p, const Market& mkt, double pexp) {
    if (!(pexp > 1.0)) throw DomainError("p-optimal measure requires p > 1");
    const auto d = bilateral_domain(p, mkt);
    // theta_minus = Phi(theta_plus) < l-/p  <=>  theta_plus < Phi^{-1}(l-/p).
    const double phi_inv = invert_f_plus(p, rate(mkt) - bilateral_f_minus(p, p.lambda_minus / pexp));
    const double hi = std::min({d.theta2, p.lambda_plus / pexp, phi_inv});
    auto sol = bilateral_minimize(p, mkt, d.theta1_surrogate, hi, {MeasureKind::POptimalBilateral, pexp},
                                   [&](double tp, double tm) { return log_p_distance(p, tp, tm, pexp); });
    sol.diagnostics.objective_value = std::exp(*sol.diagnostics.objective_value);
    return sol;
}

// --- Foellmer-Schweizer ----------------------------------------------------

double fs_constant(const TsParams& p, const Market& mkt) {
    validate(p);
    validate(mkt);
    if (!(p.lambda_plus >= 2.0)) throw LambdaTooSmall("FS constant requires lambda_plus >= 2");
    const double psi1 = cgf(p, 1.0), psi2 = cgf(p, 2.0);
    return (psi1 - rate(mkt)) / (psi2 - 2.0 * psi1);
}

MeasureSolution fs_solve(const TsParams& p, const Market& mkt) {
    double c = fs_constant(p, mkt);
    // The boundary cases reduce to a single law; absorb rounding around them.
    if (std::abs(c) <= 1e-12) c = 0.0;
    if (std::abs(c + 1.0) <= 1e-12) c = -1.0;
    const double psi1 = cgf(p, 1.0), psi2 = cgf(p, 2.0), y = rate(mkt);
    if (!(c >= -1.0 && c <= 0.0)) {
        throw NoFsMeasure("FS minimal martingale measure does not exist: c = " + std::to_string(c) +
                              " outside [-1, 0]",
                          c, psi1 - y, psi1 - psi2 + y);
    }
    std::vector<LawComponent> parts;
    if (c + 1.0 > 0.0) {
        parts.push_back({{(c + 1.0) * p.alpha_plus, p.beta_plus, p.lambda_plus, (c + 1.0) * p.alpha_minus,
                          p.beta_minus, p.lambda_minus},
                         1.0});
    }
    if (-c > 0.0) {
        parts.push_back({{-c * p.alpha_plus, p.beta_plus, p.lambda_plus - 1.0, -c * p.alpha_minus,
                          p.beta_minus, p.lambda_minus + 1.0},
                         1.0});
    }
    auto sol = finish({MeasureKind::FsMinimal}, TsLaw(std::move(parts)), mkt);
    sol.c = c;
    return sol;
}

// --- Misc ------------------------------------------------------------------

MeasureSolution physical_solve(const TsParams& p, const Market& mkt) {
    validate(p);
    validate(mkt);
    auto sol = finish({MeasureKind::Physical}, TsLaw(p), mkt);
    if (!(std::abs(sol.diagnostics.residual) < kResidualTol)) {
        throw PhysicalNotMartingale("the physical measure is not a martingale measure: Psi(1) - (r - q) = " +
                                        std::to_string(sol.diagnostics.residual),
                                    sol.diagnostics.residual);
    }
    sol.theta_plus = 0.0;
    sol.theta_minus = 0.0;
    return sol;
}

MeasureSolution solve_measure(const TsParams& p, const Market& mkt, const MeasureSpec& spec) {
    switch (spec.kind) {
        case MeasureKind::Physical: return physical_solve(p, mkt);
        case MeasureKind::Esscher: return esscher_solve(p, mkt);
        case MeasureKind::MinEntropyBilateral: return min_entropy_solve(p, mkt);
        case MeasureKind::POptimalBilateral: return p_optimal_solve(p, mkt, spec.p);
        case MeasureKind::FsMinimal: return fs_solve(p, mkt);
    }
    throw DomainError("unknown measure kind");
}

bool global_min_entropy_exists(const TsParams& p, const Market& mkt) {
    validate(p);
    if (p.lambda_plus < 1.0) return true;
    return cgf(p, 1.0) >= rate(mkt);
}

bool same_ts_equivalence_class(const TsParams& a, const TsParams& b) {
    return a.alpha_plus == b.alpha_plus && a.alpha_minus == b.alpha_minus &&
           a.beta_plus == b.beta_plus && a.beta_minus == b.beta_minus;
}

}  // namespace tempstable
