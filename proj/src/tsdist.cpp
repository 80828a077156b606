#include "tempstable/tsdist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "tempstable/errors.hpp"
#include "tempstable/quadrature.hpp"
#include "tempstable/roots.hpp"

namespace tempstable {

namespace {

constexpr double kPi = std::numbers::pi;

cplx log1p_c(cplx w) {
    const cplx u = 1.0 + w;
    if (u == cplx(1.0, 0.0)) return w;
    return std::log(u) * w / (u - 1.0);
}

cplx expm1_c(cplx z) {
    const double x = z.real(), y = z.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

void require_time_scale(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time scale must be positive");
}

}  // namespace

void validate(const TsParams& p) {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    auto unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!positive(p.alpha_plus) || !positive(p.alpha_minus))
        throw DomainError("alpha parameters must be positive");
    if (!positive(p.lambda_plus) || !positive(p.lambda_minus))
        throw DomainError("lambda parameters must be positive");
    if (!unit(p.beta_plus) || !unit(p.beta_minus))
        throw DomainError("beta parameters must lie in (0, 1)");
}

double gamma_neg(double beta) { return std::tgamma(1.0 - beta) / (-beta); }

double pow_diff(double base, double delta, double beta) {
    if (base == 0.0) return std::pow(delta, beta);
    const double ratio = delta / base;
    if (ratio == -1.0) return -std::pow(base, beta);
    return std::pow(base, beta) * std::expm1(beta * std::log1p(ratio));
}

cplx pow_diff(double base, cplx delta, double beta) {
    if (!((base + delta).real() > 0.0)) {
        throw DomainError("complex power base left the right half-plane");
    }
    return std::pow(base, beta) * expm1_c(beta * log1p_c(delta / base));
}

// ---------------------------------------------------------------------------

TsLaw::TsLaw(std::vector<LawComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw DomainError("a law needs at least one component");
    for (const auto& c : components_) {
        validate(c.params);
        require_time_scale(c.time_scale);
    }
}

TsLaw::TsLaw(const TsParams& p, double time_scale) : TsLaw(std::vector{LawComponent{p, time_scale}}) {}

TsLaw TsLaw::scaled(double t) const {
    require_time_scale(t);
    auto out = components_;
    for (auto& c : out) c.time_scale *= t;
    return TsLaw(std::move(out));
}

TsLaw TsLaw::tilted(double theta) const {
    auto out = components_;
    for (auto& c : out) {
        c.params.lambda_plus -= theta;
        c.params.lambda_minus += theta;
    }
    return TsLaw(std::move(out));
}

double TsLaw::lambda_plus_min() const noexcept {
    double m = components_.front().params.lambda_plus;
    for (const auto& c : components_) m = std::min(m, c.params.lambda_plus);
    return m;
}

double TsLaw::lambda_minus_min() const noexcept {
    double m = components_.front().params.lambda_minus;
    for (const auto& c : components_) m = std::min(m, c.params.lambda_minus);
    return m;
}

cplx TsLaw::log_mgf(cplx s) const {
    cplx total{0.0, 0.0};
    for (const auto& c : components_) total += c.time_scale * cgf(c.params, s);
    return total;
}

double TsLaw::log_mgf(double s) const {
    double total = 0.0;
    for (const auto& c : components_) total += c.time_scale * cgf(c.params, s);
    return total;
}

// ---------------------------------------------------------------------------

double cgf_plus(const TsParams& p, double z) {
    if (!(z <= p.lambda_plus)) throw DomainError("cgf_plus argument above lambda_plus");
    return p.alpha_plus * gamma_neg(p.beta_plus) * pow_diff(p.lambda_plus, -z, p.beta_plus);
}

double cgf_minus(const TsParams& p, double z) {
    if (!(z <= p.lambda_minus)) throw DomainError("cgf_minus argument above lambda_minus");
    return p.alpha_minus * gamma_neg(p.beta_minus) * pow_diff(p.lambda_minus, -z, p.beta_minus);
}

double cgf(const TsParams& p, double z) {
    if (!(z >= -p.lambda_minus && z <= p.lambda_plus)) {
        throw DomainError("cgf argument " + std::to_string(z) + " outside [-lambda_minus, lambda_plus]");
    }
    return cgf_plus(p, z) + cgf_minus(p, -z);
}

cplx cgf(const TsParams& p, cplx z) {
    return p.alpha_plus * gamma_neg(p.beta_plus) * pow_diff(p.lambda_plus, -z, p.beta_plus) +
           p.alpha_minus * gamma_neg(p.beta_minus) * pow_diff(p.lambda_minus, z, p.beta_minus);
}

cplx cf(const TsLaw& law, cplx z) {
    if (!(z.imag() > -law.lambda_plus_min() && z.imag() < law.lambda_minus_min())) {
        throw DomainError("cf argument outside the strip of analyticity");
    }
    return std::exp(law.log_mgf(cplx(0.0, 1.0) * z));
}

double levy_density(const TsParams& p, double x) {
    if (x == 0.0 || !std::isfinite(x)) throw DomainError("levy_density is undefined at x = 0");
    if (x > 0.0) return p.alpha_plus * std::pow(x, -1.0 - p.beta_plus) * std::exp(-p.lambda_plus * x);
    const double ax = -x;
    return p.alpha_minus * std::pow(ax, -1.0 - p.beta_minus) * std::exp(-p.lambda_minus * ax);
}

double cumulant(const TsParams& p, int k) {
    if (k < 1) throw DomainError("cumulant order must be >= 1");
    const double kp = k - p.beta_plus, km = k - p.beta_minus;
    const double plus = std::tgamma(kp) * p.alpha_plus / std::pow(p.lambda_plus, kp);
    const double minus = std::tgamma(km) * p.alpha_minus / std::pow(p.lambda_minus, km);
    return k % 2 == 0 ? plus + minus : plus - minus;
}

double cumulant(const TsLaw& law, int k) {
    double total = 0.0;
    for (const auto& c : law.components()) total += c.time_scale * cumulant(c.params, k);
    return total;
}

double mean(const TsLaw& law) { return cumulant(law, 1); }

// ---------------------------------------------------------------------------
// Fourier inversion

namespace {

// Doubles `u` until envelope(u) < eps. Throws once the search runs away.
template <class Env>
double truncation_point(Env&& envelope, double start, double eps) {
    double u = start;
    for (int i = 0; i < 200; ++i) {
        if (envelope(u) < eps) return u;
        u *= 2.0;
    }
    throw QuadratureFailure("characteristic function does not decay below the tail threshold");
}

std::vector<double> panels(double upper, double scale, double frequency, std::size_t max_evals) {
    double max_width = upper;
    if (frequency > 0.0) max_width = std::min(upper, 4.0 * kPi / frequency);
    const double count = upper / max_width;
    if (15.0 * count > static_cast<double>(max_evals)) {
        throw QuadratureFailure("oscillatory inversion integral needs more than the evaluation budget");
    }
    return quad::fourier_breakpoints(upper, scale, max_width);
}

struct TailIntegral {
    bool upper;    // true: value is P(X > x); false: value is P(X <= x)
    double value;
};

TailIntegral inversion_tail(const TsLaw& law, double x, const InversionConfig& cfg) {
    const double m = mean(law);
    const double sd = std::sqrt(cumulant(law, 2));
    const bool right = x >= m;
    const double lam = right ? law.lambda_plus_min() : law.lambda_minus_min();
    const double lo = std::min(1e-3 / sd, 0.01 * lam);
    const double hi = 0.9 * lam;
    // Damping that minimizes the integrand at u = 0.
    auto h = [&](double e) {
        const double eta = right ? e : -e;
        return law.log_mgf(eta) - eta * x - std::log(e);
    };
    const double eta_abs = roots::golden_section(h, lo, hi, 1e-6).x;
    const double eta = right ? eta_abs : -eta_abs;

    auto g = [&](double u) -> cplx {
        const cplx s(eta, u);
        return std::exp(law.log_mgf(s) - s * x) / s;
    };
    const double g0 = std::abs(g(0.0));
    const double upper = truncation_point([&](double u) { return std::abs(g(u)); }, 1.0 / sd,
                                          cfg.tail_eps * std::max(1.0, g0));
    const auto breaks = panels(upper, 1.0 / sd, std::abs(x - m), cfg.max_evals);
    auto re = [&](double u) { return cplx(g(u).real(), 0.0); };
    const auto r = quad::integrate(re, breaks, {cfg.abs_tol, cfg.rel_tol, cfg.max_evals});
    const double integral = r.value.real() / kPi;
    // Shifting the contour across the pole at s = 0 adds its unit residue.
    if (right) return {true, integral};
    return {false, -integral};
}

}  // namespace

double density(const TsLaw& law, double x, const InversionConfig& cfg) {
    const double m = mean(law);
    const double sd = std::sqrt(cumulant(law, 2));
    auto log_phi = [&](double u) { return law.log_mgf(cplx(0.0, u)); };
    const double upper = truncation_point(
        [&](double u) { return std::exp(log_phi(u).real()); }, 1.0 / sd, cfg.tail_eps);
    const auto breaks = panels(upper, 1.0 / sd, std::abs(x - m), cfg.max_evals);
    auto integrand = [&](double u) {
        return cplx(std::exp(log_phi(u) - cplx(0.0, u * x)).real(), 0.0);
    };
    const auto r = quad::integrate(integrand, breaks, {cfg.abs_tol, cfg.rel_tol, cfg.max_evals});
    return std::max(0.0, r.value.real() / kPi);
}

double survival(const TsLaw& law, double x, const InversionConfig& cfg) {
    const auto t = inversion_tail(law, x, cfg);
    const double s = t.upper ? t.value : 1.0 - t.value;
    return std::clamp(s, 0.0, 1.0);
}

double cdf(const TsLaw& law, double x, const InversionConfig& cfg) {
    const auto t = inversion_tail(law, x, cfg);
    const double f = t.upper ? 1.0 - t.value : t.value;
    return std::clamp(f, 0.0, 1.0);
}

std::vector<double> cdf_grid(const TsLaw& law, std::span<const double> xs, const InversionConfig& cfg) {
    std::vector<double> out;
    out.reserve(xs.size());
    double running = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0 && xs[i] < xs[i - 1]) throw DomainError("cdf_grid requires an ascending grid");
        running = std::max(running, cdf(law, xs[i], cfg));
        out.push_back(running);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Approximate sampling

namespace {

struct TailPlan {
    double drift;       // expected sum of jumps below the floor
    double proposals;   // Poisson intensity of the Pareto proposal
    double inv_beta;
    double lambda;
    double residual_variance;
};

TailPlan plan_tail(double alpha, double beta, double lambda, double t, double floor) {
    using boost::math::tgamma_lower;
    TailPlan plan;
    plan.drift = alpha * t * std::pow(lambda, beta - 1.0) * tgamma_lower(1.0 - beta, lambda * floor);
    plan.residual_variance =
        alpha * t * std::pow(lambda, beta - 2.0) * tgamma_lower(2.0 - beta, lambda * floor);
    plan.proposals = alpha * t * std::pow(floor, -beta) / beta;
    plan.inv_beta = 1.0 / beta;
    plan.lambda = lambda;
    return plan;
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // (0, 1), never 0 so that U^(-1/beta) stays finite.
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double tail_sum(const TailPlan& plan, std::poisson_distribution<long>& count, double floor) {
        double sum = plan.drift;
        const long n = count(engine_);
        for (long i = 0; i < n; ++i) {
            const double x = floor * std::exp(-std::log(uniform()) * plan.inv_beta);
            const double lx = plan.lambda * x;
            if (lx > 745.0) {
                (void)uniform();
                continue;
            }
            if (uniform() < std::exp(-lx)) sum += x;
        }
        return sum;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace

JumpParts sample_jump_parts(const TsLaw& law, std::size_t n, double jump_floor, std::uint64_t seed) {
    if (!(jump_floor > 0.0)) throw DomainError("jump_floor must be positive");
    struct ComponentPlan {
        TailPlan plus, minus;
        std::poisson_distribution<long> count_plus, count_minus;
    };
    std::vector<ComponentPlan> plans;
    double residual = 0.0;
    for (const auto& c : law.components()) {
        const auto& p = c.params;
        ComponentPlan cp{plan_tail(p.alpha_plus, p.beta_plus, p.lambda_plus, c.time_scale, jump_floor),
                         plan_tail(p.alpha_minus, p.beta_minus, p.lambda_minus, c.time_scale, jump_floor),
                         {}, {}};
        cp.count_plus = std::poisson_distribution<long>(cp.plus.proposals);
        cp.count_minus = std::poisson_distribution<long>(cp.minus.proposals);
        residual += cp.plus.residual_variance + cp.minus.residual_variance;
        plans.push_back(std::move(cp));
    }
    if (residual >= 1e-8) {
        throw DomainError("jump_floor too large: discarded jumps carry variance " +
                          std::to_string(residual));
    }

    Sampler rng(seed);
    JumpParts out;
    out.positive.resize(n);
    out.negative.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pos = 0.0, neg = 0.0;
        for (auto& cp : plans) {
            pos += rng.tail_sum(cp.plus, cp.count_plus, jump_floor);
            neg += rng.tail_sum(cp.minus, cp.count_minus, jump_floor);
        }
        out.positive[i] = pos;
        out.negative[i] = neg;
    }
    return out;
}

std::vector<double> sample_approx(const TsLaw& law, std::size_t n, double jump_floor, std::uint64_t seed) {
    auto parts = sample_jump_parts(law, n, jump_floor, seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = parts.positive[i] - parts.negative[i];
    return out;
}

}  // namespace tempstable
