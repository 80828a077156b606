#include "tempstable/pricing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "tempstable/errors.hpp"
#include "tempstable/quadrature.hpp"
#include "tempstable/roots.hpp"

namespace tempstable {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPanelStop = 1e-12;
constexpr double kMaxCancellation = 1e6;
constexpr double kAbsoluteFloor = 1e-12;
constexpr int kMaxDoublings = 200;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct HalfIntegral {
    cplx value{0.0, 0.0};
    double upper = 0.0;
    std::size_t evals = 0;
};

}  // namespace

void validate(const OptionSpec& opt) {
    if (!(opt.strike > 0.0) || !std::isfinite(opt.strike)) throw DomainError("strike must be positive");
    if (!(opt.maturity > 0.0) || !std::isfinite(opt.maturity))
        throw DomainError("maturity must be positive");
}

std::pair<double, double> contour_band(const TsLaw& law_T) {
    const double lam = law_T.lambda_plus_min();
    if (!(lam > 1.0)) {
        throw ContourViolation("contour pricing needs lambda_plus > 1 (got " + std::to_string(lam) +
                               "); the formula does not apply at or below the boundary");
    }
    return {1.0, lam};
}

double auto_contour(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt) {
    const auto [one, lam] = contour_band(law_T);
    const double k = std::log(opt.strike / mkt.s0);
    auto g = [&](double nu) { return law_T.log_mgf(nu) - nu * k - std::log(nu * (nu - 1.0)); };
    const double lo = one + 1e-4 * (lam - one), hi = one + 0.9 * (lam - one);
    return roots::golden_section(g, lo, hi, 1e-6).x;
}

PriceResult contour_price(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt, double nu,
                          const ContourConfig& cfg) {
    validate(mkt);
    validate(opt);
    if (!(nu > -law_T.lambda_minus_min() && nu < law_T.lambda_plus_min()))
        throw ContourViolation("contour outside the strip of analyticity");
    if (std::abs(nu) <= 1e-9 || std::abs(nu - 1.0) <= 1e-9)
        throw ContourViolation("contour passes through a pole of the payoff transform");

    const double k = std::log(opt.strike / mkt.s0);
    const double T = opt.maturity;
    // The integrand is divided by its modulus scale at u = 0 so that quadrature
    // sees O(1) values even when the optimal contour makes them underflow.
    const double log_norm = law_T.log_mgf(nu) - nu * k;
    auto integrand = [&](double u) -> cplx {
        const cplx z(u, nu);
        const cplx e = law_T.log_mgf(cplx(nu, -u)) + cplx(-nu * k - log_norm, u * k);
        return std::exp(e) / (z * (z - cplx(0.0, 1.0)));
    };

    // Near u = 0 the integrand is shaped by the law tilted by nu: its spread sets
    // the width in u, its mean the oscillation frequency.
    const TsLaw tilted = law_T.tilted(nu);
    const double sd = std::sqrt(cumulant(tilted, 2));
    const double first = 1.0 / sd;
    const double freq = std::abs(k) + std::abs(mean(tilted));
    const double cap = freq > 0.0 ? 4.0 * kPi / freq : first;
    const double scale = std::abs(integrand(0.0)) * first;
    std::size_t used = 0;

    auto segment = [&](auto& f, double a, double b) {
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / cap)));
        std::vector<double> breaks(pieces + 1);
        for (int i = 0; i <= pieces; ++i) breaks[i] = a + (b - a) * i / pieces;
        breaks.back() = b;
        if (used >= cfg.max_evals) throw QuadratureFailure("contour integral exceeded its evaluation budget");
        const auto r = quad::integrate(f, breaks, {1e-15 * scale, 1e-12, cfg.max_evals - used});
        used += r.evals;
        return r.value;
    };

    auto half = [&](double sign) {
        auto f = [&](double u) { return integrand(sign * u); };
        HalfIntegral h;
        if (cfg.truncation) {
            const double U = *cfg.truncation;
            if (!(U > 0.0)) throw DomainError("truncation must be positive");
            const auto pts = quad::fourier_breakpoints(U, std::min(first, U), cap);
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) h.value += segment(f, pts[i], pts[i + 1]);
            h.upper = U;
            return h;
        }
        double lo = 0.0, hi = first;
        for (int i = 0; i < kMaxDoublings; ++i) {
            const cplx piece = segment(f, lo, hi);
            h.value += piece;
            const double acc = std::abs(h.value);
            // Beyond hi the integrand is bounded by |M(nu - i u)| e^{-nu k} / u^2.
            const double tail = std::exp(law_T.log_mgf(cplx(nu, -sign * hi)).real() - nu * k - log_norm) / hi;
            if (i > 0 && std::abs(piece) < kPanelStop * acc && tail < kPanelStop * acc) {
                h.upper = hi;
                return h;
            }
            lo = hi;
            hi *= 2.0;
        }
        throw QuadratureFailure("contour integrand does not decay");
    };

    const auto right = half(1.0);
    const auto left = half(-1.0);
    // The integral over u < 0 is the u > 0 integral of f(-u).
    const cplx total = right.value + left.value;
    const double pref = -std::exp(-mkt.r * T + log_norm) * opt.strike / (2.0 * kPi);

    PriceResult res;
    res.price = pref * total.real();
    // Rounding in the integrand is of order eps * scale; when that swamps the
    // result the contour sits too far from the damping optimum to be usable.
    // Prices negligible next to the payoff scale only need absolute accuracy.
    const double payoff = mkt.s0 * std::exp(-mkt.q * T) + opt.strike * std::exp(-mkt.r * T);
    if (std::abs(pref) * scale > kMaxCancellation * std::max(std::abs(res.price), kAbsoluteFloor * payoff)) {
        throw QuadratureFailure("contour integral is dominated by cancellation at nu = " + std::to_string(nu));
    }
    res.imag_residual = std::abs(pref * total.imag());
    res.nu = nu;
    res.truncation = std::max(right.upper, left.upper);
    res.evals = used;
    return res;
}

PriceResult price_fourier_detailed(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt,
                                   const ContourConfig& cfg) {
    validate(opt);
    const auto [one, lam] = contour_band(law_T);
    const double nu = cfg.nu ? *cfg.nu : auto_contour(law_T, mkt, opt);
    if (!(nu > one + 1e-9 && nu < lam)) {
        throw ContourViolation("nu = " + std::to_string(nu) + " outside the admissible band (1, " +
                               std::to_string(lam) + ")");
    }
    return contour_price(law_T, mkt, opt, nu, cfg);
}

double price_fourier(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt, const ContourConfig& cfg) {
    return price_fourier_detailed(law_T, mkt, opt, cfg).price;
}

double price_closed_form(const TsLaw& law_per_day, const Market& mkt, const OptionSpec& opt,
                         const InversionConfig& cfg) {
    validate(mkt);
    validate(opt);
    if (!(law_per_day.lambda_plus_min() > 1.0)) throw DomainError("closed-form price needs lambda_plus > 1");
    const double T = opt.maturity;
    const double k = std::log(opt.strike / mkt.s0);
    const TsLaw law_T = law_per_day.scaled(T);
    const double psi1 = law_per_day.log_mgf(1.0);
    return mkt.s0 * std::exp((psi1 - mkt.r) * T) * survival(law_T.tilted(1.0), k, cfg) -
           std::exp(-mkt.r * T) * opt.strike * survival(law_T, k, cfg);
}

double price_black_scholes(const Market& mkt, const OptionSpec& opt, double sigma) {
    validate(mkt);
    validate(opt);
    if (!(sigma > 0.0)) throw DomainError("volatility must be positive");
    const double T = opt.maturity;
    const double sv = sigma * std::sqrt(T);
    const double d1 = (std::log(mkt.s0 / opt.strike) + (mkt.r - mkt.q + 0.5 * sigma * sigma) * T) / sv;
    const double d2 = d1 - sv;
    return mkt.s0 * std::exp(-mkt.q * T) * normal_cdf(d1) -
           opt.strike * std::exp(-mkt.r * T) * normal_cdf(d2);
}

double implied_vol(const Market& mkt, const OptionSpec& opt, double price) {
    validate(mkt);
    validate(opt);
    const double T = opt.maturity;
    const double fwd = mkt.s0 * std::exp(-mkt.q * T);
    const double lower = std::max(fwd - opt.strike * std::exp(-mkt.r * T), 0.0);
    if (!(price > lower && price < fwd)) {
        throw PriceOutOfBand("price " + std::to_string(price) + " outside the no-arbitrage band (" +
                             std::to_string(lower) + ", " + std::to_string(fwd) + ")");
    }
    auto f = [&](double s) { return price_black_scholes(mkt, opt, s) - price; };
    constexpr double lo = 1e-8, hi = 10.0;
    const double flo = f(lo), fhi = f(hi);
    if (std::abs(flo) < 1e-10) return lo;
    if (flo > 0.0 || fhi < 0.0) {
        throw PriceOutOfBand("no volatility in [1e-8, 10] reproduces price " + std::to_string(price));
    }
    return roots::find_root(f, lo, hi, {1e-11, 1e-15, 1000}).x;
}

std::vector<SurfaceCell> surface(const TsLaw& law_per_day, const Market& mkt, std::span<const double> strikes,
                                 std::span<const double> maturities, const ContourConfig& cfg,
                                 unsigned threads) {
    std::vector<SurfaceCell> cells;
    cells.reserve(strikes.size() * maturities.size());
    for (double T : maturities)
        for (double K : strikes) cells.push_back({K, T, std::nullopt, std::nullopt, "ok", {}});

    auto run = [&](SurfaceCell& cell) {
        try {
            const OptionSpec opt{cell.strike, cell.maturity};
            validate(opt);
            cell.price = price_fourier(law_per_day.scaled(cell.maturity), mkt, opt, cfg);
            cell.implied_vol = implied_vol(mkt, opt, *cell.price);
        } catch (const Error& e) {
            cell.status = std::string(error_code_name(e.code()));
            cell.message = e.what();
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || cells.size() < 2) {
        for (auto& c : cells) run(c);
        return cells;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, cells.size()); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < cells.size(); i = next++) run(cells[i]);
        });
    }
    for (auto& th : pool) th.join();
    return cells;
}

}  // namespace tempstable
