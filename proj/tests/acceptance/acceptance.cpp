// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "../support/random_params.hpp"
#include "../support/synthetic.hpp"
#include "tempstable/errors.hpp"
#include "tempstable/estimation.hpp"
#include "tempstable/measures.hpp"
#include "tempstable/pricing.hpp"
#include "tempstable/roots.hpp"

using namespace tempstable;
using tstest::kRefMoments;
using tstest::kRefParams;

namespace {

const Market kRefMarket = Market::from_annual(0.01, 0.0, 7500.0);

struct Outcome {
    bool ok = true;
    std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, double budget_s, bool counted,
            const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = out.ok;
    if (secs > budget_s) {
        ok = false;
        out.detail += " [over time budget " + std::to_string(budget_s) + " s]";
    }
    if (!ok && counted) ++failures;
    std::printf("%s %-4s %s (%.2f s): %s\n", ok ? "PASS" : "FAIL", id.c_str(), title.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

Outcome within(const char* name, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.10f, target %.4f +- %g", name, got, want, tol);
    return {ok, buf};
}

TsParams fitted_params() { return mom_solve(moment_coefficients(kRefMoments, 0.1), 0.1); }

// Tracks one property of the invariant suite.
struct Property {
    std::string name;
    int cases = 0;
    int bad = 0;
    double worst = 0.0;
    std::string first_error;

    void check(bool ok, double err = 0.0) {
        ++cases;
        if (!ok) ++bad;
        worst = std::max(worst, err);
    }

    // Runs one case; an exception counts as a failing case.
    void run(const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            ++cases;
            ++bad;
            if (first_error.empty()) first_error = e.what();
        }
    }
};

struct McPrice {
    double price, se;
};

McPrice monte_carlo_call(const std::vector<double>& xs, const Market& mkt, double K, double T) {
    double s = 0.0, s2 = 0.0;
    for (double x : xs) {
        const double pay = std::max(mkt.s0 * std::exp(x) - K, 0.0);
        s += pay;
        s2 += pay * pay;
    }
    const double n = static_cast<double>(xs.size());
    const double disc = std::exp(-mkt.r * T);
    return {disc * s / n, disc * std::sqrt((s2 / n - (s / n) * (s / n)) / n)};
}

// Put contour chosen like the automatic call contour: minimizes the integrand
// modulus at u = 0, log M(nu) - nu k - log(nu (nu - 1)), over (-lambda_minus, 0).
double put_contour(const TsLaw& law_T, double k) {
    const double lm = law_T.lambda_minus_min();
    auto obj = [&](double nu) { return law_T.log_mgf(nu) - nu * k - std::log(nu * (nu - 1.0)); };
    return roots::golden_section(obj, -0.99 * lm, -1e-4 * lm).x;
}

bool agree(double a, double b, double se) {
    return std::abs(a - b) <= std::max(1e-4 * std::abs(b), 3.0 * se);
}

Outcome invariant_suite() {
    std::deque<Property> props;
    auto add = [&](const std::string& name) -> Property& {
        props.push_back({name});
        return props.back();
    };

    {
        auto& norm = add("cgf/cf normalization");
        auto& conj = add("cf conjugate symmetry");
        auto& split = add("Psi = Psi+ + Psi-(-z)");
        tstest::ParamGen gen(901);
        for (int i = 0; i < 200; ++i) {
            const auto p = gen.params();
            const TsLaw law(p);
            norm.check(cgf(p, 0.0) == 0.0 && std::abs(cf(law, cplx(0.0, 0.0)) - 1.0) < 1e-15,
                       std::abs(cf(law, cplx(0.0, 0.0)) - 1.0));
            const double u = gen.uniform(-50.0, 50.0);
            const double v = gen.uniform(-0.9 * std::min(p.lambda_plus, 5.0), 0.9 * std::min(p.lambda_minus, 5.0));
            const cplx a = cf(law, cplx(u, v)), b = cf(law, cplx(-u, v));
            const double ce = std::abs(a - std::conj(b)) / std::max(1.0, std::abs(a));
            conj.check(ce <= 1e-13, ce);
            const double z = gen.uniform(-p.lambda_minus, p.lambda_plus);
            const double lhs = cgf(p, z), rhs = cgf_plus(p, z) + cgf_minus(p, -z);
            const double se = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
            split.check(se <= 1e-13, se);
        }
    }
    {
        auto& f = add("f, f+ increasing");
        auto& fm = add("f- decreasing");
        tstest::ParamGen gen(902);
        for (int i = 0; i < 200; ++i) {
            const auto p = gen.params();
            double a = gen.uniform(-p.lambda_minus, p.lambda_plus - 1.0);
            double b = gen.uniform(-p.lambda_minus, p.lambda_plus - 1.0);
            if (a > b) std::swap(a, b);
            if (a < b) f.check(esscher_f(p, b) > esscher_f(p, a) && bilateral_f_plus(p, b) > bilateral_f_plus(p, a));
            double c = gen.uniform(-3 * p.lambda_minus, p.lambda_minus);
            double d = gen.uniform(-3 * p.lambda_minus, p.lambda_minus);
            if (c > d) std::swap(c, d);
            if (c < d) fm.check(bilateral_f_minus(p, d) < bilateral_f_minus(p, c));
        }
    }
    {
        auto& phi = add("Phi-curve martingale identity");
        tstest::ParamGen gen(903);
        while (phi.cases < 150) {
            const auto p = gen.params();
            const Market m = Market::from_annual(gen.uniform(0.0, 0.05), 0.0, 100.0);
            BilateralDomain dom;
            try {
                dom = bilateral_domain(p, m);
            } catch (const EmptyMartingaleFamily&) {
                continue;
            }
            const double lo = std::isfinite(dom.theta1) ? dom.theta1 : dom.theta1_surrogate;
            // Barely non-empty families push theta2 far below zero; sample just below it.
            const double t = gen.uniform(std::max(lo, std::min(-50.0, dom.theta2 - 50.0)), dom.theta2);
            const double tm = bilateral_phi(p, m, t);
            const double fm = bilateral_f_minus(p, tm);
            const double err = std::abs(bilateral_f_plus(p, t) + fm - (m.r - m.q));
            // Near lambda_minus with small beta_minus, f- jumps between adjacent doubles;
            // the identity can only hold up to that one-ulp step.
            double step = std::abs(bilateral_f_minus(p, std::nextafter(tm, -INFINITY)) - fm);
            if (tm < p.lambda_minus) step = std::min(step, std::abs(bilateral_f_minus(p, std::nextafter(tm, INFINITY)) - fm));
            phi.check(err < 1e-10 + step, err);
        }
    }
    {
        auto& h = add("entropy(0,0) = 0 and entropy >= 0");
        auto& d = add("p_distance(0,0) = 1");
        tstest::ParamGen gen(904);
        for (int i = 0; i < 200; ++i) {
            const auto p = gen.params();
            const double tp = gen.uniform(-2 * p.lambda_plus, 0.99 * p.lambda_plus);
            const double tm = gen.uniform(-2 * p.lambda_minus, 0.99 * p.lambda_minus);
            h.check(entropy(p, 0.0, 0.0) == 0.0 && entropy(p, tp, tm) >= 0.0);
            const double pe = gen.uniform(1.1, 4.0);
            const double dv = p_distance(p, 0.0, 0.0, pe);
            d.check(std::abs(dv - 1.0) < 1e-14, std::abs(dv - 1.0));
        }
    }
    {
        auto& pc = add("put-call parity (rel 1e-6)");
        tstest::ParamGen gen(905);
        for (int i = 0; i < 100; ++i) {
            const auto p = gen.smooth_params();
            const double scale = gen.uniform(0.5, 5.0);
            const double K = gen.uniform(80.0, 120.0);
            pc.run([&] {
                const Market m = Market::from_annual(0.0, 0.0, 100.0);
                const TsLaw law = TsLaw(p).scaled(scale);
                const OptionSpec opt{K, 1.0};
                const double call = price_fourier(law, m, opt);
                const double put = contour_price(law, m, opt, put_contour(law, std::log(K / m.s0))).price;
                const double parity = m.s0 * std::exp(law.log_mgf(1.0)) - K;
                const double err = std::abs(call - put - parity) / std::max(1.0, std::abs(parity));
                pc.check(err < 1e-6, err);
            });
        }
    }
    {
        auto& dn = add("density normalization (1e-4)");
        tstest::ParamGen gen(906);
        for (int i = 0; i < 100; ++i) {
            const TsLaw law(gen.smooth_params());
            const double mu = mean(law), sd = std::sqrt(cumulant(law, 2));
            auto f = [&](double x) { return density(law, x); };
            const double edges[] = {mu - 40 * sd, mu - 4 * sd, mu - sd, mu, mu + sd, mu + 4 * sd, mu + 40 * sd};
            double total = 0.0;
            for (int j = 0; j + 1 < 7; ++j) {
                total +=
                    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, edges[j], edges[j + 1], 3, 1e-7);
            }
            dn.check(std::abs(total - 1.0) <= 1e-4, std::abs(total - 1.0));
        }
    }
    {
        auto& rt = add("mom_solve roundtrip (rel 1e-6)");
        tstest::ParamGen gen(907);
        for (int i = 0; i < 100; ++i) {
            const auto p = gen.common_beta_params();
            const auto q = mom_solve(coefficients_of(p), p.beta_plus);
            const double err = std::max({std::abs(q.alpha_plus / p.alpha_plus - 1), std::abs(q.alpha_minus / p.alpha_minus - 1),
                                         std::abs(q.lambda_plus / p.lambda_plus - 1),
                                         std::abs(q.lambda_minus / p.lambda_minus - 1)});
            rt.check(err <= 1e-6, err);
        }
    }

    Outcome out;
    for (const auto& pr : props) {
        const bool ok = pr.bad == 0 && pr.cases >= 100;
        out.ok = out.ok && ok;
        std::printf("      %s %-36s cases %4d, failing %d, worst error %.2e\n", ok ? "ok  " : "bad ", pr.name.c_str(),
                    pr.cases, pr.bad, pr.worst);
        if (!pr.first_error.empty()) std::printf("           first error: %s\n", pr.first_error.c_str());
    }
    out.detail = std::to_string(props.size()) + " properties, >= 100 randomized cases each";
    return out;
}

}  // namespace

int main() {
    report("1", "Esscher root, printed parameters", 1.0, true, [] {
        return within("Theta", *esscher_solve(kRefParams, kRefMarket).theta_plus, -1.0659, 1e-3);
    });
    report("1s", "Esscher root, moment-fitted parameters (supplementary)", 1.0, false, [] {
        return within("Theta", *esscher_solve(fitted_params(), kRefMarket).theta_plus, -1.0659, 1e-3);
    });
    report("2", "minimal-entropy parameter, printed parameters", 5.0, true, [] {
        return within("theta_1", *min_entropy_solve(kRefParams, kRefMarket).theta_plus, -1.0760, 1e-3);
    });
    report("2s", "minimal-entropy parameter, moment-fitted parameters (supplementary)", 5.0, false, [] {
        return within("theta_1", *min_entropy_solve(fitted_params(), kRefMarket).theta_plus, -1.0760, 1e-3);
    });
    report("3", "p-optimal parameter (p = 2), printed parameters", 5.0, true, [] {
        return within("theta_2", *p_optimal_solve(kRefParams, kRefMarket, 2.0).theta_plus, -1.0868, 1e-3);
    });
    report("3s", "p-optimal parameter (p = 2), moment-fitted parameters (supplementary)", 5.0, false, [] {
        return within("theta_2", *p_optimal_solve(fitted_params(), kRefMarket, 2.0).theta_plus, -1.0868, 1e-3);
    });

    report("4", "FS existence band on [0, 0.2], 2001 rates", 10.0, true, [] {
        std::vector<bool> ok;
        std::vector<double> rates;
        for (int i = 0; i <= 2000; ++i) {
            const double ra = 0.2 * i / 2000.0;
            rates.push_back(ra);
            try {
                fs_solve(kRefParams, Market::from_annual(ra, 0.0, 7500.0));
                ok.push_back(true);
            } catch (const NoFsMeasure&) {
                ok.push_back(false);
            }
        }
        const auto first = std::find(ok.begin(), ok.end(), true);
        if (first == ok.end()) return Outcome{false, "no rate admits an FS measure"};
        const auto last = std::find(ok.rbegin(), ok.rend(), true);
        const auto lo = static_cast<std::size_t>(first - ok.begin());
        const auto hi = static_cast<std::size_t>(ok.rend() - last - 1);
        const bool contiguous = std::all_of(ok.begin() + lo, ok.begin() + hi + 1, [](bool b) { return b; });
        const bool ends = std::abs(rates[lo] - 0.0736) <= 5e-4 && std::abs(rates[hi] - 0.1330) <= 5e-4;
        return Outcome{contiguous && ends, fmt("band [%.4f, %.4f]", rates[lo], rates[hi]) +
                                                (contiguous ? ", contiguous" : ", NOT contiguous") +
                                                ", targets 0.0736 / 0.1330 +- 5e-4"};
    });

    report("5", "method-of-moments and normal fit from the printed moments", 1.0, true, [] {
        const auto p = mom_solve(moment_coefficients(kRefMoments, 0.1), 0.1);
        const double want[] = {1.0260, 0.8506, 122.58, 100.86};
        const double got[] = {p.alpha_plus, p.alpha_minus, p.lambda_plus, p.lambda_minus};
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(got[i] / want[i] - 1));
        const auto nf = fit_normal(kRefMoments);
        const double mu_err = std::abs(nf.mu / 1.717e-4 - 1), sd_err = std::abs(nf.sigma / 1.529e-2 - 1);
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "a+ %.4f a- %.4f l+ %.2f l- %.2f (worst rel %.2e <= 5e-3); mu %.4e sigma %.4e (rel %.1e, %.1e <= 1e-3)",
                      got[0], got[1], got[2], got[3], worst, nf.mu, nf.sigma, mu_err, sd_err);
        return Outcome{worst <= 5e-3 && mu_err <= 1e-3 && sd_err <= 1e-3 && p.beta_plus == 0.1 && p.beta_minus == 0.1,
                       buf};
    });

    const TsLaw entropy_law = min_entropy_solve(kRefParams, kRefMarket).law_per_day;
    const double grid_t[] = {2.0, 10.0};
    const double grid_k[] = {7000.0, 7500.0, 8000.0};

    report("6", "Fourier / closed-form / Monte Carlo agreement", 120.0, true, [&] {
        Outcome out;
        double worst_sigma = 0.0;
        std::uint64_t seed = 100;
        for (double T : grid_t) {
            const TsLaw law_T = entropy_law.scaled(T);
            // One sample of X_T per maturity, shared by its strikes.
            const auto xs = sample_approx(law_T, 1000000, kDefaultJumpFloor, ++seed);
            for (double K : grid_k) {
                const OptionSpec opt{K, T};
                const double f = price_fourier(law_T, kRefMarket, opt);
                const double c = price_closed_form(entropy_law, kRefMarket, opt);
                const auto mc = monte_carlo_call(xs, kRefMarket, K, T);
                const bool ok = agree(f, c, 0.0) && agree(mc.price, f, mc.se) && agree(mc.price, c, mc.se);
                out.ok = out.ok && ok;
                worst_sigma = std::max(worst_sigma, std::abs(mc.price - f) / mc.se);
                std::printf("      %s T=%-4g K=%-5g fourier %.6f closed %.6f mc %.6f (se %.4f)\n", ok ? "ok  " : "bad ", T,
                            K, f, c, mc.price, mc.se);
            }
        }
        out.detail = "6 cells, worst |mc - fourier| = " + fmt("%.2f", worst_sigma) + " se";
        return out;
    });

    report("7", "contour invariance between two admissible nu", 60.0, true, [&] {
        double worst = 0.0;
        for (double T : grid_t) {
            const TsLaw law_T = entropy_law.scaled(T);
            const auto [lo, hi] = contour_band(law_T);
            for (double K : grid_k) {
                const OptionSpec opt{K, T};
                const double nu_auto = auto_contour(law_T, kRefMarket, opt);
                ContourConfig a, b;
                a.nu = nu_auto;
                b.nu = 1.0 + 0.7 * (nu_auto - 1.0);
                if (!(*b.nu > lo && *b.nu < hi)) return Outcome{false, "second nu outside the band"};
                const double pa = price_fourier(law_T, kRefMarket, opt, a);
                const double pb = price_fourier(law_T, kRefMarket, opt, b);
                worst = std::max(worst, std::abs(pa - pb) / std::abs(pa));
            }
        }
        return Outcome{worst < 1e-8, fmt("worst relative difference %.2e (< 1e-8)", worst)};
    });

    report("8", "implied-volatility smile at T = 2 and flattening at T = 2550", 60.0, true, [&] {
        std::vector<double> strikes;
        for (int i = 0; i <= 10; ++i) strikes.push_back(7000.0 + 100.0 * i);
        const std::vector<double> mats{2.0, 2550.0};
        const auto cells = surface(entropy_law, kRefMarket, strikes, mats);
        std::vector<double> short_row, long_row;
        for (const auto& c : cells) {
            if (c.status != "ok") return Outcome{false, "cell K=" + fmt("%g", c.strike) + " failed: " + c.status};
            (c.maturity == 2.0 ? short_row : long_row).push_back(*c.implied_vol);
        }
        const auto imin = static_cast<std::size_t>(std::min_element(short_row.begin(), short_row.end()) - short_row.begin());
        const bool interior = imin > 0 && imin + 1 < short_row.size();
        const auto [lo, hi] = std::minmax_element(long_row.begin(), long_row.end());
        double mean = 0.0;
        for (double v : long_row) mean += v;
        mean /= long_row.size();
        const double spread = (*hi - *lo) / mean;
        const double level = std::abs(mean / 1.529e-2 - 1);
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "T=2 minimum at K=%g (%s); T=2550 spread %.2f%% of mean (< 5%%), mean %.5f off sigma by %.2f%% (<= 2%%)",
                      strikes[imin], interior ? "interior" : "edge", 100 * spread, mean, 100 * level);
        return Outcome{interior && spread < 0.05 && level <= 0.02, buf};
    });

    report("9", "randomized invariant suite", 300.0, true, invariant_suite);

    std::printf("%s: %d counted criterion(s) failed\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
    return failures == 0 ? 0 : 1;
}
