#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/random_params.hpp"
#include "../support/synthetic.hpp"
#include "tempstable/errors.hpp"
#include "tempstable/estimation.hpp"
#include "tempstable/measures.hpp"

using namespace tempstable;
using tstest::kRefParams;

namespace {

const Market kRefMarket = Market::from_annual(0.01, 0.0, 7500.0);

// High-precision references (mpmath, 50 digits) for the printed parameters.
constexpr double kEsscherRef = -1.0669089541428954;
constexpr double kMinEntropyRef = -1.0770105372065569;
constexpr double kPOptimalRef = -1.0878221808548389;

// Moment-fitted parameters before the rounding used in the printed table.
TsParams fitted_params() { return mom_solve(moment_coefficients(tstest::kRefMoments, 0.1), 0.1); }

// Market in which the physical law is already a martingale measure (needs Psi(1) >= 0).
Market martingale_market(const TsParams& p) { return Market{cgf(p, 1.0), 0.0, 100.0, 255}; }

// Change of the residual when every stored lambda moves by one ulp. Near the
// lambda_plus = 1 boundary this floor exceeds 1e-10 in double precision.
double ulp_floor(const TsLaw& law) {
    double worst = 0.0;
    for (const auto& c : law.components()) {
        auto q = c.params;
        q.lambda_plus = std::nextafter(q.lambda_plus, 2 * q.lambda_plus);
        worst += std::abs(c.time_scale * (cgf(q, 1.0) - cgf(c.params, 1.0)));
        q = c.params;
        q.lambda_minus = std::nextafter(q.lambda_minus, 2 * q.lambda_minus);
        worst += std::abs(c.time_scale * (cgf(q, 1.0) - cgf(c.params, 1.0)));
    }
    return worst;
}

// theta * Psi'(theta) - Psi(theta) for one tail, written with std::tgamma.
double side_entropy_oracle(double a, double b, double l, double t) {
    const double g = a * std::tgamma(-b);
    return -g * (l * b * std::pow(l - t, b - 1.0) + (1.0 - b) * std::pow(l - t, b) - std::pow(l, b));
}

double side_cgf_oracle(double a, double b, double l, double t) {
    return a * std::tgamma(-b) * (std::pow(l - t, b) - std::pow(l, b));
}

}  // namespace

TEST_CASE("market validation and conversion") {
    const auto m = Market::from_annual(0.01, 0.0, 7500.0);
    CHECK(m.r == doctest::Approx(0.01 / 255).epsilon(1e-15));
    CHECK_THROWS_AS(validate(Market{0.0, 0.001, 1.0, 255}), DomainError);
    CHECK_THROWS_AS(validate(Market{0.01, 0.0, 0.0, 255}), DomainError);
    CHECK(parse_measure_kind("p-optimal") == MeasureKind::POptimalBilateral);
    CHECK_THROWS_AS(parse_measure_kind("nope"), UsageError);
}

TEST_CASE("martingale residual") {
    CHECK(martingale_residual(TsLaw(kRefParams), Market{0.0, 0.0, 1.0, 255}) ==
          doctest::Approx(cgf(kRefParams, 1.0)));
    auto small = kRefParams;
    small.lambda_plus = 0.5;
    CHECK_THROWS_AS(martingale_residual(TsLaw(small), kRefMarket), NotAMartingaleCandidate);
    CHECK_THROWS_AS(physical_solve(kRefParams, kRefMarket), PhysicalNotMartingale);
    const auto sol = physical_solve(kRefParams, martingale_market(kRefParams));
    CHECK(std::abs(sol.diagnostics.residual) < 1e-15);
}

TEST_CASE("Esscher solution for the reference parameters") {
    const auto sol = esscher_solve(kRefParams, kRefMarket);
    REQUIRE(sol.theta_plus);
    CHECK(*sol.theta_plus == doctest::Approx(kEsscherRef).epsilon(1e-10));
    CHECK(*sol.theta_minus == -*sol.theta_plus);
    CHECK(std::abs(esscher_f(kRefParams, *sol.theta_plus) - kRefMarket.r) < 1e-12);
    CHECK(std::abs(sol.diagnostics.residual) < 1e-10);
    const auto& c = sol.law_per_day.components().front().params;
    CHECK(c.lambda_plus == kRefParams.lambda_plus - *sol.theta_plus);
    CHECK(c.lambda_minus == kRefParams.lambda_minus + *sol.theta_plus);
    // The Esscher member sits on the bilateral curve.
    CHECK(bilateral_phi(kRefParams, kRefMarket, *sol.theta_plus) ==
          doctest::Approx(-*sol.theta_plus).epsilon(1e-9));
}

TEST_CASE("reference values with the moment-fitted parameters") {
    const auto p = fitted_params();
    CHECK(std::abs(*esscher_solve(p, kRefMarket).theta_plus + 1.0659) <= 1e-3);
    CHECK(std::abs(*min_entropy_solve(p, kRefMarket).theta_plus + 1.0760) <= 1e-3);
    CHECK(std::abs(*p_optimal_solve(p, kRefMarket, 2.0).theta_plus + 1.0868) <= 1e-3);
}

TEST_CASE("Esscher solution is zero for a martingale physical law") {
    tstest::ParamGen gen(21);
    for (int i = 0; i < 20; ++i) {
        const auto p = gen.params();
        if (cgf(p, 1.0) < 0.0) continue;
        const auto sol = esscher_solve(p, martingale_market(p));
        CHECK(std::abs(*sol.theta_plus) < 1e-10);
    }
}

TEST_CASE("f, f+ increasing and f- decreasing") {
    tstest::ParamGen gen(22);
    for (int i = 0; i < 100; ++i) {
        const auto p = gen.params();
        double a = gen.uniform(-p.lambda_minus, p.lambda_plus - 1.0);
        double b = gen.uniform(-p.lambda_minus, p.lambda_plus - 1.0);
        if (a > b) std::swap(a, b);
        if (a == b) continue;
        CHECK(esscher_f(p, b) > esscher_f(p, a));
        CHECK(bilateral_f_plus(p, b) > bilateral_f_plus(p, a));
        double c = gen.uniform(-3 * p.lambda_minus, p.lambda_minus);
        double d = gen.uniform(-3 * p.lambda_minus, p.lambda_minus);
        if (c > d) std::swap(c, d);
        if (c < d) CHECK(bilateral_f_minus(p, d) < bilateral_f_minus(p, c));
    }
}

TEST_CASE("Esscher admissibility: closed-form bounds agree with the range test") {
    tstest::ParamGen gen(23);
    int admissible = 0, rejected = 0;
    for (int i = 0; i < 300; ++i) {
        auto p = gen.params();
        p.lambda_plus = gen.uniform(0.2, 8.0);
        p.lambda_minus = gen.uniform(0.9, 8.0);
        if (p.lambda_plus + p.lambda_minus <= 1.0) {
            CHECK_THROWS_AS(esscher_rate_bounds(p), DomainError);
            continue;
        }
        const auto bounds = esscher_rate_bounds(p);
        CHECK(bounds.lower == doctest::Approx(esscher_f(p, -p.lambda_minus)).epsilon(1e-10));
        CHECK(bounds.upper == doctest::Approx(esscher_f(p, p.lambda_plus - 1.0)).epsilon(1e-10));
        const double y = gen.uniform(0.0, 3.0);
        const bool in_range = y > bounds.lower && y <= bounds.upper;
        bool solved = true;
        try {
            esscher_solve(p, Market{y, 0.0, 1.0, 255});
        } catch (const NoEsscherMeasure& e) {
            solved = false;
            CHECK(e.reason() == NoEsscherMeasure::Reason::RateRange);
        }
        CHECK(in_range == solved);
        (solved ? admissible : rejected)++;
    }
    CHECK(admissible > 20);
    CHECK(rejected > 20);
    auto tiny = kRefParams;
    tiny.lambda_plus = 0.3;
    tiny.lambda_minus = 0.4;
    try {
        esscher_solve(tiny, Market{0.0, 0.0, 1.0, 255});
        FAIL("expected NoEsscherMeasure");
    } catch (const NoEsscherMeasure& e) {
        CHECK(e.reason() == NoEsscherMeasure::Reason::LambdaSum);
        CHECK(e.reason_name() == "lambda_sum");
    }
}

TEST_CASE("bilateral curve") {
    const auto dom = bilateral_domain(kRefParams, kRefMarket);
    CHECK(std::isfinite(dom.theta1));
    CHECK(dom.theta2 <= kRefParams.lambda_plus - 1.0);
    CHECK(bilateral_f_plus(kRefParams, dom.theta1) == doctest::Approx(kRefMarket.r).epsilon(1e-10));

    tstest::ParamGen gen(24);
    std::vector<double> ts;
    for (int i = 0; i < 100; ++i) ts.push_back(gen.uniform(std::max(dom.theta1, -50.0), dom.theta2));
    std::sort(ts.begin(), ts.end());
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : ts) {
        const double phi = bilateral_phi(kRefParams, kRefMarket, t);
        CHECK(std::abs(bilateral_f_plus(kRefParams, t) + bilateral_f_minus(kRefParams, phi) - kRefMarket.r) <
              1e-12);
        CHECK(phi > prev);
        prev = phi;
    }
    CHECK_THROWS_AS(bilateral_phi(kRefParams, kRefMarket, dom.theta2 + 1.0), DomainError);

    const Market flat{0.0, 0.0, 1.0, 255};
    const auto d0 = bilateral_domain(kRefParams, flat);
    CHECK(std::isinf(d0.theta1));
    CHECK(std::isfinite(d0.theta1_surrogate));
    CHECK(bilateral_f_plus(kRefParams, d0.theta1_surrogate) <= 1e-14 * (1 + 1e-12));
    CHECK(bilateral_f_plus(kRefParams, d0.theta1_surrogate - 1.0) < 1e-14);
}

TEST_CASE("empty bilateral family") {
    // -alpha_plus Gamma(-beta_plus) <= r - q leaves no admissible pair.
    auto p = kRefParams;
    p.alpha_plus = 1e-4;
    const double cap = -p.alpha_plus * gamma_neg(p.beta_plus);
    const Market m{cap * 2.0, 0.0, 1.0, 255};
    CHECK_THROWS_AS(bilateral_domain(p, m), EmptyMartingaleFamily);
    CHECK_THROWS_AS(min_entropy_solve(p, m), EmptyMartingaleFamily);
    CHECK_THROWS_AS(p_optimal_solve(p, m, 2.0), EmptyMartingaleFamily);
}

TEST_CASE("entropy: closed form, identity and positivity") {
    CHECK(entropy(kRefParams, 0.0, 0.0) == 0.0);
    tstest::ParamGen gen(25);
    for (int i = 0; i < 200; ++i) {
        const auto p = gen.params();
        const double tp = gen.uniform(-2 * p.lambda_plus, 0.99 * p.lambda_plus);
        const double tm = gen.uniform(-2 * p.lambda_minus, 0.99 * p.lambda_minus);
        const double h = entropy(p, tp, tm);
        CHECK(h >= 0.0);
        const double oracle = side_entropy_oracle(p.alpha_plus, p.beta_plus, p.lambda_plus, tp) +
                              side_entropy_oracle(p.alpha_minus, p.beta_minus, p.lambda_minus, tm);
        CHECK(h == doctest::Approx(oracle).epsilon(1e-9).scale(1e-12));
    }
    CHECK_THROWS_AS(entropy(kRefParams, kRefParams.lambda_plus, 0.0), DomainError);
}

TEST_CASE("entropy matches the Monte Carlo log-likelihood") {
    const double tp = -1.077, tm = bilateral_phi(kRefParams, kRefMarket, tp);
    const auto& p = kRefParams;
    const TsLaw q(TsParams{p.alpha_plus, p.beta_plus, p.lambda_plus - tp, p.alpha_minus, p.beta_minus,
                           p.lambda_minus - tm});
    const std::size_t n = 1000000;
    const auto parts = sample_jump_parts(q, n, kDefaultJumpFloor, 99);
    const double norm = side_cgf_oracle(p.alpha_plus, p.beta_plus, p.lambda_plus, tp) +
                        side_cgf_oracle(p.alpha_minus, p.beta_minus, p.lambda_minus, tm);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = tp * parts.positive[i] + tm * parts.negative[i] - norm;
        s += l;
        s2 += l * l;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - entropy(p, tp, tm)) < 3 * se);
}

TEST_CASE("minimal entropy member") {
    const auto sol = min_entropy_solve(kRefParams, kRefMarket);
    const double t = *sol.theta_plus;
    CHECK(t == doctest::Approx(kMinEntropyRef).epsilon(2e-7));
    CHECK(std::abs(sol.diagnostics.residual) < 1e-10);
    CHECK(*sol.theta_minus == doctest::Approx(bilateral_phi(kRefParams, kRefMarket, t)).epsilon(1e-12));
    auto obj = [&](double x) { return entropy(kRefParams, x, bilateral_phi(kRefParams, kRefMarket, x)); };
    const double best = obj(t);
    CHECK(*sol.diagnostics.objective_value == doctest::Approx(best).epsilon(1e-12));
    CHECK(obj(t + 1e-4) >= best);
    CHECK(obj(t - 1e-4) >= best);
    const auto dom = bilateral_domain(kRefParams, kRefMarket);
    for (double x : bilateral_scan_grid(dom.theta1, dom.theta2, 1000)) CHECK(obj(x) >= best - 1e-12);
    CHECK(sol.diagnostics.grid_ties == 0);
}

TEST_CASE("p-optimal member") {
    CHECK(p_distance(kRefParams, 0.0, 0.0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
    const auto sol = p_optimal_solve(kRefParams, kRefMarket, 2.0);
    const double t = *sol.theta_plus;
    CHECK(t == doctest::Approx(kPOptimalRef).epsilon(2e-7));
    CHECK(std::abs(sol.diagnostics.residual) < 1e-10);
    auto obj = [&](double x) { return p_distance(kRefParams, x, bilateral_phi(kRefParams, kRefMarket, x), 2.0); };
    const double best = obj(t);
    CHECK(best >= 1.0);
    const auto dom = bilateral_domain(kRefParams, kRefMarket);
    const double hi = std::min(dom.theta2, kRefParams.lambda_plus / 2.0);
    for (double x : bilateral_scan_grid(dom.theta1, hi, 1000)) {
        const double phi = bilateral_phi(kRefParams, kRefMarket, x);
        if (phi >= kRefParams.lambda_minus / 2.0) continue;
        CHECK(obj(x) >= best - 1e-12);
    }
    CHECK_THROWS_AS(p_distance(kRefParams, kRefParams.lambda_plus / 2.0, 0.0, 2.0), DomainError);
    CHECK_THROWS_AS(p_optimal_solve(kRefParams, kRefMarket, 1.0), DomainError);
}

TEST_CASE("p-optimal approaches the minimal entropy member as p decreases to 1") {
    const double t1 = *min_entropy_solve(kRefParams, kRefMarket).theta_plus;
    const double a = *p_optimal_solve(kRefParams, kRefMarket, 1.01).theta_plus;
    const double b = *p_optimal_solve(kRefParams, kRefMarket, 1.5).theta_plus;
    CHECK(std::abs(a - t1) < std::abs(b - t1));
}

TEST_CASE("every solved measure is a martingale measure") {
    tstest::ParamGen gen(26);
    int solved = 0;
    for (int i = 0; i < 60; ++i) {
        const auto p = gen.params();
        const Market m = Market::from_annual(gen.uniform(0.0, 0.1), 0.0, 100.0);
        for (auto kind : {MeasureKind::Esscher, MeasureKind::MinEntropyBilateral, MeasureKind::POptimalBilateral,
                          MeasureKind::FsMinimal}) {
            try {
                const auto sol = solve_measure(p, m, {kind, 2.0});
                const double res = std::abs(martingale_residual(sol.law_per_day, m));
                const double floor = ulp_floor(sol.law_per_day);
                INFO("kind " << to_string(kind) << " floor " << floor);
                CHECK(res < 1e-10 + floor);
                ++solved;
            } catch (const NoFsMeasure&) {
            } catch (const LambdaTooSmall&) {
            } catch (const NoEsscherMeasure&) {
            } catch (const EmptyMartingaleFamily&) {
            }
        }
    }
    CHECK(solved > 150);
}

TEST_CASE("FS constant boundary cases") {
    auto p = kRefParams;
    // c = 0: the physical law is already a martingale law.
    const Market m0 = martingale_market(p);
    REQUIRE(cgf(p, 1.0) > 0.0);
    const auto s0 = fs_solve(p, m0);
    CHECK(*s0.c == 0.0);
    CHECK(s0.law_per_day == TsLaw(p));

    // c = -1 when r - q = Psi(2) - Psi(1): the law is the Esscher transform with Theta = 1.
    const Market m1{cgf(p, 2.0) - cgf(p, 1.0), 0.0, 1.0, 255};
    const auto s1 = fs_solve(p, m1);
    CHECK(*s1.c == -1.0);
    const TsParams e1{p.alpha_plus, p.beta_plus, p.lambda_plus - 1.0, p.alpha_minus, p.beta_minus,
                      p.lambda_minus + 1.0};
    CHECK(s1.law_per_day == TsLaw(e1));

    auto small = p;
    small.lambda_plus = 1.5;
    CHECK_THROWS_AS(fs_constant(small, kRefMarket), LambdaTooSmall);
}

TEST_CASE("FS law for an interior c") {
    const Market m = Market::from_annual(0.1, 0.0, 7500.0);
    const auto sol = fs_solve(kRefParams, m);
    const double c = *sol.c;
    CHECK(c > -1.0);
    CHECK(c < 0.0);
    REQUIRE(sol.law_per_day.components().size() == 2);
    const auto& a = sol.law_per_day.components()[0].params;
    const auto& b = sol.law_per_day.components()[1].params;
    CHECK(a.alpha_plus == doctest::Approx((c + 1) * kRefParams.alpha_plus));
    CHECK(b.alpha_minus == doctest::Approx(-c * kRefParams.alpha_minus));
    CHECK(b.lambda_plus == kRefParams.lambda_plus - 1.0);
    CHECK(sol.law_per_day.log_mgf(1.0) == doctest::Approx(m.r).epsilon(1e-10));
}

TEST_CASE("FS existence band for the reference parameters") {
    double first = -1.0, last = -1.0;
    for (int i = 0; i <= 11000; ++i) {
        const double ra = 0.05 + 1e-5 * i;
        const Market m = Market::from_annual(ra, 0.0, 7500.0);
        try {
            const auto sol = fs_solve(kRefParams, m);
            CHECK(*sol.c >= -1.0);
            CHECK(*sol.c <= 0.0);
            if (first < 0) first = ra;
            last = ra;
        } catch (const NoFsMeasure& e) {
            // Outside the band exactly one of the two conditions is violated.
            CHECK(((e.cond1_residual() > 0) != (e.cond2_residual() > 0)));
            CHECK((e.c() > 0 || e.c() < -1));
        }
    }
    CHECK(std::abs(first - 0.0736) <= 1e-4);
    CHECK(std::abs(last - 0.1330) <= 1e-4);
    // The edges themselves: c = 0 at r = Psi(1), c = -1 at r = Psi(2) - Psi(1).
    CHECK(fs_constant(kRefParams, Market{cgf(kRefParams, 1.0), 0.0, 1.0, 255}) == doctest::Approx(0.0).scale(1e-12));
    CHECK_THROWS_AS(fs_solve(kRefParams, kRefMarket), NoFsMeasure);
}

TEST_CASE("equivalence classes") {
    CHECK(same_ts_equivalence_class(kRefParams, kRefParams));
    const auto e = esscher_solve(kRefParams, kRefMarket).law_per_day.components().front().params;
    CHECK(same_ts_equivalence_class(kRefParams, e));
    auto other = kRefParams;
    other.alpha_plus += 0.01;
    CHECK_FALSE(same_ts_equivalence_class(kRefParams, other));
}

TEST_CASE("global minimal entropy existence verdict") {
    CHECK(global_min_entropy_exists(kRefParams, Market{0.0, 0.0, 1.0, 255}));
    CHECK_FALSE(global_min_entropy_exists(kRefParams, Market{1.0, 0.0, 1.0, 255}));
}
