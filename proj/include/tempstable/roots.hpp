#pragma once

// One-dimensional solvers: bracketed root finding (bisection safeguarding an
// Illinois secant step) and golden-section minimization.

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "tempstable/errors.hpp"

namespace tempstable::roots {

struct RootOptions {
    double ftol = 1e-12;
    double xtol = 1e-10;
    int max_iter = 500;
};

struct RootResult {
    double x;
    double fx;
    int iterations;
};

/// Root of f on [lo, hi]; f(lo) and f(hi) must not share a sign. Converges
/// when |f(x)| <= ftol and the bracket is narrower than xtol*(1+|x|), or when
/// the bracket cannot shrink further in floating point.
RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& opt = {});

/// Steps outward from `inner` (where f has sign s) towards `direction` (+1/-1)
/// with geometrically growing steps until f changes sign or `limit` is passed.
/// Returns the bracket ordered (low, high).
std::pair<double, double> expand_bracket(const std::function<double(double)>& f, double inner,
                                         int direction, double first_step, double limit);

struct MinResult {
    double x;
    double fx;
    int iterations;
    // Number of scan points tying with the best within 1e-10 (relative).
    int ties = 0;
};

MinResult golden_section(const std::function<double(double)>& f, double a, double b,
                         double xtol = 1e-8, int max_iter = 500);

/// Evaluates f on the grid, brackets the best grid point by its neighbours and
/// refines with golden-section search. Non-finite evaluations are skipped.
MinResult scan_and_refine(const std::function<double(double)>& f, std::span<const double> grid,
                          double xtol = 1e-8);

}  // namespace tempstable::roots
