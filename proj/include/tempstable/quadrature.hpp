#pragma once

// Adaptive Gauss-Kronrod (7/15) integration of complex-valued integrands with
// an explicit evaluation budget. Intended for the Fourier-type integrals used
// by the density, distribution function and contour pricing routines.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "tempstable/errors.hpp"

namespace tempstable::quad {

using cplx = std::complex<double>;

struct Options {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    std::size_t max_evals = 200000;
};

struct Result {
    cplx value{0.0, 0.0};
    double error = 0.0;
    std::size_t evals = 0;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the nodes kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const cplx fc = f(center);
    cplx kronrod = fc * kWgk[7];
    cplx gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const cplx f1 = f(center - dx);
        const cplx f2 = f(center + dx);
        kronrod += (f1 + f2) * kWgk[j];
        if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
    }
    const cplx value = kronrod * half;
    const double err = std::abs((kronrod - gauss) * half);
    return {a, b, value, err};
}

}  // namespace detail

/// Integrates f over [breaks.front(), breaks.back()] starting from the given
/// partition and bisecting the worst segment until the summed error estimate
/// meets max(abs_tol, rel_tol * |I|). Throws QuadratureFailure when the
/// evaluation budget is exhausted first.
template <class F>
Result integrate(F&& f, std::span<const double> breaks, const Options& opt) {
    Result res;
    if (breaks.size() < 2) return res;
    std::priority_queue<detail::Segment> heap;
    cplx total{0.0, 0.0};
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        auto seg = detail::kronrod15(f, breaks[i], breaks[i + 1]);
        res.evals += 15;
        total += seg.value;
        err += seg.error;
        heap.push(seg);
    }
    // Error sums are re-accumulated periodically to keep round-off from the
    // running subtraction out of the stopping test.
    std::size_t since_resum = 0;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (res.evals + 30 > opt.max_evals) {
            throw QuadratureFailure("quadrature budget of " + std::to_string(opt.max_evals) +
                                    " evaluations exhausted (error estimate " +
                                    std::to_string(err) + ")");
        }
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureFailure("quadrature segment cannot be bisected further");
        }
        auto left = detail::kronrod15(f, worst.a, mid);
        auto right = detail::kronrod15(f, mid, worst.b);
        res.evals += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if (++since_resum == 64) {
            since_resum = 0;
            auto copy = heap;
            cplx t{0.0, 0.0};
            double e = 0.0;
            while (!copy.empty()) {
                t += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            total = t;
            err = e;
        }
    }
    res.value = total;
    res.error = err;
    return res;
}

/// Breakpoints for a Fourier-type integral on [0, upper]: geometric growth
/// from `first` (doubling), with every panel capped at `max_width`.
inline std::vector<double> fourier_breakpoints(double upper, double first, double max_width) {
    std::vector<double> pts{0.0};
    double edge = std::min(first, upper);
    double prev = 0.0;
    while (true) {
        const double width = edge - prev;
        const int pieces = std::max(1, static_cast<int>(std::ceil(width / max_width)));
        for (int i = 1; i <= pieces; ++i) pts.push_back(prev + width * i / pieces);
        if (edge >= upper) break;
        prev = edge;
        edge = std::min(2.0 * edge, upper);
    }
    return pts;
}

}  // namespace tempstable::quad
