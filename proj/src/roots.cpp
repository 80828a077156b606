#include "tempstable/roots.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tempstable::roots {

namespace {

bool same_sign(double a, double b) { return (a > 0.0) == (b > 0.0); }

}  // namespace

RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& opt) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, flo, 0};
    if (fhi == 0.0) return {hi, fhi, 0};
    if (std::isnan(flo) || std::isnan(fhi) || same_sign(flo, fhi)) {
        throw DomainError("root not bracketed on [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    }
    // Illinois-modified values; the true endpoint values stay in flo/fhi.
    double glo = flo, ghi = fhi;
    int last_side = 0;
    double width_two_ago = hi - lo, width_one_ago = hi - lo;
    RootResult best{std::abs(flo) < std::abs(fhi) ? lo : hi,
                    std::abs(flo) < std::abs(fhi) ? flo : fhi, 0};

    for (int it = 1; it <= opt.max_iter; ++it) {
        const double width = hi - lo;
        double x = (lo * ghi - hi * glo) / (ghi - glo);
        const bool slow = width > 0.5 * width_two_ago;
        if (!(x > lo && x < hi) || slow) x = lo + 0.5 * width;
        width_two_ago = width_one_ago;
        width_one_ago = width;

        const double fx = f(x);
        if (std::abs(fx) < std::abs(best.fx)) best = {x, fx, it};
        best.iterations = it;
        if (fx == 0.0) return {x, fx, it};
        if (same_sign(fx, flo)) {
            lo = x;
            flo = glo = fx;
            if (last_side == -1) ghi *= 0.5;
            last_side = -1;
        } else {
            hi = x;
            fhi = ghi = fx;
            if (last_side == 1) glo *= 0.5;
            last_side = 1;
        }
        const double w = hi - lo;
        if (std::abs(best.fx) <= opt.ftol && w <= opt.xtol * (1.0 + std::abs(best.x))) return best;
        // Stop only once lo and hi are adjacent doubles, so no untried point is left in between.
        if (std::nextafter(lo, hi) >= hi) return best;
    }
    return best;
}

std::pair<double, double> expand_bracket(const std::function<double(double)>& f, double inner,
                                         int direction, double first_step, double limit) {
    const double f_inner = f(inner);
    double step = first_step;
    double prev = inner;
    for (int i = 0; i < 2000; ++i) {
        double next = inner + direction * step;
        if ((direction > 0 && next >= limit) || (direction < 0 && next <= limit)) next = limit;
        const double fn = f(next);
        if (!same_sign(fn, f_inner) || fn == 0.0) {
            return direction > 0 ? std::make_pair(prev, next) : std::make_pair(next, prev);
        }
        if (next == limit) break;
        prev = next;
        step *= 2.0;
    }
    throw DomainError("could not bracket a sign change");
}

MinResult golden_section(const std::function<double(double)>& f, double a, double b, double xtol,
                         int max_iter) {
    constexpr double inv_phi = 0.6180339887498948482;
    if (a > b) std::swap(a, b);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while (b - a > xtol * (1.0 + std::abs(c)) && it < max_iter) {
        ++it;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? MinResult{c, fc, it} : MinResult{d, fd, it};
}

MinResult scan_and_refine(const std::function<double(double)>& f, std::span<const double> grid,
                          double xtol) {
    if (grid.empty()) throw DomainError("empty scan grid");
    std::vector<double> values(grid.size());
    std::size_t best = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = std::numeric_limits<double>::infinity();
        try {
            v = f(grid[i]);
        } catch (const Error&) {
        }
        values[i] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        if (std::isfinite(values[i]) && (best == grid.size() || values[i] < values[best])) best = i;
    }
    if (best == grid.size()) throw DomainError("objective is not finite on the scan grid");

    int ties = 0;
    const double tie_tol = 1e-10 * std::max(1.0, std::abs(values[best]));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i + 1 == best || i == best || i == best + 1) continue;
        if (std::abs(values[i] - values[best]) <= tie_tol) ++ties;
    }

    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    MinResult refined = golden_section(f, lo, hi, xtol);
    if (!(refined.fx <= values[best])) refined = {grid[best], values[best], refined.iterations};
    refined.ties = ties;
    return refined;
}

}  // namespace tempstable::roots
