#include "lps/line_search.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace lps {

LineSearchResult brent_maximize(const std::function<double(double)>& phi, double a, double b, double c, double fa,
                                double fb, double fc, const LineSearchOptions& opt) {
    constexpr double golden = 0.3819660112501051;
    constexpr double tiny = 1e-21;
    if (a > c) {
        std::swap(a, c);
        std::swap(fa, fc);
    }
    // Minimise g = -phi; x best, w second best, v previous w.
    double x = b, w = b, v = b;
    double gx = -fb, gw = -fb, gv = -fb;
    double d = 0.0, e = 0.0;
    int evals = 0;
    (void)fa;
    (void)fc;
    while (evals < opt.max_evaluations) {
        const double xm = 0.5 * (a + c);
        const double tol1 = opt.rel_tol * std::abs(x) + tiny;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - xm) <= tol2 - 0.5 * (c - a)) break;
        bool golden_step = true;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (gx - gv);
            double q = (x - v) * (gx - gw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (c - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || c - u < tol2) d = xm >= x ? tol1 : -tol1;
                golden_step = false;
            }
        }
        if (golden_step) {
            e = (x >= xm) ? a - x : c - x;
            d = golden * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
        double gu = -phi(u);
        ++evals;
        if (std::isnan(gu)) gu = std::numeric_limits<double>::infinity();
        if (gu <= gx) {
            if (u >= x) a = x; else c = x;
            v = w; gv = gw;
            w = x; gw = gx;
            x = u; gx = gu;
        } else {
            if (u < x) a = u; else c = u;
            if (gu <= gw || w == x) {
                v = w; gv = gw;
                w = u; gw = gu;
            } else if (gu <= gv || v == x || v == w) {
                v = u; gv = gu;
            }
        }
    }
    return {x, -gx, evals, true};
}

LineSearchResult arc_line_search(const std::function<double(double)>& phi, double phi0, double tau0,
                                 const LineSearchOptions& opt) {
    LineSearchResult none{0.0, phi0, 0, false};
    if (!(tau0 > 0.0) || !std::isfinite(tau0) || !std::isfinite(phi0)) return none;
    int evals = 0;
    auto eval = [&](double t) {
        ++evals;
        const double f = phi(t);
        return std::isnan(f) ? -std::numeric_limits<double>::infinity() : f;
    };

    double t1 = tau0;
    double f1 = eval(t1);
    double t0 = 0.0, f0 = phi0;
    double t2 = 0.0, f2 = 0.0;
    if (f1 > phi0) {
        // Expand until the value drops.
        t2 = 2.0 * t1;
        f2 = eval(t2);
        int steps = 0;
        while (f2 > f1 && steps++ < opt.max_bracket_steps) {
            t0 = t1; f0 = f1;
            t1 = t2; f1 = f2;
            t2 = 2.0 * t1;
            f2 = eval(t2);
        }
        if (f2 > f1) return {t2, f2, evals, true};
    } else {
        // Shrink until ascent appears.
        t2 = t1; f2 = f1;
        int steps = 0;
        do {
            t1 = 0.5 * t2;
            f1 = eval(t1);
            if (f1 > phi0) break;
            t2 = t1; f2 = f1;
        } while (++steps < opt.max_bracket_steps);
        if (!(f1 > phi0)) {
            none.evaluations = evals;
            return none;
        }
    }
    LineSearchResult r = brent_maximize(phi, t0, t1, t2, f0, f1, f2, opt);
    r.evaluations += evals;
    if (!(r.value >= f1)) {
        r.tau = t1;
        r.value = f1;
    }
    r.ascent = r.value > phi0;
    if (!r.ascent) return {0.0, phi0, r.evaluations, false};
    return r;
}

}  // namespace lps
