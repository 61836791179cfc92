#include "edgelab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace edgelab {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double recurse(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double whole,
               const QuadratureOptions& opt, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= opt.local_tol || (b - a) <= opt.min_panel)
        return left + right + err;
    if (depth >= opt.max_depth)
        throw std::runtime_error("adaptive_simpson: refinement limit reached");
    return recurse(f, a, m, fa, flm, fm, left, opt, depth + 1) +
           recurse(f, m, b, fm, frm, fb, right, opt, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opt) {
    if (a == b) return 0.0;
    // seed with a handful of panels so oscillation is not missed at the top level
    const int seed_panels = 8;
    double total = 0;
    const double h = (b - a) / seed_panels;
    for (int i = 0; i < seed_panels; ++i) {
        const double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        const double f0 = f(x0), f1 = f(x1), fm = f(xm);
        total += recurse(f, x0, x1, f0, fm, f1, simpson(f0, fm, f1, h), opt, 0);
    }
    return total;
}

}  // namespace edgelab
