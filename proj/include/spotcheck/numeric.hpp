#pragma once

#include <cmath>
#include <utility>

namespace spotcheck::numeric {

// Golden-section maximization of f on [a, c]. Stops when the bracket width
// falls below tol or after max_iter steps. Returns (argmax, max).
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double c, double tol, int max_iter = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c - inv_phi * (c - a);
    double x2 = a + inv_phi * (c - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter && (c - a) > tol; ++it) {
        if (f1 >= f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = f(x2);
        }
    }
    return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Bisection for an increasing function g with g(lo) <= 0 < g(hi).
template <class G>
double bisect_increasing(G&& g, double lo, double hi, double tol, int max_iter = 200) {
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace spotcheck::numeric
