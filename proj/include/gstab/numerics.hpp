#pragma once

#include <functional>
#include <vector>

// Shared numerical primitives: adaptive quadrature, bracketed root finding,
// and an adaptive explicit ODE step. All routines are deterministic and keep
// relative error under explicit control; they throw std::runtime_error when a
// tolerance cannot be met within the iteration budget.

namespace gstab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;     // achieved absolute error estimate
    int evaluations = 0;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b]; a > b is allowed and flips the sign.
// Stops when the per-interval error sum satisfies abs_tol + rel_tol*|value|.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12, double abs_tol = 1e-300);

// Convenience wrapper returning just the value.
double integrate_value(const std::function<double(double)>& f, double a, double b,
                       double rel_tol = 1e-12, double abs_tol = 1e-300);

// Brent root finding on a bracketing interval [lo, hi] with f(lo), f(hi) of
// opposite sign (either may be zero). Converges to |interval| <= x_tol.
double brent(const std::function<double(double)>& f, double lo, double hi,
             double x_tol, int max_iter = 200);

struct OdeResult {
    std::vector<double> times;
    std::vector<double> values;
    bool blew_up = false;   // integration stopped on a magnitude guard
    double final_value = 0.0;
};

// Adaptive Cash-Karp RK45 for a scalar ODE u' = f(s, u) from s0 to s1.
// Local error controlled against abs_tol + rel_tol*|u|; the interval is
// integrated as given (no internal breakpoint knowledge, callers split).
// Solutions exceeding blowup_guard in magnitude stop early with blew_up set.
OdeResult integrate_ode(const std::function<double(double, double)>& f,
                        double s0, double s1, double u0,
                        double rel_tol = 1e-10, double abs_tol = 1e-14,
                        double blowup_guard = 1e15,
                        bool record_curve = false);

}  // namespace gstab
