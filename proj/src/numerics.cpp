#include "gstab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace gstab {

namespace {

// Gauss-Kronrod 15-point nodes and weights on [-1, 1] (positive half).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double result_gauss = 0.0;
    double result_kronrod = kWgk[7] * f(center);
    result_gauss += kWg[3] * f(center);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        result_kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) result_gauss += kWg[j / 2] * fsum;
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = result_kronrod * half;
    const double diff = (result_kronrod - result_gauss) * half;
    p.error = std::pow(200.0 * std::abs(diff), 1.5);
    if (!std::isfinite(p.error)) p.error = std::abs(diff);
    p.error = std::max(p.error, std::abs(diff) * 1e-6);
    return p;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, double abs_tol) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate: non-finite endpoint");
    QuadResult out;
    if (a == b) return out;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }

    std::priority_queue<Panel> heap;
    Panel root = evaluate_panel(f, a, b);
    out.evaluations = 15;
    double total = root.value;
    double total_err = root.error;
    heap.push(root);

    const int max_panels = 4000;
    int panels = 1;
    while (total_err > abs_tol + rel_tol * std::abs(total) && panels < max_panels) {
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at floating point resolution, keep its estimate
            worst.error = 0.0;
            heap.push(worst);
            bool all_floored = true;
            // recompute error sum below
            total_err = 0.0;
            std::priority_queue<Panel> copy = heap;
            while (!copy.empty()) {
                total_err += copy.top().error;
                if (copy.top().error > 0.0) all_floored = false;
                copy.pop();
            }
            if (all_floored) break;
            continue;
        }
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }

    if (!std::isfinite(total))
        throw std::runtime_error("integrate: non-finite integral");
    out.value = sign * total;
    out.error = std::max(total_err, 0.0);
    return out;
}

double integrate_value(const std::function<double(double)>& f, double a, double b,
                       double rel_tol, double abs_tol) {
    return integrate(f, a, b, rel_tol, abs_tol).value;
}

double brent(const std::function<double(double)>& f, double lo, double hi,
             double x_tol, int max_iter) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("brent: endpoints do not bracket a root");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 2.22e-16 * std::abs(b) + 0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw std::runtime_error("brent: iteration budget exhausted");
}

OdeResult integrate_ode(const std::function<double(double, double)>& f,
                        double s0, double s1, double u0,
                        double rel_tol, double abs_tol,
                        double blowup_guard, bool record_curve) {
    // Cash-Karp embedded 4(5) pair.
    static constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.6, c5 = 1.0, c6 = 0.875;
    static constexpr double a21 = 0.2;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 0.3, a42 = -0.9, a43 = 1.2;
    static constexpr double a51 = -11.0 / 54.0, a52 = 2.5, a53 = -70.0 / 27.0,
                            a54 = 35.0 / 27.0;
    static constexpr double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0,
                            a63 = 575.0 / 13824.0, a64 = 44275.0 / 110592.0,
                            a65 = 253.0 / 4096.0;
    static constexpr double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0,
                            b4 = 125.0 / 594.0, b6 = 512.0 / 1771.0;
    static constexpr double e1 = 37.0 / 378.0 - 2825.0 / 27648.0,
                            e3 = 250.0 / 621.0 - 18575.0 / 48384.0,
                            e4 = 125.0 / 594.0 - 13525.0 / 55296.0,
                            e5 = -277.0 / 14336.0, e6 = 512.0 / 1771.0 - 0.25;

    OdeResult out;
    double s = s0;
    double u = u0;
    if (record_curve) {
        out.times.push_back(s);
        out.values.push_back(u);
    }
    const double span = s1 - s0;
    if (span == 0.0) {
        out.final_value = u;
        return out;
    }
    const double dir = span > 0.0 ? 1.0 : -1.0;
    double h = span * 0.01;
    const double h_min = std::abs(span) * 1e-14;
    int steps = 0;
    const int max_steps = 2'000'000;
    while (dir * (s1 - s) > 0.0) {
        if (++steps > max_steps)
            throw std::runtime_error("integrate_ode: step budget exhausted");
        if (dir * (s + h - s1) > 0.0) h = s1 - s;
        const double k1 = f(s, u);
        const double k2 = f(s + c2 * h, u + h * a21 * k1);
        const double k3 = f(s + c3 * h, u + h * (a31 * k1 + a32 * k2));
        const double k4 = f(s + c4 * h, u + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = f(s + c5 * h, u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 = f(s + c6 * h,
                            u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double u5 = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
        const double err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6));
        const double scale = abs_tol + rel_tol * std::max(std::abs(u), std::abs(u5));
        if (!std::isfinite(u5) || std::abs(u5) > blowup_guard) {
            out.blew_up = true;
            out.final_value = u5;
            return out;
        }
        if (err <= scale || std::abs(h) <= h_min) {
            s += h;
            u = u5;
            if (record_curve) {
                out.times.push_back(s);
                out.values.push_back(u);
            }
            const double grow = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::max(0.9 * std::pow(scale / err, 0.25), 0.1);
        }
    }
    out.final_value = u;
    return out;
}

}  // namespace gstab
