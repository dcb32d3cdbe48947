#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature on finite intervals with
// absolute-error bisection. Enough for the smooth occupancy densities and
// their exponentially tilted integrands.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace gechan {

namespace detail {

// K15 nodes on [-1,1] (symmetric; first 7 odd-indexed ones are the G7 set).
inline constexpr double kK15Nodes[8] = {
    0.000000000000000000000000000000000, 0.207784955007898467600689403773245,
    0.405845151377397166906606412076961, 0.586087235467691130294144838258730,
    0.741531185599394439863864773280788, 0.864864423359769072789712788640926,
    0.949107912342758524526189684047851, 0.991455371120812639206854697526329};
inline constexpr double kK15Weights[8] = {
    0.209482141084727828012999174891714, 0.204432940075298892414161999234649,
    0.190350578064785409913256402421014, 0.169004726639267902826583426598550,
    0.140653259715525918745189590510238, 0.104790010322250183839876322541518,
    0.063092092629978553290700663189204, 0.022935322010529224963732008058970};
inline constexpr double kG7Weights[4] = {
    0.417959183673469387755102040816327, 0.381830050505118944950369775488975,
    0.279705391489276667901467771423780, 0.129484966168869693270611432679082};

struct GkEstimate {
    double integral;
    double error;
};

template <typename F>
GkEstimate gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double f0 = f(c);
    double kron = kK15Weights[0] * f0;
    double gauss = kG7Weights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kK15Nodes[i];
        const double fs = f(c - dx) + f(c + dx);
        kron += kK15Weights[i] * fs;
        if (i % 2 == 0) gauss += kG7Weights[i / 2] * fs;
    }
    kron *= h;
    gauss *= h;
    return {kron, std::fabs(kron - gauss)};
}

template <typename F>
double integrate_rec(const F& f, double a, double b, double tol, int depth) {
    const GkEstimate e = gk15(f, a, b);
    if (e.error <= tol || depth >= 48) return e.integral;
    const double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, 0.5 * tol, depth + 1) +
           integrate_rec(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Integrate f over [a,b] to absolute tolerance abs_tol.
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-9) {
    if (!(a <= b)) throw std::invalid_argument("integrate: a > b");
    if (a == b) return 0.0;
    return detail::integrate_rec(f, a, b, abs_tol, 0);
}

}  // namespace gechan
