#pragma once

// Gallager-type exponential upper bounds on random-coding decoding failure
// over the Gilbert-Elliott channel, conditioned on the initial and final
// channel states: the per-type exponent, the explicit sum over occupancy
// types, its matrix-power equivalent, and the rare-transition bound built
// from the limiting occupancy MGF. Each is minimized over rho in [0,1].

#include <cmath>
#include <functional>
#include <stdexcept>

#include "gechan/markov.hpp"
#include "gechan/special_functions.hpp"

namespace gechan {

// Block length and rate in nats/symbol; the ensemble has M = e^{NR}
// codewords drawn i.i.d. uniform.
struct CodeParams {
    int n = 0;
    double rate_nats = 0.0;

    double codebook_size() const { return std::exp(double(n) * rate_nats); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("CodeParams: n must be >= 1");
        if (!(rate_nats > 0.0)) throw std::invalid_argument("CodeParams: rate must be positive");
    }
};

// Per-state Gallager function for uniform binary input,
//   G_s(rho) = 2^{-rho} (eps^{1/(1+rho)} + (1-eps)^{1/(1+rho)})^{1+rho}.
// G_s(0) = 1 and G_s is in (0,1] on [0,1].
inline double gallager_g(double eps, double rho) {
    const double e = 1.0 / (1.0 + rho);
    return std::exp2(-rho) * std::pow(std::pow(eps, e) + std::pow(1.0 - eps, e), 1.0 + rho);
}

// Per-type exponent E_0(rho, eta_g) = -(ln G_b + eta_g ln(G_g/G_b));
// linear in the good-state fraction eta_g.
inline double e0_type(double rho, double eta_g, const ChannelParams& p) {
    const double lgg = std::log(gallager_g(p.eps_g, rho));
    const double lgb = std::log(gallager_g(p.eps_b, rho));
    return -(lgb + eta_g * (lgg - lgb));
}

// Type-sum bound at fixed rho: entry (s0,sN) =
//   sum_m G_g^m G_b^{N-m} e^{rho N R} Pr(n_g=m, sN | s0),
// accumulated in log domain.
inline Mat2 bound_typesum(const ChannelParams& p, const CodeParams& code, double rho,
                          const OccupancyTable& occ) {
    p.validate();
    code.validate();
    const int n = code.n;
    const double lgg = std::log(gallager_g(p.eps_g, rho));
    const double lgb = std::log(gallager_g(p.eps_b, rho));
    const double lrate = rho * double(n) * code.rate_nats;
    Mat2 out;
    for (State s0 : kStates) {
        for (State sN : kStates) {
            double acc = -std::numeric_limits<double>::infinity();
            for (int m = 0; m <= n; ++m) {
                const double pm = occ(m, s0, sN);
                if (pm <= 0.0) continue;
                acc = log_add(acc, double(m) * lgg + double(n - m) * lgb + std::log(pm));
            }
            out(s0, sN) = std::exp(acc + lrate);
        }
    }
    return out;
}

inline Mat2 bound_typesum(const ChannelParams& p, const CodeParams& code, double rho) {
    return bound_typesum(p, code, rho, occupancy_pmf(p, code.n));
}

// Matrix-power form of the same bound: entry (s0,sN) of A^N e^{rho N R}
// with a(c,d) = P(d|c) G_c(rho). A is entrywise <= 1 and substochastic, so
// repeated squaring in the linear domain cannot overflow; the rate factor
// is applied in log domain.
inline Mat2 bound_matrixpower(const ChannelParams& p, const CodeParams& code, double rho) {
    p.validate();
    code.validate();
    const double gg = gallager_g(p.eps_g, rho);
    const double gb = gallager_g(p.eps_b, rho);
    Mat2 a;
    a.m[0][0] = (1.0 - p.alpha) * gg;
    a.m[0][1] = p.alpha * gg;
    a.m[1][0] = p.beta * gb;
    a.m[1][1] = (1.0 - p.beta) * gb;
    const Mat2 an = mat2_pow(a, code.n);
    const double lrate = rho * double(code.n) * code.rate_nats;
    Mat2 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.m[i][j] = an.m[i][j] <= 0.0 ? 0.0 : std::exp(std::log(an.m[i][j]) + lrate);
    return out;
}

// Rare-transition bound: entry (c,d) =
//   e^{N(ln G_b + rho R)} * MGF_{cd}(N ln(G_g/G_b))
// where the MGF matrix is exp([y-a, a; b, -b]) with the rate constants
// a = N alpha_N, b = N beta_N held fixed as N grows.
inline Mat2 bound_rare(double alpha_rate, double beta_rate, double eps_g, double eps_b,
                       const CodeParams& code, double rho) {
    const double lgg = std::log(gallager_g(eps_g, rho));
    const double lgb = std::log(gallager_g(eps_b, rho));
    const double y = double(code.n) * (lgg - lgb);
    const Mat2 mgf = mgf_matrix(alpha_rate, beta_rate, y);
    const double lpref = double(code.n) * (lgb + rho * code.rate_nats);
    Mat2 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.m[i][j] = mgf.m[i][j] <= 0.0 ? 0.0 : std::exp(std::log(mgf.m[i][j]) + lpref);
    return out;
}

struct RhoMinimum {
    double rho_star = 0.0;
    double value = 0.0;
};

// Minimize a bound objective over rho in [0,1]: 201-point coarse grid, then
// golden-section refinement of the bracketing interval down to width 1e-6.
// Returns the smallest value observed; any rho gives a valid upper bound,
// so residual approximation error only loosens the result.
inline RhoMinimum minimize_rho(const std::function<double(double)>& objective) {
    constexpr int kGrid = 201;
    double best_rho = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGrid; ++i) {
        const double rho = double(i) / double(kGrid - 1);
        const double v = objective(rho);
        if (!std::isfinite(v))
            throw std::runtime_error("minimize_rho: objective not finite at rho=" +
                                     std::to_string(rho));
        if (v < best_val) {
            best_val = v;
            best_rho = rho;
        }
    }
    const double h = 1.0 / double(kGrid - 1);
    double lo = std::max(0.0, best_rho - h), hi = std::min(1.0, best_rho + h);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 1e-6) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = objective(x2);
        }
        if (f1 < best_val) {
            best_val = f1;
            best_rho = x1;
        }
        if (f2 < best_val) {
            best_val = f2;
            best_rho = x2;
        }
    }
    return {best_rho, best_val};
}

// Whether rho is minimized for each (s0,sN) entry independently (tighter;
// reproduces the published curves) or once for the stationary-averaged
// scalar.
enum class RhoOptimization { per_entry, averaged };

// Minimized bound: per-transition table, the minimizing rho of the
// averaged objective, and the stationary-weighted final-state-summed
// scalar. Values are not clamped; presentation may cap at 1.
struct BoundResult {
    Mat2 per_transition;  // entry (s0,sN), each at its own rho* in per_entry mode
    Mat2 rho_entries;     // per-entry minimizers
    double rho_star = 0.0;  // minimizer of the averaged objective
    double averaged = 0.0;  // sum_{s0} pi_{s0} sum_{sN} per_transition
};

inline BoundResult minimize_bound(const std::function<Mat2(double)>& table_at_rho,
                                  double pi_g, RhoOptimization opt) {
    const double pi_b = 1.0 - pi_g;
    auto averaged_of = [&](const Mat2& t) {
        return pi_g * (t.m[0][0] + t.m[0][1]) + pi_b * (t.m[1][0] + t.m[1][1]);
    };
    BoundResult r;
    const RhoMinimum avg = minimize_rho([&](double rho) { return averaged_of(table_at_rho(rho)); });
    r.rho_star = avg.rho_star;
    if (opt == RhoOptimization::averaged) {
        r.per_transition = table_at_rho(avg.rho_star);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.rho_entries.m[i][j] = avg.rho_star;
        r.averaged = avg.value;
        return r;
    }
    for (State s0 : kStates) {
        for (State sN : kStates) {
            const RhoMinimum e =
                minimize_rho([&](double rho) { return table_at_rho(rho)(s0, sN); });
            r.per_transition(s0, sN) = e.value;
            r.rho_entries(s0, sN) = e.rho_star;
        }
    }
    r.averaged = averaged_of(r.per_transition);
    return r;
}

}  // namespace gechan
