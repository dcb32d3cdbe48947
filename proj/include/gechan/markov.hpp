#pragma once

// Two-state Markov chain machinery for the Gilbert-Elliott channel: the
// stationary law, the exact joint PMF of good-state occupancy and final
// state, the polynomial generating-matrix extraction of the same PMF, an
// exhaustive path-enumeration oracle, and the rare-transition (CTMC) limit
// with its Bessel-function densities and matrix moment generating function.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gechan/quadrature.hpp"
#include "gechan/special_functions.hpp"

namespace gechan {

enum class State : int { good = 0, bad = 1 };

inline constexpr State kStates[2] = {State::good, State::bad};
inline constexpr int idx(State s) { return static_cast<int>(s); }

// Gilbert-Elliott channel parameters. alpha is the good->bad transition
// probability, beta the bad->good one; eps_* are the per-state crossover
// probabilities with eps_g <= eps_b by labeling convention.
struct ChannelParams {
    double alpha = 0.0;
    double beta = 0.0;
    double eps_g = 0.0;
    double eps_b = 0.0;

    double eps(State s) const { return s == State::good ? eps_g : eps_b; }

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(alpha) || !in01(beta))
            throw std::invalid_argument("ChannelParams: transition probabilities outside [0,1]");
        if (eps_g < 0.0 || eps_b < 0.0 || eps_g >= 0.5 || eps_b >= 0.5)
            throw std::invalid_argument("ChannelParams: crossover probabilities outside [0,0.5)");
        if (eps_g > eps_b)
            throw std::invalid_argument("ChannelParams: eps_g > eps_b violates state labeling");
    }
};

// Dense 2x2 real matrix, indexed by (from, to) states.
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    double& operator()(State r, State c) { return m[idx(r)][idx(c)]; }
    double operator()(State r, State c) const { return m[idx(r)][idx(c)]; }
    double& at(int r, int c) { return m[r][c]; }
    double at(int r, int c) const { return m[r][c]; }

    static Mat2 identity() {
        Mat2 e;
        e.m[0][0] = e.m[1][1] = 1.0;
        return e;
    }
};

inline Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
    Mat2 c;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            c.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return c;
}

inline Mat2 mat2_pow(Mat2 a, std::int64_t n) {
    Mat2 r = Mat2::identity();
    while (n > 0) {
        if (n & 1) r = mat2_mul(r, a);
        a = mat2_mul(a, a);
        n >>= 1;
    }
    return r;
}

inline Mat2 transition_matrix(const ChannelParams& p) {
    Mat2 t;
    t.m[0][0] = 1.0 - p.alpha;
    t.m[0][1] = p.alpha;
    t.m[1][0] = p.beta;
    t.m[1][1] = 1.0 - p.beta;
    return t;
}

// Stationary distribution (pi_g, pi_b) = (beta, alpha)/(alpha+beta).
inline std::pair<double, double> stationary(const ChannelParams& p) {
    const double s = p.alpha + p.beta;
    if (s <= 0.0) throw std::invalid_argument("stationary: alpha + beta must be positive");
    return {p.beta / s, p.alpha / s};
}

// Which slots the occupancy count n_g refers to. The emission convention
// counts s_0..s_{N-1}, the states that govern the N transmitted symbols;
// it is the convention consistent with the generating matrix (x multiplies
// rows leaving the good state). The trailing convention counts s_1..s_N.
enum class OccupancyConvention { emission_slots, trailing_slots };

// Joint PMF Pr(n_g = m, s_N = d | s_0 = c), m = 0..N.
struct OccupancyTable {
    int n = 0;
    std::vector<double> p;  // (n+1) * 4, index (m, s0, sN)

    explicit OccupancyTable(int n_) : n(n_), p(static_cast<size_t>(n_ + 1) * 4, 0.0) {}

    double& at(int m, State s0, State sN) {
        return p[static_cast<size_t>(m) * 4 + idx(s0) * 2 + idx(sN)];
    }
    double operator()(int m, State s0, State sN) const {
        return p[static_cast<size_t>(m) * 4 + idx(s0) * 2 + idx(sN)];
    }

    // Marginal over m: row c of P^N.
    double final_state_marginal(State s0, State sN) const {
        double acc = 0.0;
        for (int m = 0; m <= n; ++m) acc += (*this)(m, s0, sN);
        return acc;
    }
    double conditional_mass(State s0) const {
        return final_state_marginal(s0, State::good) + final_state_marginal(s0, State::bad);
    }
};

namespace detail {

// ln sum_{k=0}^{min(p,q)} C(p,k) C(q,k) lam^k, streamed in linear domain
// with exponent rescaling (terms are all nonnegative).
inline double hyp_sum_log(std::int64_t p, std::int64_t q, double lam) {
    if (p < 0 || q < 0) return -std::numeric_limits<double>::infinity();
    const std::int64_t kmax = std::min(p, q);
    double term = 1.0, sum = 1.0, shift = 0.0;
    for (std::int64_t k = 0; k < kmax; ++k) {
        term *= double(p - k) * double(q - k) * lam / (double(k + 1) * double(k + 1));
        sum += term;
        if (sum > 1e250) {
            sum *= 1e-250;
            term *= 1e-250;
            shift += 250.0 * std::log(10.0);
        }
    }
    return shift + std::log(sum);
}

// ln sum_{k>=1} C(p,k-1) C(q,k) lam^k  (used for the hypergeometric
// differences in the diagonal occupancy entries, rewritten by the Pascal
// identity into a single nonnegative series).
inline double hyp_shift_sum_log(std::int64_t p, std::int64_t q, double lam) {
    if (p < 0 || q < 1) return -std::numeric_limits<double>::infinity();
    const std::int64_t jmax = std::min(p, q - 1);  // j = k-1
    double term = double(q) * lam;                 // j = 0: C(p,0) C(q,1) lam
    double sum = term, shift = 0.0;
    for (std::int64_t j = 0; j < jmax; ++j) {
        term *= double(p - j) * double(q - 1 - j) * lam /
                (double(j + 1) * double(j + 2));
        sum += term;
        if (sum > 1e250) {
            sum *= 1e-250;
            term *= 1e-250;
            shift += 250.0 * std::log(10.0);
        }
    }
    return shift + std::log(sum);
}

// Closed-form Pr(n_g = m, s_N | s_0) under the emission-slot convention,
// valid for interior alpha, beta. Out-of-range m yields 0.
inline double emission_entry(const ChannelParams& cp, int n, int m, State s0, State sN) {
    if (m < 0 || m > n) return 0.0;
    const double a = cp.alpha, b = cp.beta;
    const double la = std::log1p(-a), lb = std::log1p(-b);
    const double lam = a * b / ((1.0 - a) * (1.0 - b));
    if (s0 == State::good) {
        if (m == 0) return 0.0;  // s_0 itself occupies one good slot
        if (m == n)
            return sN == State::good ? std::exp(double(n) * la)
                                     : std::exp(double(n - 1) * la + std::log(a));
        if (sN == State::good)
            return std::exp(double(m) * la + double(n - m) * lb +
                            hyp_shift_sum_log(n - m - 1, m, lam));
        return std::exp(double(m - 1) * la + double(n - m) * lb + std::log(a) +
                        hyp_sum_log(n - m, m - 1, lam));
    }
    if (m == n) return 0.0;
    if (m == 0)
        return sN == State::bad ? std::exp(double(n) * lb)
                                : std::exp(double(n - 1) * lb + std::log(b));
    if (sN == State::good)
        return std::exp(double(m) * la + double(n - m - 1) * lb + std::log(b) +
                        hyp_sum_log(n - m - 1, m, lam));
    return std::exp(double(m) * la + double(n - m) * lb +
                    hyp_shift_sum_log(m - 1, n - m, lam));
}

}  // namespace detail

OccupancyTable occupancy_pmf_genmatrix(const ChannelParams& p, int n,
                                       OccupancyConvention convention =
                                           OccupancyConvention::emission_slots);

// Exact joint occupancy/final-state PMF from the hypergeometric closed
// forms. Boundary transition probabilities (alpha or beta in {0,1}) are
// routed through the generating-matrix method, where the closed form's
// lambda is undefined.
inline OccupancyTable occupancy_pmf(const ChannelParams& p, int n,
                                    OccupancyConvention convention =
                                        OccupancyConvention::emission_slots) {
    if (n < 1) throw std::invalid_argument("occupancy_pmf: n must be >= 1");
    if (p.alpha <= 0.0 || p.alpha >= 1.0 || p.beta <= 0.0 || p.beta >= 1.0)
        return occupancy_pmf_genmatrix(p, n, convention);
    OccupancyTable t(n);
    for (int m = 0; m <= n; ++m) {
        for (State s0 : kStates) {
            for (State sN : kStates) {
                // The trailing convention (n_g over s_1..s_N) relates to
                // the emission one by n'_g = n_g - 1{s_0=g} + 1{s_N=g}.
                int me = m;
                if (convention == OccupancyConvention::trailing_slots) {
                    if (s0 == State::good && sN == State::bad) me = m + 1;
                    if (s0 == State::bad && sN == State::good) me = m - 1;
                }
                t.at(m, s0, sN) = detail::emission_entry(p, n, me, s0, sN);
            }
        }
    }
    return t;
}

// Same PMF by expanding the N-th power of the polynomial-entry matrix
//   G_g(x) = [(1-a)x, a x; b, 1-b]
// (emission convention: x marks transitions out of the good state). The
// trailing convention instead marks transitions INTO the good state,
// G'(x) = [(1-a)x, a; b x, 1-b]. Valid for all alpha, beta in [0,1].
inline OccupancyTable occupancy_pmf_genmatrix(const ChannelParams& p, int n,
                                              OccupancyConvention convention) {
    if (n < 1) throw std::invalid_argument("occupancy_pmf_genmatrix: n must be >= 1");
    using Poly = std::vector<double>;
    const size_t len = static_cast<size_t>(n) + 1;
    auto mul = [len](const Poly& x, const Poly& y) {
        Poly r(len, 0.0);
        for (size_t i = 0; i < len && i < x.size(); ++i) {
            if (x[i] == 0.0) continue;
            const size_t jmax = std::min(y.size(), len - i);
            for (size_t j = 0; j < jmax; ++j) r[i + j] += x[i] * y[j];
        }
        return r;
    };
    using PolyMat = std::array<Poly, 4>;
    auto matmul = [&](const PolyMat& x, const PolyMat& y) {
        PolyMat r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Poly acc = mul(x[i * 2 + 0], y[0 * 2 + j]);
                Poly t2 = mul(x[i * 2 + 1], y[1 * 2 + j]);
                for (size_t k = 0; k < len; ++k) acc[k] += t2[k];
                r[i * 2 + j] = std::move(acc);
            }
        return r;
    };

    PolyMat base;
    if (convention == OccupancyConvention::emission_slots) {
        base[0] = {0.0, 1.0 - p.alpha};  // (g,g): (1-a) x
        base[1] = {0.0, p.alpha};        // (g,b): a x
        base[2] = {p.beta};              // (b,g): b
        base[3] = {1.0 - p.beta};        // (b,b): 1-b
    } else {
        base[0] = {0.0, 1.0 - p.alpha};  // (g,g): (1-a) x
        base[1] = {p.alpha};             // (g,b): a
        base[2] = {0.0, p.beta};         // (b,g): b x
        base[3] = {1.0 - p.beta};        // (b,b): 1-b
    }
    PolyMat acc = {Poly{1.0}, Poly{}, Poly{}, Poly{1.0}};
    PolyMat sq = base;
    int e = n;
    while (e > 0) {
        if (e & 1) acc = matmul(acc, sq);
        e >>= 1;
        if (e > 0) sq = matmul(sq, sq);
    }

    OccupancyTable t(n);
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
            const Poly& poly = acc[c * 2 + d];
            for (size_t m = 0; m < poly.size(); ++m)
                t.at(static_cast<int>(m), kStates[c], kStates[d]) = poly[m];
        }
    return t;
}

// Ground-truth oracle: sum the probability of every state path explicitly.
// Exponential in n, so refuse beyond n = 20.
inline OccupancyTable enumerate_paths_oracle(const ChannelParams& p, int n,
                                             OccupancyConvention convention =
                                                 OccupancyConvention::emission_slots) {
    if (n < 1) throw std::invalid_argument("enumerate_paths_oracle: n must be >= 1");
    if (n > 20) throw std::invalid_argument("enumerate_paths_oracle: n > 20 refused (2^n paths)");
    const Mat2 tr = transition_matrix(p);
    OccupancyTable t(n);
    for (int s0i = 0; s0i < 2; ++s0i) {
        for (std::uint32_t path = 0; path < (1u << n); ++path) {
            double prob = 1.0;
            int prev = s0i;
            int ng = 0;
            for (int step = 0; step < n; ++step) {
                const int s = (path >> step) & 1;  // state s_{step+1}
                prob *= tr.at(prev, s);
                if (convention == OccupancyConvention::emission_slots) {
                    if (prev == 0) ++ng;  // s_step governs symbol step+1
                } else {
                    if (s == 0) ++ng;
                }
                prev = s;
            }
            if (prob > 0.0) t.at(ng, kStates[s0i], kStates[prev]) += prob;
        }
    }
    return t;
}

// Rare-transition limit of the occupancy law. alpha_rate and beta_rate are
// the constants N*alpha_N and N*beta_N; x is the fractional good-state
// occupancy over a unit time horizon. The law has a point mass e^{-alpha}
// at x = 1 for (g|g) (no transition ever fires) and e^{-beta} at x = 0 for
// (b|b), plus absolutely continuous Bessel parts.
struct OccupancyDensity {
    double alpha_rate = 0.0;
    double beta_rate = 0.0;
    double atom_at_1 = 0.0;  // delta(1-x) mass in the (g|g) component
    double atom_at_0 = 0.0;  // delta(x) mass in the (b|b) component

    double atom(State s0, State sN) const {
        if (s0 == State::good && sN == State::good) return atom_at_1;
        if (s0 == State::bad && sN == State::bad) return atom_at_0;
        return 0.0;
    }

    // Continuous part of f(x, sN | s0) on (0,1); endpoint-safe.
    double density(double x, State s0, State sN) const {
        const double a = alpha_rate, b = beta_rate;
        const double envelope = std::exp(-a * x - b * (1.0 - x));
        const double z = 2.0 * std::sqrt(a * b * x * (1.0 - x));
        if (s0 == State::good && sN == State::bad) return a * envelope * bessel_i(0, z);
        if (s0 == State::bad && sN == State::good) return b * envelope * bessel_i(0, z);
        if (s0 == State::good)  // (g,g): sqrt(ab x/(1-x)) I1(z) = ab x * I1(z)/(z/2)
            return envelope * a * b * x * bessel_i1_ratio(z);
        return envelope * a * b * (1.0 - x) * bessel_i1_ratio(z);
    }

    // Sub-CDF of the (s0,sN) component, atoms included.
    double cdf(double x, State s0, State sN, double tol = 1e-10) const {
        if (x <= 0.0)
            return (s0 == State::bad && sN == State::bad && x >= 0.0) ? atom_at_0 : 0.0;
        const double xc = std::min(x, 1.0);
        double acc = integrate([&](double u) { return density(u, s0, sN); }, 0.0, xc, tol);
        if (s0 == State::bad && sN == State::bad) acc += atom_at_0;
        if (s0 == State::good && sN == State::good && x >= 1.0) acc += atom_at_1;
        return acc;
    }
};

inline OccupancyDensity occupancy_density_ctmc(double alpha_rate, double beta_rate) {
    if (alpha_rate <= 0.0 || beta_rate <= 0.0)
        throw std::invalid_argument("occupancy_density_ctmc: rates must be positive");
    OccupancyDensity d;
    d.alpha_rate = alpha_rate;
    d.beta_rate = beta_rate;
    d.atom_at_1 = std::exp(-alpha_rate);
    d.atom_at_0 = std::exp(-beta_rate);
    return d;
}

// Matrix moment generating function of the limiting occupancy law:
//   G_{cd}(y) = E[e^{yX} 1{S_end=d} | S_start=c] = exp(A),
//   A = [y-a, a; b, -b].
// Closed form via Cayley-Hamilton: with mu = tr(A)/2 and
// s = sqrt((y+b-a)^2 + 4ab)/2 (the discriminant is a sum of squares, so the
// eigenvalues mu +- s are always real),
//   exp(A) = e^mu [cosh(s) I + sinhc(s) (A - mu I)].
// The sinhc series keeps the near-coincident eigenvalue case exact.
inline Mat2 mgf_matrix(double alpha_rate, double beta_rate, double y) {
    const double a = alpha_rate, b = beta_rate;
    const double mu = 0.5 * (y - a - b);
    const double s = 0.5 * std::sqrt((y + b - a) * (y + b - a) + 4.0 * a * b);
    double cosh_term, sinhc_term;  // e^mu cosh(s), e^mu sinh(s)/s
    if (s >= 0.5) {
        const double e1 = std::exp(mu + s), e2 = std::exp(mu - s);
        cosh_term = 0.5 * (e1 + e2);
        sinhc_term = 0.5 * (e1 - e2) / s;
    } else {
        const double emu = std::exp(mu);
        double term = 1.0, acc = 1.0;
        const double s2 = s * s;
        for (int k = 1; k < 40; ++k) {
            term *= s2 / (double(2 * k) * double(2 * k + 1));
            acc += term;
            if (term < acc * 1e-17) break;
        }
        sinhc_term = emu * acc;
        cosh_term = emu * std::cosh(s);
    }
    Mat2 e;
    e.m[0][0] = cosh_term + sinhc_term * ((y - a) - mu);
    e.m[0][1] = sinhc_term * a;
    e.m[1][0] = sinhc_term * b;
    e.m[1][1] = cosh_term + sinhc_term * (-b - mu);
    return e;
}

}  // namespace gechan
