#pragma once

// Exact random-coding failure probabilities. BSC: the Fano tie-as-error
// expression and its tie-corrected refinement. Gilbert-Elliott with the
// state known at the receiver: minimum-distance and maximum-likelihood
// decoding, conditioned on the good-state occupancy and averaged with the
// exact joint occupancy law. A third conditional, the union-bound cap
// min(1, (M-1)q), reproduces published curves and upper-bounds the
// tie-as-error value.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gechan/bounds.hpp"
#include "gechan/markov.hpp"
#include "gechan/special_functions.hpp"

namespace gechan {

enum class DecodeRule { minimum_distance, maximum_likelihood };

enum class TiePolicy {
    error,              // any tie counts as failure (Fano)
    random_among_best,  // uniform choice among the minimizing codewords
    union_bound,        // expected number of competitors in the ball, capped at 1
};

struct DecoderSpec {
    DecodeRule rule = DecodeRule::minimum_distance;
    TiePolicy ties = TiePolicy::error;
};

// Bad-state errors are discounted by 1/gamma under ML decoding with known
// state: gamma = ln(eps_g/(1-eps_g)) / ln(eps_b/(1-eps_b)) >= 1.
inline double ml_gamma(double eps_g, double eps_b) {
    if (eps_g == eps_b) return 1.0;
    if (!(eps_g > 0.0 && eps_g < 0.5 && eps_b > 0.0 && eps_b < 0.5))
        throw std::invalid_argument("ml_gamma: ML decoding needs eps in (0, 1/2)");
    return (std::log(eps_g) - std::log1p(-eps_g)) / (std::log(eps_b) - std::log1p(-eps_b));
}

// ceil(gamma*e) with an exact-integer snap: values within 1e-12 of an
// integer are taken as that integer so floating-point dust cannot bump the
// score up a level.
inline int gamma_ceil(double gamma, int e) {
    const double x = gamma * double(e);
    const double r = std::round(x);
    if (std::fabs(x - r) < 1e-12 * std::max(1.0, std::fabs(x))) return int(r);
    return int(std::ceil(x));
}

// ln of the Hamming ball cardinality sum_{j<=radius} C(n,j); radius >= n is
// the whole space, exactly n ln 2.
inline LogReal ball_size_md(int n, int radius) {
    if (n < 0 || radius < 0) throw std::invalid_argument("ball_size_md: negative argument");
    if (radius >= n) return LogReal::from_log(double(n) * std::log(2.0));
    double acc = 0.0;  // j = 0 term
    for (int j = 1; j <= radius; ++j) acc = log_add(acc, log_binomial(n, j).log);
    return LogReal::from_log(acc);
}

namespace detail {

constexpr double kLn2 = 0.6931471805599453;

// Cumulative Hamming-ball logs for one block length.
struct BscBallTable {
    int n;
    std::vector<double> log_shell;  // ln C(n,tau)
    std::vector<double> log_ball;   // ln sum_{j<=tau} C(n,j), capped at n ln 2

    explicit BscBallTable(int n_, const LogFactorials& lf) : n(n_) {
        log_shell.resize(n + 1);
        log_ball.resize(n + 1);
        double acc = -std::numeric_limits<double>::infinity();
        for (int t = 0; t <= n; ++t) {
            log_shell[t] = lf.binomial(n, t);
            acc = log_add(acc, log_shell[t]);
            log_ball[t] = std::min(acc, double(n) * kLn2);
        }
    }
};

// Weighted-ball logs for ML scores ceil(gamma i) + j over (good, bad) error
// splits, for one value of n_g. Building the table costs O(n_g n_b); after
// that a sweep over every threshold C is O(1) per lookup.
struct MlBallTable {
    int n;
    int c_max;
    std::vector<double> log_shell;  // ln sum_{score == C} C(n_g,i) C(n_b,j)
    std::vector<double> log_ball;   // ln sum_{score <= C} ..., capped at n ln 2

    MlBallTable(int n_g, int n_b, double gamma, const LogFactorials& lf)
        : n(n_g + n_b), c_max(gamma_ceil(gamma, n_g) + n_b) {
        log_shell.assign(c_max + 1, -std::numeric_limits<double>::infinity());
        log_ball.assign(c_max + 1, 0.0);
        for (int i = 0; i <= n_g; ++i) {
            const int ci = gamma_ceil(gamma, i);
            const double lgi = lf.binomial(n_g, i);
            for (int j = 0; j <= n_b; ++j) {
                const int s = ci + j;
                log_shell[s] = log_add(log_shell[s], lgi + lf.binomial(n_b, j));
            }
        }
        double acc = -std::numeric_limits<double>::infinity();
        for (int c = 0; c <= c_max; ++c) {
            acc = log_add(acc, log_shell[c]);
            log_ball[c] = std::min(acc, double(n) * kLn2);
        }
    }
};

// P(correct | transmitted score C) when ties are broken uniformly among
// the best: sum_l C(M-1,l) w^l a^{M-1-l} / (l+1) = (u^M - a^M) / (M w)
// with u = P(competitor score >= C), a = P(score > C), w = u - a.
// Evaluated through expm1/log1p so neither huge M nor tiny shells lose
// precision.
inline double tie_random_success(double log_lt, double log_le, double log_shell, double m_int) {
    if (m_int <= 1.0) return 1.0;
    const double b_lt = std::exp(std::min(log_lt, 0.0));   // P(score < C)
    const double b_le = std::exp(std::min(log_le, 0.0));   // P(score <= C)
    const double u = -std::expm1(std::min(log_lt, 0.0));   // P(score >= C)
    const double w = std::exp(log_shell);                  // P(score == C)
    if (u <= 0.0) return 0.0;  // some competitor is strictly better surely
    if (w <= 0.0) {
        const double a = -std::expm1(std::min(log_le, 0.0));
        if (a <= 0.0) return 0.0;
        return std::exp((m_int - 1.0) * std::log1p(-b_le));
    }
    const double lu = std::log1p(-b_lt);
    const double ratio = std::min(w / u, 1.0);
    const double la_minus_lu = std::log1p(-ratio);  // ln(a/u)
    const double s1 = m_int * lu - std::log(m_int * w);
    return std::exp(s1) * (-std::expm1(m_int * la_minus_lu));
}

// Failure probability conditioned on the transmitted codeword's score,
// given the log-probabilities of a uniform competitor scoring < C, <= C,
// and == C. m_real is the (possibly non-integer) ensemble size e^{NR}.
inline double conditional_failure(double log_lt, double log_le, double log_shell,
                                  double m_real, TiePolicy ties) {
    switch (ties) {
        case TiePolicy::error:
            return prob_at_least_one(LogReal::from_log(std::min(log_le, 0.0)), m_real - 1.0);
        case TiePolicy::union_bound: {
            const double expect = (m_real - 1.0) * std::exp(std::min(log_le, 0.0));
            return std::min(1.0, expect);
        }
        case TiePolicy::random_among_best: {
            const double m_int = std::max(1.0, std::round(m_real));
            return 1.0 - tie_random_success(log_lt, log_le, log_shell, m_int);
        }
    }
    throw std::logic_error("conditional_failure: bad tie policy");
}

// Binomial(n, eps) weights in the linear domain.
inline std::vector<double> error_count_weights(int n, double eps) {
    std::vector<double> w(static_cast<size_t>(n) + 1, 0.0);
    if (n == 0 || eps == 0.0) {
        w[0] = 1.0;
        return w;
    }
    w[0] = std::exp(double(n) * std::log1p(-eps));
    const double r = eps / (1.0 - eps);
    for (int e = 0; e < n; ++e) w[e + 1] = w[e] * r * double(n - e) / double(e + 1);
    return w;
}

}  // namespace detail

// ln of the ML weighted-ball cardinality
//   sum_{ceil(gamma i) + j <= c_threshold} C(n_g,i) C(n_b,j).
inline LogReal ball_size_ml(int n_g, int n_b, double gamma, int c_threshold) {
    if (n_g < 0 || n_b < 0 || c_threshold < 0)
        throw std::invalid_argument("ball_size_ml: negative argument");
    if (gamma < 1.0) throw std::invalid_argument("ball_size_ml: gamma must be >= 1");
    const LogFactorials lf(n_g + n_b);
    const detail::MlBallTable t(n_g, n_b, gamma, lf);
    const int c = std::min(c_threshold, t.c_max);
    return LogReal::from_log(t.log_ball[c]);
}

// Exact random-coding failure probability over BSC(p) with M codewords.
// ties=error is the Fano expression; ties=random_among_best applies the
// tie correction; ties=union_bound caps the expected competitor count.
inline double bsc_exact(int n, double p, double m_codewords, TiePolicy ties) {
    if (n < 1) throw std::invalid_argument("bsc_exact: n must be >= 1");
    if (p < 0.0 || p > 0.5) throw std::invalid_argument("bsc_exact: p outside [0, 1/2]");
    if (m_codewords < 1.0) throw std::invalid_argument("bsc_exact: need at least one codeword");
    const LogFactorials lf(n);
    const detail::BscBallTable ball(n, lf);
    const std::vector<double> w = detail::error_count_weights(n, p);
    const double ln2n = double(n) * detail::kLn2;
    double acc = 0.0;
    for (int tau = 0; tau <= n; ++tau) {
        if (w[tau] <= 0.0) continue;
        const double log_le = ball.log_ball[tau] - ln2n;
        const double log_lt = tau > 0 ? ball.log_ball[tau - 1] - ln2n
                                      : -std::numeric_limits<double>::infinity();
        acc += w[tau] * detail::conditional_failure(log_lt, log_le,
                                                    ball.log_shell[tau] - ln2n,
                                                    m_codewords, ties);
    }
    return acc;
}

// Failure probability conditioned on the occupancy type n_g: double sum
// over good/bad error counts of binomial weights times the per-score
// conditional failure. Joint weights below 1e-20 are skipped; the skipped
// mass bounds the truncation error and must stay below 1e-12.
inline double ge_cond_error(int n_g, int n, const ChannelParams& params, double m_codewords,
                            const DecoderSpec& decoder) {
    if (n < 1 || n_g < 0 || n_g > n) throw std::invalid_argument("ge_cond_error: bad occupancy");
    if (m_codewords < 1.0) throw std::invalid_argument("ge_cond_error: need at least one codeword");
    const int n_b = n - n_g;
    const LogFactorials lf(n);
    const double ln2n = double(n) * detail::kLn2;
    const std::vector<double> wg = detail::error_count_weights(n_g, params.eps_g);
    const std::vector<double> wb = detail::error_count_weights(n_b, params.eps_b);

    // eps_g == eps_b makes gamma = 1, where the ML ball telescopes to the
    // Hamming ball (Vandermonde); route through the MD tables.
    const double gamma =
        decoder.rule == DecodeRule::maximum_likelihood ? ml_gamma(params.eps_g, params.eps_b) : 1.0;
    const bool md_path = decoder.rule == DecodeRule::minimum_distance || gamma == 1.0;

    constexpr double kWeightFloor = 1e-20;
    double acc = 0.0, skipped = 0.0;

    if (md_path) {
        const detail::BscBallTable ball(n, lf);
        std::vector<double> perr(static_cast<size_t>(n) + 1);
        for (int tau = 0; tau <= n; ++tau) {
            const double log_le = ball.log_ball[tau] - ln2n;
            const double log_lt = tau > 0 ? ball.log_ball[tau - 1] - ln2n
                                          : -std::numeric_limits<double>::infinity();
            perr[tau] = detail::conditional_failure(log_lt, log_le,
                                                    ball.log_shell[tau] - ln2n,
                                                    m_codewords, decoder.ties);
        }
        for (int eg = 0; eg <= n_g; ++eg) {
            for (int eb = 0; eb <= n_b; ++eb) {
                const double jw = wg[eg] * wb[eb];
                if (jw < kWeightFloor) {
                    skipped += jw;
                    continue;
                }
                acc += jw * perr[eg + eb];
            }
        }
    } else {
        const detail::MlBallTable ball(n_g, n_b, gamma, lf);
        std::vector<double> perr(static_cast<size_t>(ball.c_max) + 1);
        for (int c = 0; c <= ball.c_max; ++c) {
            const double log_le = ball.log_ball[c] - ln2n;
            const double log_lt = c > 0 ? ball.log_ball[c - 1] - ln2n
                                        : -std::numeric_limits<double>::infinity();
            perr[c] = detail::conditional_failure(log_lt, log_le,
                                                  ball.log_shell[c] - ln2n,
                                                  m_codewords, decoder.ties);
        }
        for (int eg = 0; eg <= n_g; ++eg) {
            const int ci = gamma_ceil(gamma, eg);
            for (int eb = 0; eb <= n_b; ++eb) {
                const double jw = wg[eg] * wb[eb];
                if (jw < kWeightFloor) {
                    skipped += jw;
                    continue;
                }
                acc += jw * perr[ci + eb];
            }
        }
    }
    if (skipped > 1e-12)
        throw std::logic_error("ge_cond_error: truncation bound exceeded 1e-12");
    return acc;
}

// Exact failure probability table for the Gilbert-Elliott channel with
// receiver-known state: the type-conditional failures averaged with the
// joint occupancy/final-state PMF.
struct ExactResult {
    Mat2 per_transition;           // Pr(failure, sN | s0)
    double averaged = 0.0;         // stationary-weighted, final-state-summed
    std::vector<double> per_type;  // P_{e | n_g = m}, m = 0..N (diagnostic)
};

inline ExactResult ge_exact(const ChannelParams& params, const CodeParams& code,
                            const DecoderSpec& decoder) {
    params.validate();
    code.validate();
    const int n = code.n;
    // The ensemble size e^{NR} is generally not an integer. Tie-corrected
    // combinatorics rounds it (never below 2); the other policies keep the
    // real competitor count e^{NR} - 1.
    double m = code.codebook_size();
    if (decoder.ties == TiePolicy::random_among_best) m = std::max(2.0, std::round(m));

    const OccupancyTable occ = occupancy_pmf(params, n);
    ExactResult r;
    r.per_type.resize(static_cast<size_t>(n) + 1);
    for (int ng = 0; ng <= n; ++ng) r.per_type[ng] = ge_cond_error(ng, n, params, m, decoder);
    for (State s0 : kStates)
        for (State sN : kStates) {
            double acc = 0.0;
            for (int ng = 0; ng <= n; ++ng) acc += r.per_type[ng] * occ(ng, s0, sN);
            r.per_transition(s0, sN) = acc;
        }
    const auto [pi_g, pi_b] = stationary(params);
    r.averaged = pi_g * (r.per_transition(State::good, State::good) +
                         r.per_transition(State::good, State::bad)) +
                 pi_b * (r.per_transition(State::bad, State::good) +
                         r.per_transition(State::bad, State::bad));
    return r;
}

}  // namespace gechan
