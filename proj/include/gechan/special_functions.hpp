#pragma once

// Log-domain scalar type and the small set of special functions the rest of
// the library is built on: log-binomials, stable log-sum-exp, terminating
// Gauss hypergeometric sums, modified Bessel functions I0/I1, and the
// "at least one of t competitors" probability 1 - (1-q)^t.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace gechan {

// Natural log of a nonnegative quantity; log(0) is represented by -infinity.
// Exponentiating a probability-valued LogReal never overflows since the log
// is <= 0 up to rounding.
struct LogReal {
    double log;

    static constexpr LogReal zero() {
        return {-std::numeric_limits<double>::infinity()};
    }
    static constexpr LogReal one() { return {0.0}; }
    static constexpr LogReal from_log(double lg) { return {lg}; }
    static LogReal from_linear(double x) {
        if (x < 0.0) throw std::invalid_argument("LogReal: negative linear value");
        return {std::log(x)};
    }

    bool is_zero() const { return std::isinf(log) && log < 0.0; }
    double linear() const { return std::exp(log); }
    // For presentation of probabilities only; internal math never clamps.
    double clamped01() const { return log >= 0.0 ? 1.0 : std::exp(log); }
};

inline LogReal log_mul(LogReal a, LogReal b) {
    if (a.is_zero() || b.is_zero()) return LogReal::zero();
    return {a.log + b.log};
}

// ln(e^a + e^b) without overflow.
inline double log_add(double a, double b) {
    if (std::isinf(a) && a < 0.0) return b;
    if (std::isinf(b) && b < 0.0) return a;
    double hi = a > b ? a : b;
    double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

inline LogReal log_add(LogReal a, LogReal b) { return {log_add(a.log, b.log)}; }

// ln sum_i e^{t_i}, max-shifted. Empty input is log(0).
inline LogReal log_sum_exp(std::span<const LogReal> terms) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const LogReal& t : terms) mx = std::max(mx, t.log);
    if (std::isinf(mx) && mx < 0.0) return LogReal::zero();
    double acc = 0.0;
    for (const LogReal& t : terms) acc += std::exp(t.log - mx);
    return {mx + std::log(acc)};
}

inline LogReal log_sum_exp(const std::vector<LogReal>& terms) {
    return log_sum_exp(std::span<const LogReal>(terms));
}

namespace detail {
// Stirling correction series 1/(12x) - 1/(360x^3) + 1/(1260x^5); next term
// is below 1e-16 relative for x >= 64.
inline double stirling_corr(double x) {
    const double r = 1.0 / x, r2 = r * r;
    return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 / 1260.0));
}
}  // namespace detail

// ln C(n,k); k outside [0,n] is log(0), which lets truncated sums index
// freely. Small min(k,n-k) uses the direct product; larger arguments use
// the entropy form k ln(n/k) + (n-k) ln(n/(n-k)) + ... whose terms are all
// on the scale of the result, so no large-lgamma cancellation enters and
// 12 significant digits hold up to n = 1e6 and beyond.
inline LogReal log_binomial(std::int64_t n, std::int64_t k) {
    if (n < 0) throw std::invalid_argument("log_binomial: n < 0");
    if (k < 0 || k > n) return LogReal::zero();
    if (k > n - k) k = n - k;
    if (k == 0) return LogReal::one();
    if (k <= 64) {
        double acc = 0.0;
        for (std::int64_t i = 1; i <= k; ++i)
            acc += std::log(double(n - k + i)) - std::log(double(i));
        return {acc};
    }
    const double dn = double(n), dk = double(k), dm = double(n - k);
    const double lg = dk * std::log(dn / dk) + dm * std::log(dn / dm) +
                      0.5 * std::log(dn / (2.0 * M_PI * dk * dm)) +
                      detail::stirling_corr(dn) - detail::stirling_corr(dk) -
                      detail::stirling_corr(dm);
    return {lg};
}

// ln n! table for hot loops; entries come straight from lgamma so the
// accuracy matches log_binomial.
class LogFactorials {
  public:
    explicit LogFactorials(int max_n) : lf_(static_cast<size_t>(max_n) + 1) {
        for (int i = 0; i <= max_n; ++i) lf_[i] = std::lgamma(double(i) + 1.0);
    }
    double factorial(int n) const { return lf_[n]; }
    double binomial(int n, int k) const {
        if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
        return lf_[n] - lf_[k] - lf_[n - k];
    }
    int max_n() const { return static_cast<int>(lf_.size()) - 1; }

  private:
    std::vector<double> lf_;
};

// Terminating Gauss hypergeometric F(-m1, -m2; 1; lambda)
//   = sum_{k=0}^{min(m1,m2)} C(m1,k) C(m2,k) lambda^k.
// All terms are nonnegative, so the sum has no cancellation. Evaluation runs
// in the linear domain and switches itself to log domain if a term would
// leave the representable range.
inline double hypergeom_term(std::int64_t m1, std::int64_t m2, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("hypergeom_term: lambda < 0");
    if (m1 < 0 || m2 < 0) throw std::invalid_argument("hypergeom_term: negative order");
    const std::int64_t kmax = std::min(m1, m2);
    double term = 1.0, sum = 1.0;
    for (std::int64_t k = 0; k < kmax; ++k) {
        term *= double(m1 - k) * double(m2 - k) * lambda /
                (double(k + 1) * double(k + 1));
        sum += term;
        if (term > 1e280) {  // restart in log domain
            double lt = 0.0, mx = 0.0;
            std::vector<double> lts;
            lts.reserve(static_cast<size_t>(kmax) + 1);
            lts.push_back(0.0);
            for (std::int64_t j = 0; j < kmax; ++j) {
                lt += std::log(double(m1 - j)) + std::log(double(m2 - j)) +
                      std::log(lambda) - 2.0 * std::log(double(j + 1));
                lts.push_back(lt);
                mx = std::max(mx, lt);
            }
            double acc = 0.0;
            for (double v : lts) acc += std::exp(v - mx);
            return std::exp(mx + std::log(acc));
        }
    }
    return sum;
}

// Modified Bessel function of the first kind, order 0 or 1, by power series
//   I0(z) = sum_k (z/2)^{2k} / (k!)^2,   I1(z) = sum_k (z/2)^{2k+1} / (k!(k+1)!),
// summed until the running term drops below 1e-16 of the sum.
inline double bessel_i(int order, double z) {
    if (order != 0 && order != 1) throw std::invalid_argument("bessel_i: order must be 0 or 1");
    if (z < 0.0) throw std::invalid_argument("bessel_i: z < 0");
    const double q = 0.25 * z * z;
    double term = (order == 0) ? 1.0 : 0.5 * z;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (double(k) * double(k + order));
        sum += term;
        if (term < sum * 1e-16) break;
    }
    return sum;
}

// I1(z) / (z/2) = sum_k (z/2)^{2k} / (k!(k+1)!). Finite (=1) at z = 0,
// which keeps density expressions of the form sqrt(x/(1-x)) I1(...) stable
// at the endpoints.
inline double bessel_i1_ratio(double z) {
    if (z < 0.0) throw std::invalid_argument("bessel_i1_ratio: z < 0");
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (double(k) * double(k + 1));
        sum += term;
        if (term < sum * 1e-16) break;
    }
    return sum;
}

// 1 - (1-q)^t for q = exp(log_q), t >= 0 real, without cancellation for
// small q*t. q > 1 signals a ball-size accounting bug upstream.
inline double prob_at_least_one(LogReal log_q, double t) {
    if (log_q.log > 1e-12) throw std::invalid_argument("prob_at_least_one: q > 1");
    if (t < 0.0) throw std::invalid_argument("prob_at_least_one: t < 0");
    if (t == 0.0 || log_q.is_zero()) return 0.0;
    if (log_q.log >= 0.0) return 1.0;  // q == 1 up to rounding
    double s;  // s = -t ln(1-q)
    if (log_q.log > -700.0) {
        s = t * (-std::log1p(-std::exp(log_q.log)));
    } else {
        s = std::exp(std::log(t) + log_q.log);  // q underflows; s ~= t q
    }
    return -std::expm1(-s);
}

// Regularized incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a), a > 0, x >= 0.
// Series for x < a+1, continued fraction otherwise; used for chi-square
// tail probabilities.
inline double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace gechan
