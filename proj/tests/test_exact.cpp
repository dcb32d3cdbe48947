#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "gechan/exact.hpp"

using namespace gechan;
using Catch::Approx;

namespace {

int popcount(unsigned v) { return __builtin_popcount(v); }

// Reference BSC failure probability by enumerating every codebook and
// noise pattern. Codeword 0 is transmitted; competitors at distance equal
// to the noise weight tie.
double bsc_enumerate(int n, double p, int m, TiePolicy ties) {
    const int words = 1 << n;
    double total = 0.0;
    const double scale = std::pow(2.0, -double(n * (m - 1)));
    std::vector<int> comp(m - 1);
    // iterate competitor codebooks as one base-2^n counter
    const long long books = 1LL << (n * (m - 1));
    for (long long bk = 0; bk < books; ++bk) {
        long long b = bk;
        for (int i = 0; i < m - 1; ++i) {
            comp[i] = int(b & (words - 1));
            b >>= n;
        }
        for (int noise = 0; noise < words; ++noise) {
            const double w =
                std::pow(p, popcount(noise)) * std::pow(1.0 - p, n - popcount(noise));
            const int d0 = popcount(noise);
            int best = d0, tied_better = 0, ties_at = 0;
            for (int i = 0; i < m - 1; ++i) {
                const int d = popcount(comp[i] ^ noise);  // distance to received ^ c0
                if (d < best) ++tied_better;
                else if (d == d0) ++ties_at;
            }
            double fail;
            if (tied_better > 0) fail = 1.0;
            else if (ties_at == 0) fail = 0.0;
            else fail = ties == TiePolicy::error ? 1.0 : double(ties_at) / double(ties_at + 1);
            total += scale * w * fail;
        }
    }
    return total;
}

// Literal tie-corrected inner sum: sum_l C(M-1,l) w^l a^{M-1-l} / (l+1).
double lsum_success(double w, double a, int m) {
    double total = 0.0;
    for (int l = 0; l <= m - 1; ++l) {
        double c = 1.0;
        for (int i = 0; i < l; ++i) c = c * double(m - 1 - i) / double(i + 1);
        total += c * std::pow(w, l) * std::pow(a, m - 1 - l) / double(l + 1);
    }
    return total;
}

// Reference BSC failure probability built from the literal l-sum.
double bsc_lsum(int n, double p, int m, TiePolicy ties) {
    double total = 0.0;
    for (int tau = 0; tau <= n; ++tau) {
        double weight = std::exp(log_binomial(n, tau).log) * std::pow(p, tau) *
                        std::pow(1.0 - p, n - tau);
        double ball = 0.0, shell = std::exp(log_binomial(n, tau).log - n * std::log(2.0));
        for (int j = 0; j <= tau; ++j) ball += std::exp(log_binomial(n, j).log - n * std::log(2.0));
        const double a = 1.0 - ball;
        if (ties == TiePolicy::error)
            total += weight * (1.0 - std::pow(a, m - 1));
        else
            total += weight * (1.0 - lsum_success(shell, a, m));
    }
    return total;
}

ChannelParams ge(double a, double b, double eg, double eb) {
    return ChannelParams{a, b, eg, eb};
}

// Full random-coding enumeration over the Gilbert-Elliott channel: state
// paths, codebooks, and noise patterns, with the decoder applied literally.
Mat2 ge_enumerate(const ChannelParams& cp, int n, int m, const DecoderSpec& dec) {
    const int words = 1 << n;
    const Mat2 tr = transition_matrix(cp);
    const double gamma = dec.rule == DecodeRule::maximum_likelihood
                             ? ml_gamma(cp.eps_g, cp.eps_b)
                             : 1.0;
    Mat2 out;
    const double book_scale = std::pow(2.0, -double(n * m));
    for (int s0 = 0; s0 < 2; ++s0) {
        for (int path = 0; path < words; ++path) {
            // slot states s_0..s_{n-1} and final state
            double pprob = 1.0;
            int prev = s0;
            unsigned good_mask = 0;
            for (int t = 0; t < n; ++t) {
                if (prev == 0) good_mask |= 1u << t;
                const int s = (path >> t) & 1;
                pprob *= tr.at(prev, s);
                prev = s;
            }
            if (pprob == 0.0) continue;
            const int sN = prev;
            for (long long bk = 0; bk < (1LL << (n * m)); ++bk) {
                long long b = bk;
                std::vector<unsigned> cw(m);
                for (int i = 0; i < m; ++i) {
                    cw[i] = unsigned(b & (words - 1));
                    b >>= n;
                }
                for (int noise = 0; noise < words; ++noise) {
                    const int eg = popcount(unsigned(noise) & good_mask);
                    const int eb = popcount(unsigned(noise) & ~good_mask & (words - 1));
                    const double nprob = std::pow(cp.eps_g, eg) *
                                         std::pow(1.0 - cp.eps_g, popcount(good_mask) - eg) *
                                         std::pow(cp.eps_b, eb) *
                                         std::pow(1.0 - cp.eps_b, (n - popcount(good_mask)) - eb);
                    const unsigned received = cw[0] ^ unsigned(noise);
                    auto score = [&](unsigned c) {
                        const unsigned diff = c ^ received;
                        const int sg = popcount(diff & good_mask);
                        const int sb = popcount(diff & ~good_mask & (words - 1));
                        return dec.rule == DecodeRule::maximum_likelihood
                                   ? gamma_ceil(gamma, sg) + sb
                                   : sg + sb;
                    };
                    const int s0c = score(cw[0]);
                    int best = s0c, ties_at = 0;
                    bool beaten = false;
                    for (int i = 1; i < m; ++i) {
                        const int s = score(cw[i]);
                        if (s < best) beaten = true;
                        else if (s == s0c) ++ties_at;
                        best = std::min(best, s);
                    }
                    double fail;
                    if (beaten) fail = 1.0;
                    else if (ties_at == 0) fail = 0.0;
                    else fail = dec.ties == TiePolicy::error ? 1.0
                                                             : double(ties_at) / double(ties_at + 1);
                    out.at(s0, sN) += pprob * book_scale * nprob * fail;
                }
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("ball_size_md") {
    CHECK(ball_size_md(12, 0).log == 0.0);
    CHECK(ball_size_md(12, 12).log == Approx(12.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(ball_size_md(12, 40).log == Approx(12.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(ball_size_md(10, 3).log == Approx(std::log(176.0)).epsilon(1e-13));  // 1+10+45+120
}

TEST_CASE("ball_size_ml") {
    // gamma = 1 telescopes to the Hamming ball (Vandermonde)
    for (int c : {0, 1, 3, 5}) {
        CHECK(ball_size_ml(3, 2, 1.0, c).log == Approx(ball_size_md(5, c).log).epsilon(1e-12));
    }
    // a threshold admitting every pair is the whole space
    CHECK(ball_size_ml(3, 2, 2.0913, 100).log == Approx(5.0 * std::log(2.0)).epsilon(1e-14));

    // brute-force pair enumeration at gamma = 2.0913, C = 4
    const double gamma = 2.0913;
    double count = 0.0;
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 2; ++j)
            if (gamma_ceil(gamma, i) + j <= 4)
                count += std::exp(log_binomial(3, i).log + log_binomial(2, j).log);
    CHECK(ball_size_ml(3, 2, gamma, 4).log == Approx(std::log(count)).epsilon(1e-13));
}

TEST_CASE("ml_gamma and gamma_ceil") {
    CHECK(ml_gamma(0.1, 0.1) == 1.0);
    CHECK(ml_gamma(0.01, 0.1) == Approx(2.09134).epsilon(1e-5));
    CHECK(ml_gamma(0.01, 0.1) > 1.0);
    CHECK_THROWS_AS(ml_gamma(0.0, 0.1), std::invalid_argument);

    CHECK(gamma_ceil(2.0913, 0) == 0);
    CHECK(gamma_ceil(2.0913, 1) == 3);
    CHECK(gamma_ceil(2.0913, 2) == 5);
    // exact-integer products snap instead of ceiling up
    CHECK(gamma_ceil(1.5, 2) == 3);
    CHECK(gamma_ceil(3.0, 7) == 21);
}

TEST_CASE("bsc_exact basics") {
    CHECK(bsc_exact(6, 0.1, 1.0, TiePolicy::error) == 0.0);
    CHECK(bsc_exact(6, 0.1, 1.0, TiePolicy::random_among_best) == 0.0);

    // p = 0: failure only through codeword collision at distance zero
    for (double m : {2.0, 5.0, 1000.0}) {
        const double expect = -std::expm1((m - 1.0) * std::log1p(-std::pow(2.0, -8.0)));
        CHECK(bsc_exact(8, 0.0, m, TiePolicy::error) == Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("bsc_exact equals codebook/noise enumeration") {
    for (auto [n, m] : {std::pair{3, 2}, {4, 2}, {3, 3}}) {
        for (double p : {0.1, 0.35}) {
            for (TiePolicy ties : {TiePolicy::error, TiePolicy::random_among_best}) {
                INFO("n=" << n << " m=" << m << " p=" << p << " ties=" << int(ties));
                CHECK(bsc_exact(n, p, double(m), ties) ==
                      Approx(bsc_enumerate(n, p, m, ties)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("tie-corrected closed form equals the literal l-sum") {
    for (int m : {2, 3, 7, 29, 240}) {
        for (double p : {0.05, 0.2, 0.45}) {
            CHECK(bsc_exact(10, p, double(m), TiePolicy::random_among_best) ==
                  Approx(bsc_lsum(10, p, m, TiePolicy::random_among_best)).epsilon(1e-11));
        }
    }
}

TEST_CASE("tie policy ordering and monotonicity in M") {
    // union bound >= tie-as-error >= tie-corrected, pointwise
    for (int i = 0; i < 100; ++i) {
        const double p = 0.005 + 0.44 * double(i) / 99.0;
        const double m = 2.0 + 3.0 * i;
        const double u = bsc_exact(24, p, m, TiePolicy::union_bound);
        const double e = bsc_exact(24, p, m, TiePolicy::error);
        const double r = bsc_exact(24, p, m, TiePolicy::random_among_best);
        CHECK(u >= e - 1e-12);
        CHECK(e >= r - 1e-12);
    }
    double prev = 0.0;
    for (double m : {2.0, 4.0, 16.0, 256.0, 1e6}) {
        const double v = bsc_exact(16, 0.08, m, TiePolicy::error);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("ge_cond_error reductions") {
    // equal crossovers: the conditional collapses to the BSC value, any n_g
    const double p = 0.11;
    const ChannelParams cp = ge(0.3, 0.4, p, p);
    for (TiePolicy ties : {TiePolicy::error, TiePolicy::random_among_best}) {
        const double ref = bsc_exact(12, p, 37.0, ties);
        for (int m : {0, 3, 7, 12}) {
            for (DecodeRule rule : {DecodeRule::minimum_distance, DecodeRule::maximum_likelihood}) {
                CHECK(ge_cond_error(m, 12, cp, 37.0, DecoderSpec{rule, ties}) ==
                      Approx(ref).epsilon(1e-12));
            }
        }
    }

    // M = 1: no competitor, never fails
    const ChannelParams cp2 = ge(0.2, 0.3, 0.05, 0.2);
    for (int m : {0, 5, 9})
        CHECK(ge_cond_error(m, 9, cp2, 1.0, DecoderSpec{DecodeRule::minimum_distance,
                                                        TiePolicy::error}) == 0.0);

    // all-good block with eps_g = 0: only the codeword-collision term remains
    const ChannelParams cp3 = ge(0.1, 0.2, 0.0, 0.3);
    const double expect = -std::expm1(9.0 * std::log1p(-std::pow(2.0, -10.0)));
    CHECK(ge_cond_error(10, 10, cp3, 10.0,
                        DecoderSpec{DecodeRule::minimum_distance, TiePolicy::error}) ==
          Approx(expect).epsilon(1e-12));
}

TEST_CASE("ge_exact equals full enumeration on small instances") {
    const ChannelParams cp = ge(0.25, 0.4, 0.1, 0.3);
    for (auto [n, m] : {std::pair{3, 2}, {4, 2}, {3, 3}}) {
        const CodeParams code{n, std::log(double(m)) / n};  // e^{NR} = m exactly
        for (DecodeRule rule : {DecodeRule::minimum_distance, DecodeRule::maximum_likelihood}) {
            for (TiePolicy ties : {TiePolicy::error, TiePolicy::random_among_best}) {
                const DecoderSpec dec{rule, ties};
                const ExactResult got = ge_exact(cp, code, dec);
                const Mat2 want = ge_enumerate(cp, n, m, dec);
                for (State s0 : kStates)
                    for (State sN : kStates) {
                        INFO("n=" << n << " m=" << m << " rule=" << int(rule)
                                  << " ties=" << int(ties) << " s0=" << idx(s0)
                                  << " sN=" << idx(sN));
                        CHECK(got.per_transition(s0, sN) ==
                              Approx(want(s0, sN)).margin(1e-12).epsilon(1e-12));
                    }
            }
        }
    }
}

TEST_CASE("equal crossovers collapse ge_exact to bsc_exact") {
    const double p = 0.09;
    const CodeParams code{30, 0.22};
    for (auto [a, b] : {std::pair{0.4, 0.7}, {0.05, 0.02}}) {
        const ChannelParams cp = ge(a, b, p, p);
        for (DecodeRule rule : {DecodeRule::minimum_distance, DecodeRule::maximum_likelihood}) {
            const ExactResult r = ge_exact(cp, code, DecoderSpec{rule, TiePolicy::error});
            const double ref = bsc_exact(30, p, code.codebook_size(), TiePolicy::error);
            CHECK(r.averaged == Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("maximum likelihood dominates minimum distance") {
    const CodeParams code{40, 0.3};
    for (auto [a, b] : {std::pair{0.0533, 0.08}, {0.3, 0.2}}) {
        const ChannelParams cp = ge(a, b, 0.01, 0.1);  // gamma = 2.09
        for (TiePolicy ties :
             {TiePolicy::error, TiePolicy::random_among_best, TiePolicy::union_bound}) {
            const ExactResult ml = ge_exact(cp, code, DecoderSpec{DecodeRule::maximum_likelihood, ties});
            const ExactResult md = ge_exact(cp, code, DecoderSpec{DecodeRule::minimum_distance, ties});
            for (State s0 : kStates)
                for (State sN : kStates)
                    CHECK(ml.per_transition(s0, sN) <=
                          md.per_transition(s0, sN) * (1.0 + 1e-12) + 1e-18);
        }
    }
}

TEST_CASE("near-unit gamma: the score ceiling can lag minimum distance") {
    // With eps_g barely below eps_b, gamma = 1.03 and the ceiling turns one
    // good-slot error into a two-point charge; the score decoder then loses
    // to plain Hamming distance. Monte Carlo confirms both exact values, so
    // this is a property of the score rule, not an evaluation artifact.
    const ChannelParams cp = ge(0.4754, 0.1263, 0.1058, 0.1119);
    CHECK(ml_gamma(cp.eps_g, cp.eps_b) == Approx(1.0304).margin(1e-3));
    const CodeParams code{18, std::log(1179.0) / 18.0};
    const double ml =
        ge_exact(cp, code, DecoderSpec{DecodeRule::maximum_likelihood, TiePolicy::error}).averaged;
    const double md =
        ge_exact(cp, code, DecoderSpec{DecodeRule::minimum_distance, TiePolicy::error}).averaged;
    CHECK(ml > md);
    CHECK(ml == Approx(0.513016).margin(2e-4));
    CHECK(md == Approx(0.495487).margin(2e-4));
}

TEST_CASE("per-type diagnostics behave") {
    const ChannelParams cp = ge(0.0533, 0.08, 0.01, 0.1);
    const CodeParams code{24, 0.25};
    const ExactResult r = ge_exact(cp, code, DecoderSpec{DecodeRule::minimum_distance, TiePolicy::error});
    REQUIRE(r.per_type.size() == 25);
    for (double v : r.per_type) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // more good slots never hurt: P_{e|n_g} is nonincreasing in n_g
    for (size_t m = 1; m < r.per_type.size(); ++m)
        CHECK(r.per_type[m] <= r.per_type[m - 1] * (1.0 + 1e-12) + 1e-18);
}
