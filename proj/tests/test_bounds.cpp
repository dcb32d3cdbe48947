#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gechan/bounds.hpp"

using namespace gechan;
using Catch::Approx;

namespace {
ChannelParams ge(double a, double b, double eg = 0.01, double eb = 0.1) {
    return ChannelParams{a, b, eg, eb};
}
}  // namespace

TEST_CASE("gallager_g") {
    for (double eps : {0.0, 0.07, 0.25, 0.49}) CHECK(gallager_g(eps, 0.0) == Approx(1.0).epsilon(1e-15));
    for (double rho : {0.1, 0.5, 1.0})
        CHECK(gallager_g(0.0, rho) == Approx(std::exp2(-rho)).epsilon(1e-14));

    // extended-precision formula evaluation at (0.1, 0.5)
    const long double e = 1.0L / 1.5L;
    const long double ref =
        powl(2.0L, -0.5L) * powl(powl(0.1L, e) + powl(0.9L, e), 1.5L);
    CHECK(gallager_g(0.1, 0.5) == Approx(double(ref)).epsilon(1e-14));

    for (double rho : {0.0, 0.3, 1.0})
        for (double eps : {0.0, 0.1, 0.5}) {
            const double g = gallager_g(eps, rho);
            CHECK(g > 0.0);
            CHECK(g <= 1.0 + 1e-15);
        }
}

TEST_CASE("e0_type") {
    const ChannelParams p = ge(0.1, 0.2);
    for (double rho : {0.0, 0.4, 1.0}) {
        CHECK(e0_type(rho, 1.0, p) == Approx(-std::log(gallager_g(p.eps_g, rho))).epsilon(1e-13));
        CHECK(e0_type(rho, 0.0, p) == Approx(-std::log(gallager_g(p.eps_b, rho))).epsilon(1e-13));
    }
    for (double eta : {0.0, 0.3, 1.0}) CHECK(e0_type(0.0, eta, p) == Approx(0.0).margin(1e-15));
    // nonnegative on the whole rho range, linear in eta
    for (double rho = 0.0; rho <= 1.0; rho += 0.1)
        for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(e0_type(rho, eta, p) >= -1e-15);
    const double mid = e0_type(0.6, 0.5, p);
    CHECK(mid == Approx(0.5 * (e0_type(0.6, 0.0, p) + e0_type(0.6, 1.0, p))).epsilon(1e-12));
}

TEST_CASE("type-sum and matrix-power bounds agree entrywise") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = 0.01 + 0.9 * double(rng() % 1000) / 1000.0;
        const double b = 0.01 + 0.9 * double(rng() % 1000) / 1000.0;
        double eg = 0.49 * double(rng() % 1000) / 1000.0;
        double eb = 0.49 * double(rng() % 1000) / 1000.0;
        if (eg > eb) std::swap(eg, eb);
        const int n = 1 + int(rng() % 100);
        const double rate = 0.05 + 0.7 * double(rng() % 1000) / 1000.0;
        const double rho = double(rng() % 1001) / 1000.0;
        const ChannelParams p = ge(a, b, eg, eb);
        const CodeParams code{n, rate};
        const Mat2 ts = bound_typesum(p, code, rho);
        const Mat2 mp = bound_matrixpower(p, code, rho);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                INFO("trial=" << trial << " entry " << i << j << " n=" << n);
                CHECK(ts.m[i][j] == Approx(mp.m[i][j]).epsilon(1e-9));
            }
    }
}

TEST_CASE("type-sum equals matrix-power at the reproduction parameters") {
    // rate constants (4,6) at N = 50, rates in bits
    const ChannelParams p = ge(4.0 / 50, 6.0 / 50);
    const CodeParams code{50, 0.25 * std::log(2.0)};
    for (double rho : {0.1, 0.5, 0.977}) {
        const Mat2 ts = bound_typesum(p, code, rho);
        const Mat2 mp = bound_matrixpower(p, code, rho);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(ts.m[i][j] == Approx(mp.m[i][j]).epsilon(1e-9));
    }
}

TEST_CASE("bounds at rho = 0 reduce to N-step transition probabilities") {
    const ChannelParams p = ge(0.08, 0.12);
    const CodeParams code{50, 0.25};
    const Mat2 pn = mat2_pow(transition_matrix(p), 50);
    const Mat2 ts = bound_typesum(p, code, 0.0);
    const Mat2 mp = bound_matrixpower(p, code, 0.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(ts.m[i][j] == Approx(pn.m[i][j]).epsilon(1e-12));
            CHECK(mp.m[i][j] == Approx(pn.m[i][j]).epsilon(1e-12));
        }
    // the rare bound's own chain is the CTMC: rows of exp(Q) sum to one
    const Mat2 rare = bound_rare(4.0, 6.0, 0.01, 0.1, code, 0.0);
    CHECK(rare.m[0][0] + rare.m[0][1] == Approx(1.0).epsilon(1e-12));
    CHECK(rare.m[1][0] + rare.m[1][1] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equal crossovers factor the exponent out of the type sum") {
    const double eps = 0.07;
    const ChannelParams p = ge(0.3, 0.4, eps, eps);
    const CodeParams code{40, 0.3};
    const double rho = 0.6;
    const double factor =
        std::pow(gallager_g(eps, rho), 40) * std::exp(rho * 40 * code.rate_nats);
    const Mat2 pn = mat2_pow(transition_matrix(p), 40);
    const Mat2 ts = bound_typesum(p, code, rho);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(ts.m[i][j] == Approx(factor * pn.m[i][j]).epsilon(1e-11));

    // and the rare bound's MGF argument vanishes: y = 0 is row-stochastic
    const Mat2 rare = bound_rare(1.0, 2.0, eps, eps, code, rho);
    const double scale = std::pow(gallager_g(eps, rho), 40) * std::exp(rho * 40 * code.rate_nats);
    CHECK((rare.m[0][0] + rare.m[0][1]) == Approx(scale).epsilon(1e-11));
    CHECK((rare.m[1][0] + rare.m[1][1]) == Approx(scale).epsilon(1e-11));
}

TEST_CASE("matrix-power single step") {
    const ChannelParams p = ge(0.3, 0.2);
    const CodeParams code{1, 0.4};
    const double rho = 0.8;
    const Mat2 mp = bound_matrixpower(p, code, rho);
    CHECK(mp(State::good, State::bad) ==
          Approx(0.3 * gallager_g(0.01, rho) * std::exp(rho * 0.4)).epsilon(1e-13));
}

TEST_CASE("minimize_rho") {
    const RhoMinimum c = minimize_rho([](double) { return 4.25; });
    CHECK(c.value == 4.25);

    const RhoMinimum q = minimize_rho([](double r) { return (r - 0.3) * (r - 0.3); });
    CHECK(q.rho_star == Approx(0.3).margin(1e-5));
    CHECK(q.value <= 1e-9);

    CHECK_THROWS_AS(minimize_rho([](double r) { return r > 0.5 ? std::nan("") : r; }),
                    std::runtime_error);

    // minimized bound dominates every grid evaluation
    const ChannelParams p = ge(0.08, 0.12);
    const CodeParams code{50, 0.25 * std::log(2.0)};
    auto avg = [&](double rho) {
        const Mat2 t = bound_matrixpower(p, code, rho);
        return 0.75 * (t.m[0][0] + t.m[0][1]) + 0.25 * (t.m[1][0] + t.m[1][1]);
    };
    const RhoMinimum m = minimize_rho(avg);
    for (double rho = 0.0; rho <= 1.0; rho += 0.01) CHECK(m.value <= avg(rho) + 1e-18);
}

TEST_CASE("per-entry minimization is at least as tight as averaged") {
    const ChannelParams p = ge(0.08, 0.12);
    const CodeParams code{50, 0.25 * std::log(2.0)};
    auto table = [&](double rho) { return bound_matrixpower(p, code, rho); };
    const BoundResult per = minimize_bound(table, 0.75, RhoOptimization::per_entry);
    const BoundResult avg = minimize_bound(table, 0.75, RhoOptimization::averaged);
    CHECK(per.averaged <= avg.averaged * (1.0 + 1e-12));
    CHECK(per.rho_star == Approx(avg.rho_star));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(per.per_transition.m[i][j] <= avg.per_transition.m[i][j] * (1.0 + 1e-12));
    // averaged consistency: scalar equals the stationary-weighted entry sum
    const double recomputed = 0.75 * (per.per_transition.m[0][0] + per.per_transition.m[0][1]) +
                              0.25 * (per.per_transition.m[1][0] + per.per_transition.m[1][1]);
    CHECK(per.averaged == Approx(recomputed).epsilon(1e-14));
}

TEST_CASE("minimized bound is nondecreasing in rate") {
    const ChannelParams p = ge(0.05, 0.1);
    double prev = 0.0;
    for (double rate = 0.15; rate <= 0.6; rate += 0.05) {
        const CodeParams code{60, rate};
        const BoundResult b = minimize_bound(
            [&](double rho) { return bound_matrixpower(p, code, rho); }, 2.0 / 3.0,
            RhoOptimization::per_entry);
        CHECK(b.averaged >= prev - 1e-15);
        prev = b.averaged;
    }
}

TEST_CASE("rare bound approaches the scaled matrix-power bound for large N") {
    // same rate constants, N = 2000: relative gap of the minimized averaged
    // values at most 1%
    const double na = 0.04, nb = 0.12;
    const int n = 2000;
    const ChannelParams p = ge(na / n, nb / n, 0.05, 0.1);
    const CodeParams code{n, 0.2};
    const auto [pi_g, pi_b] = stationary(p);
    const BoundResult mp = minimize_bound(
        [&](double rho) { return bound_matrixpower(p, code, rho); }, pi_g,
        RhoOptimization::per_entry);
    const BoundResult rare = minimize_bound(
        [&](double rho) { return bound_rare(na, nb, 0.05, 0.1, code, rho); }, pi_g,
        RhoOptimization::per_entry);
    CHECK(std::fabs(rare.averaged - mp.averaged) / mp.averaged <= 0.01);
}
