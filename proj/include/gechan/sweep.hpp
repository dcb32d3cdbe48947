#pragma once

// Parameter-sweep engine behind the CLI: computes one row per
// (quantity, N, rate), renders RFC-4180 CSV with a fixed column set, and a
// JSON sidecar recording the configuration and conventions. The CLI adds
// parsing only; every emitted value comes straight from the library calls
// below.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gechan/bounds.hpp"
#include "gechan/exact.hpp"
#include "gechan/markov.hpp"
#include "gechan/montecarlo.hpp"

namespace gechan {

enum class Quantity {
    bound_gallager,
    bound_rare,
    exact_md,
    exact_ml,
    bsc,
    occupancy,
    simulate,
};

inline const char* to_string(Quantity q) {
    switch (q) {
        case Quantity::bound_gallager: return "bound_gallager";
        case Quantity::bound_rare: return "bound_rare";
        case Quantity::exact_md: return "exact_md";
        case Quantity::exact_ml: return "exact_ml";
        case Quantity::bsc: return "bsc";
        case Quantity::occupancy: return "occupancy";
        case Quantity::simulate: return "simulate";
    }
    return "?";
}

inline const char* to_string(TiePolicy t) {
    switch (t) {
        case TiePolicy::error: return "error";
        case TiePolicy::random_among_best: return "random";
        case TiePolicy::union_bound: return "union";
    }
    return "?";
}

inline const char* to_string(DecodeRule r) {
    return r == DecodeRule::minimum_distance ? "md" : "ml";
}

enum class Scaling { fixed_alpha_beta, rare_n_alpha_beta };
enum class Averaging { stationary, per_transition };

struct SweepSpec {
    std::vector<Quantity> quantities;
    std::vector<double> rates_nats;
    std::vector<int> blocklengths;
    Scaling scaling = Scaling::fixed_alpha_beta;
    double alpha = 0.0, beta = 0.0;      // per-symbol (fixed scaling)
    double n_alpha = 0.0, n_beta = 0.0;  // rate constants (rare scaling)
    double eps_g = 0.0, eps_b = 0.0;
    Averaging averaging = Averaging::stationary;
    RhoOptimization rho_opt = RhoOptimization::per_entry;
    TiePolicy ties = TiePolicy::error;
    DecodeRule decoder = DecodeRule::minimum_distance;
    double bsc_p = -1.0;       // crossover for quantity=bsc
    double explicit_m = 0.0;   // overrides e^{NR} when > 0 (bsc, simulate)
    std::int64_t trials = 10000;
    std::uint64_t seed = 0;

    // Per-symbol transition probabilities at block length N.
    ChannelParams channel_at(int n) const {
        ChannelParams p;
        if (scaling == Scaling::rare_n_alpha_beta) {
            p.alpha = n_alpha / double(n);
            p.beta = n_beta / double(n);
        } else {
            p.alpha = alpha;
            p.beta = beta;
        }
        p.eps_g = eps_g;
        p.eps_b = eps_b;
        return p;
    }
    // Rate constants (N alpha_N, N beta_N) at block length N.
    std::pair<double, double> rates_at(int n) const {
        if (scaling == Scaling::rare_n_alpha_beta) return {n_alpha, n_beta};
        return {alpha * double(n), beta * double(n)};
    }
};

struct SweepRow {
    std::string quantity;
    int n = 0;
    std::optional<double> rate_nats, alpha, beta, eps_g, eps_b, rho_star;
    std::optional<double> value, value_gg, value_gb, value_bg, value_bb;
    std::string ties, decoder;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline void fill_entries(SweepRow& row, const Mat2& t) {
    row.value_gg = t.m[0][0];
    row.value_gb = t.m[0][1];
    row.value_bg = t.m[1][0];
    row.value_bb = t.m[1][1];
}

}  // namespace detail

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    std::vector<SweepRow> rows;
    for (Quantity q : spec.quantities) {
        for (int n : spec.blocklengths) {
            const ChannelParams cp = spec.channel_at(n);
            const bool per_rate = q != Quantity::occupancy;
            const std::vector<double> rates = per_rate ? spec.rates_nats
                                                       : std::vector<double>{0.0};
            for (double rate : rates) {
                SweepRow row;
                row.quantity = to_string(q);
                row.n = n;
                if (per_rate) row.rate_nats = rate;
                CodeParams code{n, rate};

                switch (q) {
                    case Quantity::bound_gallager:
                    case Quantity::bound_rare: {
                        row.alpha = cp.alpha;
                        row.beta = cp.beta;
                        row.eps_g = cp.eps_g;
                        row.eps_b = cp.eps_b;
                        const auto [pi_g, pi_b] = stationary(cp);
                        std::function<Mat2(double)> table;
                        if (q == Quantity::bound_gallager) {
                            table = [&](double rho) { return bound_matrixpower(cp, code, rho); };
                        } else {
                            const auto [ra, rb] = spec.rates_at(n);
                            table = [&, ra = ra, rb = rb](double rho) {
                                return bound_rare(ra, rb, cp.eps_g, cp.eps_b, code, rho);
                            };
                        }
                        const BoundResult b = minimize_bound(table, pi_g, spec.rho_opt);
                        row.rho_star = b.rho_star;
                        detail::fill_entries(row, b.per_transition);
                        if (spec.averaging == Averaging::stationary) row.value = b.averaged;
                        break;
                    }
                    case Quantity::exact_md:
                    case Quantity::exact_ml: {
                        row.alpha = cp.alpha;
                        row.beta = cp.beta;
                        row.eps_g = cp.eps_g;
                        row.eps_b = cp.eps_b;
                        DecoderSpec dec{q == Quantity::exact_md ? DecodeRule::minimum_distance
                                                                : DecodeRule::maximum_likelihood,
                                        spec.ties};
                        const ExactResult e = ge_exact(cp, code, dec);
                        detail::fill_entries(row, e.per_transition);
                        if (spec.averaging == Averaging::stationary) row.value = e.averaged;
                        row.ties = to_string(spec.ties);
                        row.decoder = to_string(dec.rule);
                        break;
                    }
                    case Quantity::bsc: {
                        const double m = spec.explicit_m > 0.0 ? spec.explicit_m
                                                               : code.codebook_size();
                        row.value = bsc_exact(n, spec.bsc_p, m, spec.ties);
                        row.ties = to_string(spec.ties);
                        break;
                    }
                    case Quantity::occupancy: {
                        row.alpha = cp.alpha;
                        row.beta = cp.beta;
                        const OccupancyTable t = occupancy_pmf(cp, n);
                        Mat2 marg;
                        for (State a : kStates)
                            for (State b : kStates) marg(a, b) = t.final_state_marginal(a, b);
                        detail::fill_entries(row, marg);
                        break;
                    }
                    case Quantity::simulate: {
                        row.alpha = cp.alpha;
                        row.beta = cp.beta;
                        row.eps_g = cp.eps_g;
                        row.eps_b = cp.eps_b;
                        SimConfig sim;
                        sim.params = cp;
                        sim.n = n;
                        const double want_m = spec.explicit_m > 0.0
                                                  ? spec.explicit_m
                                                  : std::round(code.codebook_size());
                        if (want_m * double(n) > double(1 << 22))
                            throw std::invalid_argument(
                                "simulate: n*M exceeds the 2^22 cost guard; pass a small --M");
                        sim.m_codewords = static_cast<int>(want_m);
                        sim.decoder = DecoderSpec{spec.decoder, spec.ties};
                        sim.trials = spec.trials;
                        sim.seed = spec.seed;
                        const SimResult res = estimate(sim);
                        row.value = res.p_hat;
                        Mat2 cond;
                        bool all_present = true;
                        for (int i = 0; i < 2; ++i)
                            for (int j = 0; j < 2; ++j) {
                                if (res.transition_trials[i][j] > 0)
                                    cond.m[i][j] = double(res.transition_failures[i][j]) /
                                                   double(res.transition_trials[i][j]);
                                else
                                    all_present = false;
                            }
                        if (all_present) detail::fill_entries(row, cond);
                        row.ties = to_string(spec.ties);
                        row.decoder = to_string(spec.decoder);
                        row.seed = spec.seed;
                        break;
                    }
                }
                rows.push_back(std::move(row));
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.quantity != b.quantity) return a.quantity < b.quantity;
        if (a.n != b.n) return a.n < b.n;
        return a.rate_nats.value_or(-1.0) < b.rate_nats.value_or(-1.0);
    });
    return rows;
}

// RFC 4180: CRLF row terminators, fixed header. None of the emitted fields
// need quoting. Doubles carry 9 significant digits.
inline std::string render_csv(const std::vector<SweepRow>& rows) {
    auto opt = [](const std::optional<double>& v) {
        return v ? detail::format_double(*v) : std::string();
    };
    std::string out =
        "quantity,N,rate_nats,alpha,beta,eps_g,eps_b,rho_star,value,"
        "value_gg,value_gb,value_bg,value_bb,ties,decoder,seed\r\n";
    for (const SweepRow& r : rows) {
        out += r.quantity;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += opt(r.rate_nats) + ',' + opt(r.alpha) + ',' + opt(r.beta) + ',' +
               opt(r.eps_g) + ',' + opt(r.eps_b) + ',' + opt(r.rho_star) + ',' +
               opt(r.value) + ',' + opt(r.value_gg) + ',' + opt(r.value_gb) + ',' +
               opt(r.value_bg) + ',' + opt(r.value_bb) + ',' + r.ties + ',' + r.decoder + ',';
        if (r.seed) out += std::to_string(*r.seed);
        out += "\r\n";
    }
    return out;
}

}  // namespace gechan
