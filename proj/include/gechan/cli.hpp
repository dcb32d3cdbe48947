#pragma once

// Command-line front end. Parses flags (or a fig2/fig3 preset), builds a
// SweepSpec, runs it, and writes the CSV plus a <out>.meta.json sidecar
// describing the configuration and numeric conventions. Invalid parameter
// combinations exit nonzero with one machine-parseable "error: ..." line.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gechan/sweep.hpp"

namespace gechan::cli {

namespace detail {

struct Options {
    std::string preset;
    std::string quantity;
    std::vector<double> rates;
    std::vector<int> blocklengths;
    double alpha = -1.0, beta = -1.0;
    double n_alpha = -1.0, n_beta = -1.0;
    double eps_g = -1.0, eps_b = -1.0;
    std::string rate_unit = "nats";
    std::string decoder = "md";
    std::string ties = "error";
    std::string averaging = "stationary";
    std::string rho_opt = "per-entry";
    double p = -1.0;
    double m = 0.0;
    std::int64_t trials = 10000;
    std::uint64_t seed = 0;
    std::string out;
};

inline Quantity parse_quantity(const std::string& s) {
    if (s == "bound_gallager") return Quantity::bound_gallager;
    if (s == "bound_rare") return Quantity::bound_rare;
    if (s == "exact_md") return Quantity::exact_md;
    if (s == "exact_ml") return Quantity::exact_ml;
    if (s == "bsc") return Quantity::bsc;
    if (s == "occupancy") return Quantity::occupancy;
    if (s == "simulate") return Quantity::simulate;
    throw CLI::ValidationError("--quantity", "unknown quantity '" + s + "'");
}

inline std::vector<double> figure_rate_grid() {
    std::vector<double> r;
    for (int i = 0; i <= 10; ++i) r.push_back(0.25 + 0.05 * i);
    return r;
}

inline nlohmann::json conventions_json(const SweepSpec& spec) {
    nlohmann::json c;
    c["averaging_weights"] = "stationary pi = (beta, alpha) / (alpha + beta), final state summed";
    c["m_rounding"] =
        "codebook size M = exp(N R); tie-corrected combinatorics round to max(2, round(M)); "
        "other policies use the real competitor count M - 1";
    c["occupancy_convention"] = "n_g counts the emission slots s_0 .. s_{N-1}";
    c["rate_internal"] = "nats per symbol; bits inputs are converted by ln 2";
    c["rho_optimization"] =
        spec.rho_opt == RhoOptimization::per_entry
            ? "rho minimized per (s0,sN) entry, then averaged"
            : "rho minimized once for the stationary-averaged scalar";
    c["tie_policy"] = to_string(spec.ties);
    return c;
}

}  // namespace detail

// Runs the sweep described by args (without the program name). Returns the
// process exit status.
inline int run(std::vector<std::string> args) {
    using detail::Options;
    Options o;
    CLI::App app{"Random-block-code failure probability over the Gilbert-Elliott channel"};
    app.add_option("preset", o.preset, "figure preset: fig2 or fig3")
        ->check(CLI::IsMember({"fig2", "fig3"}));
    app.add_option("--quantity", o.quantity,
                   "bound_gallager|bound_rare|exact_md|exact_ml|bsc|occupancy|simulate");
    app.add_option("--rates", o.rates, "code rates (comma list)")->delimiter(',');
    app.add_option("--N", o.blocklengths, "block lengths (comma list)")->delimiter(',');
    app.add_option("--alpha", o.alpha, "g->b transition probability (fixed scaling)");
    app.add_option("--beta", o.beta, "b->g transition probability (fixed scaling)");
    app.add_option("--n-alpha", o.n_alpha, "rate constant N*alpha (rare-transition scaling)");
    app.add_option("--n-beta", o.n_beta, "rate constant N*beta (rare-transition scaling)");
    app.add_option("--eps-g", o.eps_g, "good-state crossover probability");
    app.add_option("--eps-b", o.eps_b, "bad-state crossover probability");
    app.add_option("--rate-unit", o.rate_unit, "rate unit of --rates")
        ->check(CLI::IsMember({"nats", "bits"}));
    app.add_option("--decoder", o.decoder, "decoder for simulate")
        ->check(CLI::IsMember({"md", "ml"}));
    app.add_option("--ties", o.ties, "tie policy")
        ->check(CLI::IsMember({"error", "random", "union"}));
    app.add_option("--averaging", o.averaging, "value column averaging")
        ->check(CLI::IsMember({"stationary", "per-transition"}));
    app.add_option("--rho-opt", o.rho_opt, "order of rho minimization vs averaging")
        ->check(CLI::IsMember({"per-entry", "averaged"}));
    app.add_option("--p", o.p, "BSC crossover probability (quantity=bsc)");
    app.add_option("--M", o.m, "explicit codebook size (bsc, simulate)");
    app.add_option("--trials", o.trials, "Monte Carlo trials");
    app.add_option("--seed", o.seed, "Monte Carlo seed");
    app.add_option("--out", o.out, "output CSV path (stdout if omitted)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    constexpr double kLn2 = 0.6931471805599453;
    SweepSpec spec;
    std::string rate_unit_input = o.rate_unit;
    try {
        if (o.preset == "fig2") {
            // Bound comparison grid. The rate constants (4, 6) reproduce the
            // published coordinates; see README for the parameter discussion.
            spec.quantities = {Quantity::bound_gallager, Quantity::bound_rare};
            spec.scaling = Scaling::rare_n_alpha_beta;
            spec.n_alpha = 4.0;
            spec.n_beta = 6.0;
            spec.eps_g = 0.01;
            spec.eps_b = 0.1;
            spec.blocklengths = {50, 75, 100};
            if (!app.count("--rate-unit")) rate_unit_input = "bits";
            spec.rates_nats = detail::figure_rate_grid();
        } else if (o.preset == "fig3") {
            // Exact-vs-bound grid at fixed per-symbol transition probabilities.
            // The published exact curves follow the union-bound conditional.
            spec.quantities = {Quantity::exact_ml, Quantity::exact_md, Quantity::bound_rare};
            spec.scaling = Scaling::fixed_alpha_beta;
            spec.alpha = 0.0533;
            spec.beta = 0.08;
            spec.eps_g = 0.01;
            spec.eps_b = 0.1;
            spec.blocklengths = {50, 75};
            spec.ties = TiePolicy::union_bound;
            if (!app.count("--rate-unit")) rate_unit_input = "bits";
            spec.rates_nats = detail::figure_rate_grid();
        }

        if (app.count("--quantity") || o.preset.empty()) {
            if (o.quantity.empty()) throw std::invalid_argument("--quantity (or a preset) is required");
            spec.quantities = {detail::parse_quantity(o.quantity)};
        }
        if (app.count("--N")) spec.blocklengths = o.blocklengths;
        if (app.count("--rates")) spec.rates_nats = o.rates;
        if (app.count("--ties")) {
            if (o.ties == "error") spec.ties = TiePolicy::error;
            else if (o.ties == "random") spec.ties = TiePolicy::random_among_best;
            else spec.ties = TiePolicy::union_bound;
        }
        if (app.count("--decoder"))
            spec.decoder = o.decoder == "md" ? DecodeRule::minimum_distance
                                             : DecodeRule::maximum_likelihood;
        spec.averaging = o.averaging == "stationary" ? Averaging::stationary
                                                     : Averaging::per_transition;
        spec.rho_opt = o.rho_opt == "per-entry" ? RhoOptimization::per_entry
                                                : RhoOptimization::averaged;
        if (app.count("--eps-g")) spec.eps_g = o.eps_g;
        if (app.count("--eps-b")) spec.eps_b = o.eps_b;
        if (app.count("--alpha") || app.count("--beta")) {
            if (app.count("--n-alpha") || app.count("--n-beta"))
                throw std::invalid_argument("give either --alpha/--beta or --n-alpha/--n-beta");
            spec.scaling = Scaling::fixed_alpha_beta;
            spec.alpha = o.alpha;
            spec.beta = o.beta;
        } else if (app.count("--n-alpha") || app.count("--n-beta")) {
            spec.scaling = Scaling::rare_n_alpha_beta;
            spec.n_alpha = o.n_alpha;
            spec.n_beta = o.n_beta;
        }
        spec.bsc_p = o.p;
        spec.explicit_m = o.m;
        spec.trials = o.trials;
        spec.seed = o.seed;

        if (rate_unit_input == "bits")
            for (double& r : spec.rates_nats) r *= kLn2;

        // Parameter-combination validation before any computation.
        if (spec.blocklengths.empty()) throw std::invalid_argument("--N is required");
        for (int n : spec.blocklengths)
            if (n < 1) throw std::invalid_argument("block lengths must be >= 1");
        bool needs_rates = false, needs_channel = false, needs_eps = false;
        for (Quantity q : spec.quantities) {
            needs_rates |= q != Quantity::occupancy &&
                           !(q == Quantity::bsc && spec.explicit_m > 0.0) &&
                           !(q == Quantity::simulate && spec.explicit_m > 0.0);
            needs_channel |= q != Quantity::bsc;
            needs_eps |= q != Quantity::bsc && q != Quantity::occupancy;
            if (q == Quantity::bsc && !(spec.bsc_p >= 0.0 && spec.bsc_p <= 0.5))
                throw std::invalid_argument("quantity bsc requires --p in [0, 0.5]");
            if (q == Quantity::simulate) {
                if (spec.explicit_m < 2.0)
                    throw std::invalid_argument("quantity simulate requires --M >= 2");
                if (spec.ties == TiePolicy::union_bound)
                    throw std::invalid_argument(
                        "ties=union is an analytic cap, not a simulable decoder rule");
            }
        }
        if (needs_rates && spec.rates_nats.empty())
            throw std::invalid_argument("--rates is required for this quantity");
        if (spec.rates_nats.empty()) spec.rates_nats = {0.0};  // occupancy-only sweeps
        for (double r : spec.rates_nats)
            if (needs_rates && !(r > 0.0)) throw std::invalid_argument("rates must be positive");
        if (needs_channel) {
            if (spec.scaling == Scaling::fixed_alpha_beta &&
                !(spec.alpha >= 0.0 && spec.alpha <= 1.0 && spec.beta >= 0.0 && spec.beta <= 1.0))
                throw std::invalid_argument("--alpha/--beta in [0,1] (or --n-alpha/--n-beta) required");
            if (spec.scaling == Scaling::rare_n_alpha_beta &&
                !(spec.n_alpha >= 0.0 && spec.n_beta >= 0.0))
                throw std::invalid_argument("--n-alpha/--n-beta must be nonnegative");
        }
        if (needs_eps && !(spec.eps_g >= 0.0 && spec.eps_g < 0.5 && spec.eps_b >= 0.0 &&
                           spec.eps_b < 0.5 && spec.eps_g <= spec.eps_b))
            throw std::invalid_argument("--eps-g <= --eps-b in [0, 0.5) required");

        const std::vector<SweepRow> rows = run_sweep(spec);
        const std::string csv = render_csv(rows);

        if (o.out.empty()) {
            std::cout << csv;
            return 0;
        }
        {
            std::ofstream f(o.out, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open output file " + o.out);
            f << csv;
            if (!f) {
                f.close();
                std::remove(o.out.c_str());
                throw std::runtime_error("failed writing " + o.out);
            }
        }
        nlohmann::json meta;
        meta["averaging"] = o.averaging;
        meta["blocklengths"] = spec.blocklengths;
        meta["conventions"] = detail::conventions_json(spec);
        meta["csv"] = o.out;
        meta["decoder"] = to_string(spec.decoder);
        meta["eps_b"] = spec.eps_b;
        meta["eps_g"] = spec.eps_g;
        if (spec.scaling == Scaling::fixed_alpha_beta) {
            meta["alpha"] = spec.alpha;
            meta["beta"] = spec.beta;
            meta["scaling"] = "fixed_alpha_beta";
        } else {
            meta["n_alpha"] = spec.n_alpha;
            meta["n_beta"] = spec.n_beta;
            meta["scaling"] = "rare_n_alpha_beta";
        }
        if (!o.preset.empty()) meta["preset"] = o.preset;
        std::vector<std::string> qnames;
        for (Quantity q : spec.quantities) qnames.push_back(to_string(q));
        meta["quantities"] = qnames;
        meta["rate_unit_input"] = rate_unit_input;
        meta["rates_nats"] = spec.rates_nats;
        meta["rho_opt"] = o.rho_opt;
        meta["seed"] = spec.seed;
        meta["ties"] = to_string(spec.ties);
        meta["trials"] = spec.trials;
        if (spec.bsc_p >= 0.0) meta["p"] = spec.bsc_p;
        if (spec.explicit_m > 0.0) meta["M"] = spec.explicit_m;

        const std::string meta_path = o.out + ".meta.json";
        std::ofstream mf(meta_path, std::ios::binary);
        if (!mf) {
            std::remove(o.out.c_str());
            throw std::runtime_error("cannot open sidecar " + meta_path);
        }
        mf << meta.dump(2) << "\n";
        if (!mf) {
            mf.close();
            std::remove(o.out.c_str());
            std::remove(meta_path.c_str());
            throw std::runtime_error("failed writing " + meta_path);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!o.out.empty()) std::remove(o.out.c_str());
        return 2;
    }
}

inline int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

}  // namespace gechan::cli
