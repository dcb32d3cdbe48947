#pragma once

// Monte Carlo link simulation: sample the channel state sequence, draw a
// fresh random codebook and noise per trial, decode with MD or ML using the
// known states, and aggregate failure counts. Per-trial RNG streams are
// derived from (seed, trial index), so results are bit-identical for a
// given config regardless of execution order.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gechan/exact.hpp"
#include "gechan/markov.hpp"

namespace gechan {

// splitmix64: tiny splittable generator; one stream per trial.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1) with 53 random bits
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }
    // uniform in {0, ..., bound-1} via rejection
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }
};

inline SplitMix64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
    // decorrelate the per-trial streams before splitmix's own mixing
    SplitMix64 g(seed ^ (0xA0761D6478BD642Full * (trial + 1)));
    g.next();
    return g;
}

enum class InitialState { good, bad, stationary };

struct SimConfig {
    ChannelParams params;
    int n = 0;
    int m_codewords = 0;
    DecoderSpec decoder;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    InitialState initial_state = InitialState::stationary;

    void validate() const {
        params.validate();
        if (n < 1) throw std::invalid_argument("SimConfig: n must be >= 1");
        if (m_codewords < 2) throw std::invalid_argument("SimConfig: need at least 2 codewords");
        if (trials < 1) throw std::invalid_argument("SimConfig: trials must be >= 1");
        if (decoder.ties == TiePolicy::union_bound)
            throw std::invalid_argument("SimConfig: union_bound is an analytic cap, not a decoder rule");
        if (decoder.rule == DecodeRule::maximum_likelihood)
            ml_gamma(params.eps_g, params.eps_b);  // rejects crossovers outside (0, 1/2)
        if (static_cast<std::int64_t>(n) * m_codewords > (1 << 22))
            throw std::invalid_argument(
                "SimConfig: cost guard n*m <= 2^22 exceeded (need " +
                std::to_string(static_cast<std::int64_t>(n) * m_codewords) + " codeword bits/trial)");
        if (initial_state == InitialState::stationary && params.alpha + params.beta <= 0.0)
            throw std::invalid_argument("SimConfig: stationary start needs alpha + beta > 0");
    }
};

struct StateSequence {
    std::vector<State> slots;  // s_0 .. s_{N-1}, governing the N symbols
    State final_state = State::good;

    int good_count() const {
        int c = 0;
        for (State s : slots) c += (s == State::good);
        return c;
    }
};

// Sample s_0 per the initial-state policy, then evolve the chain; the slot
// states govern emissions and s_N is reported separately.
inline StateSequence simulate_states(const ChannelParams& params, int n,
                                     InitialState initial, SplitMix64& rng) {
    StateSequence seq;
    seq.slots.resize(n);
    State s;
    switch (initial) {
        case InitialState::good: s = State::good; break;
        case InitialState::bad: s = State::bad; break;
        default: {
            const auto [pi_g, pi_b] = stationary(params);
            s = rng.next_double() < pi_g ? State::good : State::bad;
        }
    }
    for (int i = 0; i < n; ++i) {
        seq.slots[i] = s;
        const double flip = s == State::good ? params.alpha : params.beta;
        const double u = rng.next_double();
        if (s == State::good)
            s = u < flip ? State::bad : State::good;
        else
            s = u < flip ? State::good : State::bad;
    }
    seq.final_state = s;
    return seq;
}

struct TrialOutcome {
    bool failed = false;
    State s0 = State::good;
    State sN = State::good;
    int n_g = 0;
};

// One ensemble draw: M i.i.d. uniform codewords, codeword 1 transmitted
// through the per-slot BSC, MD/ML decoding against the known states.
inline TrialOutcome run_trial(const SimConfig& config, SplitMix64& rng) {
    const int n = config.n;
    const int m = config.m_codewords;
    const StateSequence seq = simulate_states(config.params, n, config.initial_state, rng);

    // codewords and noise as bit masks, one word per codeword (n <= 22)
    std::vector<std::uint32_t> codebook(m);
    for (int i = 0; i < m; ++i) {
        std::uint32_t w = 0;
        for (int b = 0; b < n; ++b) w |= static_cast<std::uint32_t>(rng.next() >> 63) << b;
        codebook[i] = w;
    }
    std::uint32_t noise = 0, good_mask = 0;
    for (int b = 0; b < n; ++b) {
        const double eps = config.params.eps(seq.slots[b]);
        if (rng.next_double() < eps) noise |= 1u << b;
        if (seq.slots[b] == State::good) good_mask |= 1u << b;
    }
    const std::uint32_t received = codebook[0] ^ noise;

    const bool ml = config.decoder.rule == DecodeRule::maximum_likelihood;
    const double gamma = ml ? ml_gamma(config.params.eps_g, config.params.eps_b) : 1.0;
    auto score = [&](std::uint32_t cw) {
        const std::uint32_t diff = cw ^ received;
        const int eg = __builtin_popcount(diff & good_mask);
        const int eb = __builtin_popcount(diff & ~good_mask & ((n == 32) ? ~0u : ((1u << n) - 1)));
        return ml ? gamma_ceil(gamma, eg) + eb : eg + eb;
    };

    int best = score(codebook[0]);
    int tied = 1;           // codewords attaining the minimum
    bool sent_is_best = true;
    for (int i = 1; i < m; ++i) {
        const int s = score(codebook[i]);
        if (s < best) {
            best = s;
            tied = 1;
            sent_is_best = false;
        } else if (s == best) {
            ++tied;
        }
    }

    TrialOutcome out;
    out.s0 = seq.slots[0];
    out.sN = seq.final_state;
    out.n_g = seq.good_count();
    if (!sent_is_best) {
        out.failed = true;
    } else if (tied > 1) {
        if (config.decoder.ties == TiePolicy::error)
            out.failed = true;
        else  // uniform among the tied minimizers; position 0 is the sent one
            out.failed = rng.next_below(tied) != 0;
    }
    return out;
}

struct SimResult {
    double p_hat = 0.0;
    double std_err = 0.0;
    std::int64_t trials = 0;
    std::int64_t failures = 0;
    std::int64_t transition_failures[2][2] = {{0, 0}, {0, 0}};
    std::int64_t transition_trials[2][2] = {{0, 0}, {0, 0}};
    std::vector<std::int64_t> occupancy_hist;  // counts of n_g
};

// Run the configured number of trials. Aggregation is pure counting, so
// any execution order gives the same result for a fixed seed.
inline SimResult estimate(const SimConfig& config) {
    config.validate();
    SimResult r;
    r.trials = config.trials;
    r.occupancy_hist.assign(static_cast<size_t>(config.n) + 1, 0);
    for (std::int64_t t = 0; t < config.trials; ++t) {
        SplitMix64 rng = trial_rng(config.seed, static_cast<std::uint64_t>(t));
        const TrialOutcome o = run_trial(config, rng);
        r.failures += o.failed;
        r.transition_trials[idx(o.s0)][idx(o.sN)] += 1;
        r.transition_failures[idx(o.s0)][idx(o.sN)] += o.failed;
        r.occupancy_hist[o.n_g] += 1;
    }
    r.p_hat = double(r.failures) / double(r.trials);
    r.std_err = std::sqrt(r.p_hat * (1.0 - r.p_hat) / double(r.trials));
    return r;
}

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Pearson goodness-of-fit of observed counts against expected
// probabilities; adjacent bins are pooled until every expected count
// reaches min_expected.
inline ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts,
                                      const std::vector<double>& probs,
                                      double min_expected = 5.0) {
    if (counts.size() != probs.size())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    std::vector<double> exp_bins, obs_bins;
    double e_acc = 0.0, o_acc = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        e_acc += probs[i] * double(total);
        o_acc += double(counts[i]);
        if (e_acc >= min_expected) {
            exp_bins.push_back(e_acc);
            obs_bins.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp_bins.empty()) {
            exp_bins.push_back(e_acc);
            obs_bins.push_back(o_acc);
        } else {
            exp_bins.back() += e_acc;
            obs_bins.back() += o_acc;
        }
    }
    ChiSquareResult r;
    r.dof = static_cast<int>(exp_bins.size()) - 1;
    for (size_t i = 0; i < exp_bins.size(); ++i) {
        const double d = obs_bins[i] - exp_bins[i];
        r.statistic += d * d / exp_bins[i];
    }
    r.p_value = r.dof >= 1 ? gamma_q(0.5 * double(r.dof), 0.5 * r.statistic) : 1.0;
    return r;
}

}  // namespace gechan
