#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/qubo.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

struct AnnealSchedule {
    int sweeps = 20000;
    double t_initial = 0.0; // 0 = derive from the model (largest possible |dE|)
    double t_final = 0.05;
    int restarts = 8;
    std::uint64_t seed = 1;

    void validate() const {
        if (sweeps < 1)
            throw InvalidArgument("sweeps must be >= 1");
        if (restarts < 1)
            throw InvalidArgument("restarts must be >= 1");
        if (!(t_final > 0.0))
            throw InvalidArgument("final temperature must be positive");
        if (t_initial != 0.0 && t_initial < t_final)
            throw InvalidArgument("initial temperature must be >= final temperature");
    }
};

struct SolveResult {
    Assignment best_assignment;
    double best_energy = 0.0;
    std::vector<std::pair<Assignment, double>> samples; // per restart / per minimizer
    std::vector<double> trace;                          // best-so-far per sweep
    bool one_hot_valid = true;
    std::vector<Assignment> minimizers; // brute force only, ascending lexicographic
};

// Largest |dE| any single flip can produce: max_i (|L_i| + sum_j |Q_ij|).
inline double auto_initial_temperature(const QuboModel& model) {
    std::vector<double> reach(static_cast<std::size_t>(model.num_vars), 0.0);
    for (long i = 0; i < model.num_vars; ++i)
        reach[static_cast<std::size_t>(i)] = std::abs(model.linear[static_cast<std::size_t>(i)]);
    for (const auto& t : model.quadratic) {
        reach[t.i] += std::abs(t.value);
        reach[t.j] += std::abs(t.value);
    }
    double m = 0.0;
    for (double r : reach) m = std::max(m, r);
    return m;
}

// energy(flip_i(x)) - energy(x) in O(degree(i)).
inline double delta_energy(const QuboModel& model, const Assignment& x, long i) {
    if (static_cast<long>(x.size()) != model.num_vars)
        throw DimensionError("assignment length does not match model");
    if (i < 0 || i >= model.num_vars)
        throw IndexError("variable index out of range");
    double field = model.linear[static_cast<std::size_t>(i)];
    if (model.adj_start.size() == static_cast<std::size_t>(model.num_vars) + 1) {
        for (std::size_t a = model.adj_start[static_cast<std::size_t>(i)];
             a < model.adj_start[static_cast<std::size_t>(i) + 1]; ++a)
            if (x[model.adj[a].other]) field += model.adj[a].value;
    } else {
        // Model was never finalized; fall back to scanning the term list.
        for (const auto& t : model.quadratic) {
            if (t.i == i && x[t.j]) field += t.value;
            if (t.j == i && x[t.i]) field += t.value;
        }
    }
    return (1.0 - 2.0 * x[static_cast<std::size_t>(i)]) * field;
}

namespace detail {

// Local fields h_i = L_i + sum_j Q_ij x_j for the current assignment.
inline void init_fields(const QuboModel& model, const Assignment& x, std::vector<double>& h) {
    h.assign(model.linear.begin(), model.linear.end());
    for (const auto& t : model.quadratic) {
        if (x[t.j]) h[t.i] += t.value;
        if (x[t.i]) h[t.j] += t.value;
    }
}

// Propagates a flip of variable i (already applied to x) into the fields.
inline void update_fields(const QuboModel& model, const Assignment& x, long i,
                          std::vector<double>& h) {
    const double sign = x[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    for (std::size_t a = model.adj_start[static_cast<std::size_t>(i)];
         a < model.adj_start[static_cast<std::size_t>(i) + 1]; ++a)
        h[model.adj[a].other] += sign * model.adj[a].value;
}

struct RestartOutcome {
    Assignment best;
    double best_energy = 0.0;
    std::vector<double> trace;
};

inline RestartOutcome anneal_one(const QuboModel& model, int sweeps, double t0, double t1,
                                 std::uint64_t seed) {
    const long n = model.num_vars;
    SplitMix64 rng(seed);

    Assignment x(static_cast<std::size_t>(n));
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next_bit());

    std::vector<double> h;
    init_fields(model, x, h);
    double e = energy(model, x);

    RestartOutcome out;
    out.best = x;
    out.best_energy = e;
    out.trace.reserve(static_cast<std::size_t>(sweeps));

    Assignment cand = x;
    double cand_e = e;

    const double log_ratio = std::log(t1 / t0);
    for (int k = 0; k < sweeps; ++k) {
        const double t =
            (sweeps == 1) ? t0 : t0 * std::exp(log_ratio * (static_cast<double>(k) / (sweeps - 1)));
        bool cand_changed = false;
        for (long i = 0; i < n; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            const double d = (1.0 - 2.0 * x[ui]) * h[ui];
            bool accept;
            if (d <= 0.0) {
                accept = true;
            } else {
                // Uniform drawn only on uphill moves so the stream layout is
                // independent of floating-point accept outcomes downhill.
                accept = rng.next_double() < std::exp(-d / t);
            }
            if (accept) {
                x[ui] ^= 1u;
                e += d;
                update_fields(model, x, i, h);
                if (e < cand_e) {
                    cand_e = e;
                    cand = x;
                    cand_changed = true;
                }
            }
        }
        if (cand_changed) {
            const double exact = energy(model, cand);
            if (exact < out.best_energy) {
                out.best = cand;
                out.best_energy = exact;
            }
        }
        // Keep the running sum honest against drift from millions of deltas.
        if ((k & 255) == 255) e = energy(model, x);
        out.trace.push_back(out.best_energy);
    }
    return out;
}

} // namespace detail

// Metropolis single-bit-flip annealing under geometric cooling. Deterministic
// for a fixed (model, schedule): restart r uses seed + r, variables are swept
// in index order, and results merge by (energy, restart index).
inline SolveResult simulated_anneal(const QuboModel& model, const AnnealSchedule& sched) {
    sched.validate();
    if (model.num_vars < 1)
        throw InvalidArgument("model has no variables");
    if (model.adj_start.size() != static_cast<std::size_t>(model.num_vars) + 1)
        throw InvalidArgument("model must be finalized before solving");

    double t0 = sched.t_initial;
    if (t0 == 0.0) t0 = auto_initial_temperature(model);
    t0 = std::max(t0, sched.t_final);
    const double t1 = sched.t_final;

    std::vector<detail::RestartOutcome> outcomes(static_cast<std::size_t>(sched.restarts));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(sched.restarts)));

    auto run_range = [&](int w) {
        for (int r = w; r < sched.restarts; r += workers)
            outcomes[static_cast<std::size_t>(r)] =
                detail::anneal_one(model, sched.sweeps, t0, t1, sched.seed + static_cast<std::uint64_t>(r));
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& th : pool) th.join();
    }

    int best_r = 0;
    for (int r = 1; r < sched.restarts; ++r)
        if (outcomes[static_cast<std::size_t>(r)].best_energy <
            outcomes[static_cast<std::size_t>(best_r)].best_energy)
            best_r = r;

    SolveResult res;
    res.best_assignment = outcomes[static_cast<std::size_t>(best_r)].best;
    res.best_energy = outcomes[static_cast<std::size_t>(best_r)].best_energy;
    res.trace = std::move(outcomes[static_cast<std::size_t>(best_r)].trace);
    res.samples.reserve(static_cast<std::size_t>(sched.restarts));
    for (auto& o : outcomes) res.samples.emplace_back(std::move(o.best), o.best_energy);
    if (model.layout)
        res.one_hot_valid = one_hot_satisfied(res.best_assignment, *model.layout);
    return res;
}

// Exact minimization by Gray-code enumeration of all 2^n assignments.
// Returns every minimizer (energy within 1e-9 relative of the minimum, at
// most 64, ascending lexicographic); best_assignment is the first of them.
inline SolveResult brute_force(const QuboModel& model, int cap = 24) {
    if (model.num_vars > cap)
        throw TooLarge("model exceeds the brute-force variable cap");
    if (model.num_vars > 0 &&
        model.adj_start.size() != static_cast<std::size_t>(model.num_vars) + 1)
        throw InvalidArgument("model must be finalized before solving");

    const long n = model.num_vars;
    SolveResult res;
    if (n == 0) {
        res.best_assignment = {};
        res.best_energy = 0.0;
        res.samples.emplace_back(Assignment{}, 0.0);
        res.trace = {0.0};
        res.minimizers = {Assignment{}};
        return res;
    }

    Assignment x(static_cast<std::size_t>(n), 0);
    std::vector<double> h(model.linear.begin(), model.linear.end());
    double e = 0.0;

    double best = 0.0;
    auto gate = [&] { return 1e-9 * std::max(1.0, std::abs(best)); };
    std::vector<Assignment> candidates;
    candidates.push_back(x);

    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const long i = static_cast<long>(__builtin_ctzll(step));
        const std::size_t ui = static_cast<std::size_t>(i);
        e += (1.0 - 2.0 * x[ui]) * h[ui];
        x[ui] ^= 1u;
        detail::update_fields(model, x, i, h);

        // Incremental energy drifts over long runs; re-anchor periodically so
        // the candidate gate stays sharp.
        if ((step & 0xffffu) == 0u) e = energy(model, x);

        if (e <= best + gate()) {
            if (e < best) {
                best = e;
                const double g = gate();
                std::erase_if(candidates,
                              [&](const Assignment& c) { return energy(model, c) > best + g; });
            }
            if (candidates.size() < 4096) candidates.push_back(x);
        }
    }

    // Exact pass over the surviving candidates.
    double exact_min = energy(model, candidates.front());
    std::vector<double> exact(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        exact[c] = energy(model, candidates[c]);
        exact_min = std::min(exact_min, exact[c]);
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(exact_min));
    for (std::size_t c = 0; c < candidates.size(); ++c)
        if (exact[c] <= exact_min + tol) res.minimizers.push_back(std::move(candidates[c]));
    std::sort(res.minimizers.begin(), res.minimizers.end());
    if (res.minimizers.size() > 64) res.minimizers.resize(64);

    res.best_assignment = res.minimizers.front();
    res.best_energy = energy(model, res.best_assignment);
    res.trace = {res.best_energy};
    for (const auto& m : res.minimizers) res.samples.emplace_back(m, energy(model, m));
    if (model.layout)
        res.one_hot_valid = one_hot_satisfied(res.best_assignment, *model.layout);
    return res;
}

} // namespace qtomo
