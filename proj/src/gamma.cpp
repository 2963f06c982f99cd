#include "rwde/gamma.hpp"

#include <cmath>
#include <string>

#include "rwde/util.hpp"

namespace rwde {

namespace {

// Shared tree walk: per-path weights in log-space, linear compensated sum.
// probs_of(offset_id) returns the 2d transition probabilities at the
// corresponding interior site.
template <typename ProbsFn>
double path_weight_sum_log(const ExitPathSet& paths, ProbsFn&& probs_of) {
    KahanSum sum;
    std::vector<double> log_w(static_cast<std::size_t>(paths.max_depth) + 1, 0.0);
    for (const ExitPathSet::Node& node : paths.nodes) {
        const double p = probs_of(node.from_offset)[node.dir];
        log_w[node.depth] = log_w[node.depth - 1] + std::log(p);
        if (node.exit) sum.add(std::exp(log_w[node.depth]));
    }
    return sum.value();
}

// Direct-product variant for dense sweeps: one multiply per node.
template <typename ProbsFn>
double path_weight_sum_direct(const ExitPathSet& paths, ProbsFn&& probs_of) {
    KahanSum sum;
    std::vector<double> w(static_cast<std::size_t>(paths.max_depth) + 1, 1.0);
    for (const ExitPathSet::Node& node : paths.nodes) {
        const double p = probs_of(node.from_offset)[node.dir];
        w[node.depth] = w[node.depth - 1] * p;
        if (node.exit) sum.add(w[node.depth]);
    }
    return sum.value();
}

}  // namespace

double gamma_exact(const LatticeEnvironment& env, const Site& x,
                   const ExitPathSet& paths) {
    const int d = env.d();
    std::vector<const double*> table(paths.offsets.size());
    for (std::size_t i = 0; i < paths.offsets.size(); ++i) {
        Site site = x;
        for (int k = 0; k < d; ++k) site.c[k] += paths.offsets[i].c[k];
        table[i] = env.probs_ptr(site);
    }
    const double sum = path_weight_sum_log(paths, [&](std::int32_t id) { return table[id]; });
    return 1.0 / sum;
}

double gamma_exact(const LatticeEnvironment& env, const Site& x,
                   const NeighborhoodSet& lambda) {
    return gamma_exact(env, x, enumerate_exit_paths(lambda, env.d()));
}

double gamma_exact_with(const ExitPathSet& paths,
                        const std::function<const double*(std::int32_t)>& probs_of) {
    const double sum = path_weight_sum_log(paths, probs_of);
    return 1.0 / sum;
}

namespace {

// Probability table for one torus start site: pointer per interior offset,
// wrapped periodically.
void torus_probs_table(const TorusEnvironment& env, std::size_t idx,
                       const ExitPathSet& paths,
                       std::vector<const double*>& table) {
    const int d = env.d();
    std::array<int, kMaxDim> base{};
    env.coords_of(idx, std::span<int>(base.data(), static_cast<std::size_t>(d)));
    std::array<int, kMaxDim> coords{};
    table.resize(paths.offsets.size());
    for (std::size_t i = 0; i < paths.offsets.size(); ++i) {
        for (int k = 0; k < d; ++k) coords[k] = base[k] + paths.offsets[i].c[k];
        table[i] = env.probs_ptr(
            env.index_of(std::span<const int>(coords.data(), static_cast<std::size_t>(d))));
    }
}

}  // namespace

double gamma_exact_torus(const TorusEnvironment& env, std::size_t idx,
                         const ExitPathSet& paths) {
    std::vector<const double*> table;
    torus_probs_table(env, idx, paths, table);
    const double sum = path_weight_sum_log(paths, [&](std::int32_t id) { return table[id]; });
    return 1.0 / sum;
}

std::vector<double> gamma_all_torus(const TorusEnvironment& env,
                                    const ExitPathSet& paths, unsigned threads) {
    std::vector<double> out(env.n_sites());
    parallel_for(env.n_sites(), threads, [&](std::size_t idx) {
        std::vector<const double*> table;
        torus_probs_table(env, idx, paths, table);
        const double sum =
            path_weight_sum_direct(paths, [&](std::int32_t id) { return table[id]; });
        out[idx] = 1.0 / sum;
    });
    return out;
}

// ---------------------------------------------------------------- monte carlo

std::uint64_t gamma_mc_stream(const LatticeEnvironment& env, const Site& x) {
    return derive_stream(env.master_seed(), kTagGammaMc,
                         std::span<const std::int32_t>(x.c.data(),
                                                       static_cast<std::size_t>(env.d())));
}

namespace {

// One chain from x until it leaves x+Lambda; true when no site repeats.
// Sites are tracked relative to x by neighborhood vertex id.
bool simple_exit_trial(const LatticeEnvironment& env, const Site& x,
                       const NeighborhoodSet& lambda, Rng& rng,
                       std::vector<char>& visited) {
    const int d = env.d();
    std::fill(visited.begin(), visited.end(), 0);
    Site rel{};  // position relative to x
    int rel_id = lambda.index_of(rel);
    visited[rel_id] = 1;
    for (;;) {
        Site abs = x;
        for (int k = 0; k < d; ++k) abs.c[k] += rel.c[k];
        const double* probs = env.probs_ptr(abs);
        double u = rng.uniform01();
        int dir = 2 * d - 1;
        for (int i = 0; i < 2 * d; ++i) {
            u -= probs[i];
            if (u < 0.0) {
                dir = i;
                break;
            }
        }
        rel = step(rel, dir, d);
        rel_id = lambda.index_of(rel);
        if (rel_id < 0) return true;      // exited, still simple
        if (visited[rel_id]) return false;  // self-intersection inside Lambda
        visited[rel_id] = 1;
    }
}

GammaEstimate estimate_from_counts(std::size_t successes, std::size_t trials) {
    GammaEstimate est;
    est.trials = trials;
    if (successes == 0) {
        throw EstimateError(
            "gamma_mc: no simple exit in " + std::to_string(trials) +
            " trials (heavy-tail site); estimate unavailable");
    }
    const double p = static_cast<double>(successes) / static_cast<double>(trials);
    est.p_hat = p;
    est.estimate = 1.0 / p;
    // Delta method: Var(1/p_hat) ~ p(1-p)/(n p^4). Two-sided 99.5% level.
    const double z = 2.807;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) / (p * p);
    est.ci_low = est.estimate - z * se;
    est.ci_high = est.estimate + z * se;
    est.low_p = p < kGammaMcLowPFloor;
    return est;
}

}  // namespace

GammaEstimate gamma_mc(const LatticeEnvironment& env, const Site& x,
                       const NeighborhoodSet& lambda, std::size_t trials,
                       std::uint64_t stream_seed) {
    if (lambda.d() != env.d()) throw ConfigError("gamma_mc: dimension mismatch");
    Rng rng(stream_seed);
    std::vector<char> visited(lambda.size());
    const bool adaptive = trials == 0;
    std::size_t target = adaptive ? kGammaMcDefaultTrials : trials;
    std::size_t done = 0, successes = 0;
    for (; done < target; ++done) {
        if (simple_exit_trial(env, x, lambda, rng, visited)) ++successes;
    }
    if (adaptive &&
        static_cast<double>(successes) <
            kGammaMcLowPFloor * static_cast<double>(target)) {
        target = kGammaMcEscalatedTrials;
        for (; done < target; ++done) {
            if (simple_exit_trial(env, x, lambda, rng, visited)) ++successes;
        }
    }
    return estimate_from_counts(successes, target);
}

// ---------------------------------------------------------------- provider

GammaProvider::GammaProvider(const LatticeEnvironment& env,
                             const NeighborhoodSet& lambda, GammaMode mode,
                             std::size_t node_budget)
    : env_(env), lambda_(lambda) {
    if (mode == GammaMode::kMonteCarlo) {
        exact_ = false;
        return;
    }
    try {
        paths_ = enumerate_exit_paths(lambda, env.d(), node_budget);
        exact_ = true;
    } catch (const BudgetError&) {
        if (mode == GammaMode::kExact) throw;
        exact_ = false;  // gamma_mc is the designated fallback
    }
}

double GammaProvider::at(const Site& x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    double value;
    if (exact_) {
        value = gamma_exact(env_, x, paths_);
    } else {
        value = gamma_mc(env_, x, lambda_, 0, gamma_mc_stream(env_, x)).estimate;
    }
    cache_.emplace(x, value);
    return value;
}

}  // namespace rwde
