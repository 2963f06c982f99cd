#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/exit_paths.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// ---------------------------------------------------------------- exact
//
// Acceleration gamma(x) = 1 / sum over simple exit paths of the path's
// transition-probability product. Each path weight is accumulated in
// log-space; path weights are summed in linear space with compensated
// summation. The sum is a probability in (0, 1], so 1 <= gamma < inf for
// every elliptic environment.

double gamma_exact(const LatticeEnvironment& env, const Site& x,
                   const ExitPathSet& paths);
// Convenience overload: enumerates the path set first (budget applies).
double gamma_exact(const LatticeEnvironment& env, const Site& x,
                   const NeighborhoodSet& lambda);

// Torus environments are periodic lattice environments, so the path tree is
// the lattice tree and only the probability lookup wraps.
double gamma_exact_torus(const TorusEnvironment& env, std::size_t idx,
                         const ExitPathSet& paths);

// Exact evaluation against an arbitrary probability source: probs_of(id)
// returns the 2d transition probabilities of the interior site
// paths.offsets[id]. Serves handcrafted environments in checks and tools.
double gamma_exact_with(const ExitPathSet& paths,
                        const std::function<const double*(std::int32_t)>& probs_of);

// Dense sweep over every torus site. Uses direct product accumulation per
// node (one multiply per edge, no per-path log), which agrees with
// gamma_exact to ~1e-12 relative; the agreement is pinned by tests. This is
// the hot path of the invariant-density experiments.
std::vector<double> gamma_all_torus(const TorusEnvironment& env,
                                    const ExitPathSet& paths,
                                    unsigned threads = 1);

// ---------------------------------------------------------------- monte carlo
//
// Probabilistic estimator for neighborhoods too large to enumerate: gamma is
// 1 / P(the chain started at x exits x+Lambda before revisiting any site).
// p_hat is that probability's empirical frequency; the interval is the
// delta-method CI for 1/p_hat at the 99.5% two-sided level.
struct GammaEstimate {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_hat = 0.0;
    std::size_t trials = 0;
    bool low_p = false;  // p_hat fell below the trial-escalation floor
};

inline constexpr std::size_t kGammaMcDefaultTrials = 10'000;
inline constexpr std::size_t kGammaMcEscalatedTrials = 100'000;
inline constexpr double kGammaMcLowPFloor = 0.05;

// Runs trials chains from x. When trials == 0, uses the adaptive default:
// 10^4 trials, escalated to 10^5 if p_hat < 0.05. Throws EstimateError when
// no trial exits simply (heavy-tail site). Pure function of
// (env, x, lambda, trials, stream_seed).
GammaEstimate gamma_mc(const LatticeEnvironment& env, const Site& x,
                       const NeighborhoodSet& lambda, std::size_t trials,
                       std::uint64_t stream_seed);

// Stream seed convention making the estimate a pure function of (env, x):
// derived from the environment's master seed, the Monte Carlo tag, and x.
std::uint64_t gamma_mc_stream(const LatticeEnvironment& env, const Site& x);

// ---------------------------------------------------------------- provider

// Route selection for the per-walk gamma source. kAuto prefers exact
// enumeration and falls back to gamma_mc past the node budget; the forced
// modes exist for experiments that must exercise one estimator.
enum class GammaMode { kAuto, kExact, kMonteCarlo };

// Per-walk memoized gamma source. Exact evaluation goes through a shared
// immutable path tree. Single-writer: owned by one trajectory simulation.
class GammaProvider {
  public:
    GammaProvider(const LatticeEnvironment& env, const NeighborhoodSet& lambda,
                  GammaMode mode = GammaMode::kAuto,
                  std::size_t node_budget = kDefaultNodeBudget);

    // Memoized gamma at x. Exact route when selected, else gamma_mc point
    // estimate (errors from the estimator propagate, carrying the site).
    double at(const Site& x);

    bool exact_route() const { return exact_; }
    const ExitPathSet* paths() const { return exact_ ? &paths_ : nullptr; }

  private:
    const LatticeEnvironment& env_;
    const NeighborhoodSet& lambda_;
    bool exact_ = false;
    ExitPathSet paths_;
    std::unordered_map<Site, double, SiteHash> cache_;
};

}  // namespace rwde
