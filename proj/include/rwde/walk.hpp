#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/gamma.hpp"
#include "rwde/lattice.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// ---------------------------------------------------------------- trajectory

// A simulated walk. positions always holds Z_0..Z_n; the time-change fields
// are filled only by accelerated runs. The holding time at Z_{k-1} is
// exp_draws[k-1] / gamma_values[k-1], and jump_times[k] is the prefix sum,
// so jump_times has the same length as positions with jump_times[0] = 0.
struct Trajectory {
    int d = 0;  // lattice dimension; directions in queries refer to it
    std::vector<Site> positions;
    std::vector<double> jump_times;    // empty for discrete-only runs
    std::vector<double> exp_draws;     // E_k, one per completed step
    std::vector<double> gamma_values;  // gamma at each departed site
};

inline constexpr std::size_t kDefaultSiteBudget = 10'000'000;

// ---------------------------------------------------------------- simulation

// Discrete chain: Z_{k+1} drawn from the site's probabilities by
// inverse-CDF over the fixed direction order. One uniform per step from the
// direction stream derived off (env seed, stream_seed).
Trajectory run_discrete(const LatticeEnvironment& env, std::size_t n_steps,
                        const Site& start, std::uint64_t stream_seed,
                        std::size_t site_budget = kDefaultSiteBudget);

// Streaming discrete variant: on_step(step_index, site) after every step;
// returning false stops the run early (first-passage sweeps stop at their
// top level instead of burning the full horizon). Same stream derivation as
// run_discrete, so both visit the same path for the same stream_seed.
void stream_discrete(const LatticeEnvironment& env, std::size_t n_steps,
                     const Site& start, std::uint64_t stream_seed,
                     const std::function<bool(std::size_t, const Site&)>& on_step,
                     std::size_t site_budget = kDefaultSiteBudget);

// Accelerated chain: same embedded discrete path for the same stream_seed
// (direction and clock draws come from separate substreams, so adding the
// clock cannot perturb the path). Holding time at Z_k is E_k / gamma(Z_k);
// stops at the first jump time >= horizon_T. A gamma estimation failure is
// rethrown as EstimateError naming the site and the environment seed.
Trajectory run_accelerated(const LatticeEnvironment& env,
                           const NeighborhoodSet& lambda, double horizon_T,
                           const Site& start, std::uint64_t stream_seed,
                           std::size_t site_budget = kDefaultSiteBudget,
                           GammaMode mode = GammaMode::kAuto);

// Streaming variant for long runs: invokes on_step(step_index, site, t)
// after every jump without retaining the trajectory. Used by the
// heavy-horizon experiments. Stops after max_steps steps or at horizon_T
// (whichever first; pass an unreachable horizon to run by steps).
void stream_accelerated(const LatticeEnvironment& env,
                        const NeighborhoodSet& lambda, double horizon_T,
                        std::size_t max_steps, const Site& start,
                        std::uint64_t stream_seed,
                        const std::function<void(std::size_t, const Site&, double)>& on_step,
                        std::size_t site_budget = kDefaultSiteBudget,
                        GammaMode mode = GammaMode::kAuto);

// ---------------------------------------------------------------- time change

// A(t) = integral of gamma along the trajectory up to time t; piecewise
// linear, A(jump_times[n]) = sum of the first n exponential draws exactly
// (each holding interval contributes gamma * E/gamma = E). Throws
// ConfigError for t outside [0, last jump time].
double time_change_A(const Trajectory& traj, double t);

// ---------------------------------------------------------------- hitting

// First-passage record along a direction: T_n = first index (discrete) or
// jump time (accelerated) with Z_i . l >= n. Levels never reached within
// the horizon are censored.
struct HittingRecord {
    int dir = 0;
    std::vector<double> times;       // per level 0..levels
    std::vector<std::uint8_t> censored;
};

HittingRecord hitting_times(const Trajectory& traj, int dir, int levels,
                            bool continuous_time);

// ---------------------------------------------------------------- exit times

// Exit times of two-site slabs along an axis: Theta_0 is the number of
// steps after which the walk first stands outside {Z_0, Z_0 + e}, with the
// convention Theta_0 = max(first exit index - 1, 1) pinned by the
// closed-form tail (immediate exit gives 1). Theta_k repeats the
// construction afresh at the hitting time of level 2k. Censored entries
// (level never hit, or no exit before the horizon) are absent.
std::vector<std::size_t> theta_exit_times(const Trajectory& traj, int dir);

// Closed-form tail. Theta_0 >= n (n >= 2) means the first n steps bounce
// inside the slab, alternating +e_1 from one site and -e_1 from the other;
// the two sites are independent, so
//   P(Theta_0 >= n) = E[w(+e_1)^ceil(n/2)] * E[w(-e_1)^floor(n/2)],
// a product of two one-coordinate annealed moments, evaluated in log-Gamma
// space. n = 1 gives exactly 1.
double closed_form_theta_tail(const Weights& w, std::size_t n);

// ---------------------------------------------------------------- renewals

// Two-sided record points: index i is a renewal when Z_i . l strictly
// exceeds every earlier value and no later value (within the horizon) falls
// below it. Indices in the last tenth of the horizon are flagged
// provisional; gap statistics exclude them (right-censoring guard).
struct RenewalRecord {
    std::vector<std::size_t> indices;
    std::vector<std::uint8_t> provisional;
    // Level gaps (Z_{tau_{i+1}} - Z_{tau_i}) . l between consecutive
    // non-provisional renewals.
    std::vector<int> level_gaps;
};

RenewalRecord renewal_times(const Trajectory& traj, int dir);

// ---------------------------------------------------------------- excursions

// Max displacement along dir's axis within the unit time window [n, n+1]:
// max over jump times t in the window of |(X_t - X_n) . l|, where X_n is
// the position at time n. Throws ConfigError when the trajectory does not
// cover [n, n+1].
double excursion_max(const Trajectory& traj, int dir, double window_start);

}  // namespace rwde
