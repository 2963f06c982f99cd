#pragma once

#include <cstdint>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/exit_paths.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// ---------------------------------------------------------------- stationary

// Stationary distribution of the discrete chain on the torus: pi P = pi,
// sum pi = 1, entries positive. residual is max_y |(pi P)(y) - pi(y)|.
struct StationaryDistribution {
    std::vector<double> pi;
    double residual = 0.0;
    int iterations = 0;   // 0 for the dense direct solve
    bool dense = false;
};

inline constexpr std::size_t kDenseSolveLimit = 4096;
inline constexpr double kStationaryTol = 1e-12;
inline constexpr std::size_t kPowerIterSweeps = 1'000'000;

// Dense LU on the transposed system (normalization row replacing one
// equation) for n_sites <= 4096; power iteration with Aitken extrapolation
// beyond. Throws EstimateError if iteration misses 1e-12 within 10^6 sweeps.
StationaryDistribution stationary_distribution(const TorusEnvironment& env);

// ---------------------------------------------------------------- accelerated

// Invariant data of the accelerated chain: pi_tilde(y) proportional to
// pi(y)/gamma(y), plus the per-site gamma values and the worst generator
// balance defect max_y |sum_x pi_tilde(x) gamma(x) omega(x,y) -
// pi_tilde(y) gamma(y)|.
struct AcceleratedInvariant {
    std::vector<double> pi_tilde;
    std::vector<double> gamma;
    double balance_residual = 0.0;
};

AcceleratedInvariant accelerated_invariant(const TorusEnvironment& env,
                                           const StationaryDistribution& pi,
                                           const ExitPathSet& paths,
                                           unsigned threads = 1);

// f_N = N^d * pi_tilde(0): the density of the accelerated invariant measure
// against the flat measure, evaluated at the origin. Mean 1 over
// environments by translation invariance.
double density_f_N(const TorusEnvironment& env, const AcceleratedInvariant& inv);

// ---------------------------------------------------------------- L_p trend

// Monte Carlo moments of f_N over independent environments. The raw mean of
// f_N^p sits next to a winsorized variant (top 0.1% clamped) because f_N^p
// is heavy-tailed for p near kappa^Lambda; both are reported.
struct LpEstimate {
    double raw_mean = 0.0;
    double raw_ci_low = 0.0;
    double raw_ci_high = 0.0;
    double winsorized_mean = 0.0;
    double winsorized_ci_low = 0.0;
    double winsorized_ci_high = 0.0;
    std::size_t n_envs = 0;
    // Worst solver defects across the environment batch; the density
    // experiments gate on these staying at solver precision.
    double max_pi_residual = 0.0;
    double max_balance_residual = 0.0;
    // Per-environment rows for CSV emission: {seed_index, f_N, gamma_0}.
    std::vector<double> f_values;
    std::vector<double> gamma0_values;
};

LpEstimate lp_norm_estimate(const Weights& w, int N, double p,
                            const NeighborhoodSet& lambda, std::size_t n_envs,
                            std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------------- divergence

// Edge field on the torus: value per (site, direction).
struct EdgeFunction {
    std::size_t n_sites = 0;
    int two_d = 0;
    std::vector<double> values;  // n_sites * two_d, direction fastest

    double& at(std::size_t idx, int dir) { return values[idx * two_d + dir]; }
    double at(std::size_t idx, int dir) const { return values[idx * two_d + dir]; }
};

// div(theta)(x) = sum of theta over edges out of x minus sum over edges
// into x. Needs the torus geometry to find the incoming edges.
std::vector<double> divergence(const TorusEnvironment& env, const EdgeFunction& theta);

// The constant-per-direction field theta(x, dir) = alpha_dir.
EdgeFunction alpha_edge_function(const TorusEnvironment& env);

// ---------------------------------------------------------------- reversal

// Time-reversed environment: omega_rev(x, y) = omega(y, x) pi(y) / pi(x).
// Shares pi as its stationary distribution; applying it twice returns the
// original environment. Throws ConfigError when pi's residual exceeds 1e-10
// (pi must actually be stationary for env).
TorusEnvironment reversed_env(const TorusEnvironment& env,
                              const StationaryDistribution& pi);

// Distributional check of the reversal law: the reversed environment at a
// fixed site should be Dirichlet with the axis-flipped weights. Compares
// empirical mixed moments over n_envs independent environments against the
// closed-form moments for a battery of exponent vectors (all unit vectors
// and all pairwise sums), and reports the worst |z|.
struct ReversalCheck {
    double max_abs_z = 0.0;
    std::size_t n_envs = 0;
    std::vector<double> z_scores;
};

ReversalCheck reversal_law_check(const Weights& w, int N, std::size_t n_envs,
                                 std::uint64_t seed, unsigned threads = 1);

}  // namespace rwde
