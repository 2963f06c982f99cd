#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rwde/util.hpp"

namespace rwde {

// ---------------------------------------------------------------- report

// Uniform result record for every estimator: a point estimate with a 95%
// interval, sample size, seed, the named claim it targets, and free-form
// metadata that the reporting layer serializes.
struct EstimateReport {
    std::string target;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> metadata;
};

// ---------------------------------------------------------------- tails

inline constexpr std::size_t kHillMinExceedances = 100;

// Hill estimator of the tail index on the top k order statistics, with the
// asymptotic normal CI (index * (1 +- 1.96/sqrt(k))). k == 0 picks the
// default k = floor(sqrt(n)). Throws EstimateError (insufficient data) when
// k < 100 or fewer than k positive samples exist.
EstimateReport tail_index_hill(std::vector<double> samples, std::size_t k_order);

// Stability sweep: Hill at k = n^0.4, n^0.5, n^0.6. A genuine power tail
// gives mutually consistent estimates; a light tail drifts upward as k
// shrinks. Entries that fail the exceedance minimum are skipped.
std::vector<EstimateReport> hill_sweep(const std::vector<double>& samples);

// ---------------------------------------------------------------- regression

// Least-squares slope of log y against log n with a replica bootstrap CI
// (200 resamples). Requires >= 4 points spanning >= 2 decades in n;
// degenerate spread throws ConfigError.
EstimateReport exponent_regression(const std::vector<double>& log_n,
                                   const std::vector<double>& log_y,
                                   std::uint64_t seed);

// ---------------------------------------------------------------- velocities

// Per-axis terminal velocity mean over replicas of X_T . e_i / T with a
// replica-bootstrap percentile CI (1000 resamples, 2.5/97.5).
// displacements: one row per replica, d columns.
std::vector<EstimateReport> velocity_estimate(
    const std::vector<std::vector<double>>& displacements, double horizon_T,
    std::uint64_t seed);

// ---------------------------------------------------------------- transience

// Streaming digest of one replica's directional projection Z_n . l; the
// walk runners emit these so long horizons never retain full series.
struct DirectionalSummary {
    double terminal = 0.0;            // Z_horizon . l
    std::size_t last_sign_change = 0; // last step whose nonzero sign flipped
    std::size_t horizon = 0;          // steps simulated
};

// Directional transience proxy: fraction of replicas whose terminal
// displacement along l is positive AND whose last sign change happened
// before horizon/2. The conjunctive fraction is the estimate; the plain
// terminal-positive fraction rides in metadata
// ("terminal_positive_fraction"), both with Wilson binomial intervals.
EstimateReport transience_check(const std::vector<DirectionalSummary>& replicas);

// Trichotomy classifier for Kalikow-type behavior. A replica oscillates
// when its sign changes persist into the second half of the horizon or its
// terminal displacement stays within dispersion_c * sqrt(horizon);
// otherwise it is +/- transient by terminal sign. Reports the dominant
// class frequency; metadata carries all three frequencies.
// dispersion_c = 3 is this laboratory's calibrated choice.
struct OscillationVerdict {
    double frac_oscillating = 0.0;
    double frac_plus = 0.0;
    double frac_minus = 0.0;
    std::string dominant;
    double dominant_fraction = 0.0;
};

inline constexpr double kOscillationDispersionC = 3.0;

OscillationVerdict oscillation_check(const std::vector<DirectionalSummary>& replicas,
                                     double dispersion_c = kOscillationDispersionC);

// ---------------------------------------------------------------- moments

// Empirical stabilization check for E[gamma^s]: running means over an
// increasing sample prefix; "stable" when the last-decade running-mean
// ratio sits in [0.8, 1.25], "diverging" otherwise.
struct MomentStabilization {
    bool stable = false;
    double last_decade_ratio = 0.0;
    std::vector<double> running_means;  // sampled at decade boundaries
};

MomentStabilization moment_stabilization(const std::vector<double>& samples,
                                         double s_exponent);

// ---------------------------------------------------------------- geometric fit

// Maximum-likelihood geometric fit (support 1, 2, ...) to renewal level
// gaps with a chi-square goodness-of-fit p-value (tail bins merged to keep
// expected counts >= 5). Requires >= 200 gaps. p_hat == 1 (all gaps equal
// 1) is flagged degenerate and skips the chi-square.
struct GeometricFit {
    double p_hat = 0.0;
    double chi2 = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
    bool degenerate = false;
};

GeometricFit geometric_fit(const std::vector<int>& gaps);

// ---------------------------------------------------------------- helpers

// Wilson 95% binomial interval.
void wilson_interval(std::size_t successes, std::size_t n, double& lo, double& hi);

// Sample mean with normal 95% CI.
void mean_ci(const std::vector<double>& xs, double& mean, double& lo, double& hi);

}  // namespace rwde
