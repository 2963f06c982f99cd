#include "rwde/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "rwde/rng.hpp"

namespace rwde {

// ---------------------------------------------------------------- helpers

void wilson_interval(std::size_t successes, std::size_t n, double& lo, double& hi) {
    if (n == 0) throw ConfigError("wilson interval: n must be positive");
    const double z = 1.96;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

void mean_ci(const std::vector<double>& xs, double& mean, double& lo, double& hi) {
    if (xs.empty()) throw ConfigError("mean: empty sample");
    KahanSum sum;
    for (double x : xs) sum.add(x);
    const double n = static_cast<double>(xs.size());
    mean = sum.value() / n;
    if (xs.size() == 1) {
        lo = hi = mean;
        return;
    }
    KahanSum sq;
    for (double x : xs) {
        const double d = x - mean;
        sq.add(d * d);
    }
    const double se = std::sqrt(sq.value() / (n - 1.0)) / std::sqrt(n);
    lo = mean - 1.96 * se;
    hi = mean + 1.96 * se;
}

// ---------------------------------------------------------------- tails

EstimateReport tail_index_hill(std::vector<double> samples, std::size_t k_order) {
    const std::size_t n = samples.size();
    std::size_t k = k_order != 0
                        ? k_order
                        : static_cast<std::size_t>(std::floor(std::sqrt(
                              static_cast<double>(n))));
    if (k < kHillMinExceedances) {
        throw EstimateError("hill: k = " + std::to_string(k) + " below the minimum " +
                            std::to_string(kHillMinExceedances) + " exceedances");
    }
    if (n < k + 1) {
        throw EstimateError("hill: need at least k + 1 samples");
    }
    // Top k + 1 order statistics, descending.
    std::partial_sort(samples.begin(),
                      samples.begin() + static_cast<std::ptrdiff_t>(k + 1),
                      samples.end(), std::greater<double>());
    const double threshold = samples[k];
    if (!(threshold > 0.0)) {
        throw EstimateError("hill: the (k+1)-th order statistic must be positive");
    }
    KahanSum acc;
    for (std::size_t i = 0; i < k; ++i) {
        acc.add(std::log(samples[i] / threshold));
    }
    const double xi = acc.value() / static_cast<double>(k);
    if (!(xi > 0.0)) {
        throw EstimateError("hill: degenerate exceedances (all equal to the threshold)");
    }
    const double alpha = 1.0 / xi;
    const double rel = 1.96 / std::sqrt(static_cast<double>(k));
    EstimateReport rep;
    rep.target = "tail_index";
    rep.estimate = alpha;
    rep.ci_low = alpha * (1.0 - rel);
    rep.ci_high = alpha * (1.0 + rel);
    rep.n_samples = n;
    rep.metadata["k"] = static_cast<double>(k);
    rep.metadata["xi_hat"] = xi;
    rep.metadata["threshold"] = threshold;
    return rep;
}

std::vector<EstimateReport> hill_sweep(const std::vector<double>& samples) {
    const double n = static_cast<double>(samples.size());
    std::vector<EstimateReport> out;
    for (double expo : {0.4, 0.5, 0.6}) {
        const auto k = static_cast<std::size_t>(std::floor(std::pow(n, expo)));
        if (k < kHillMinExceedances || k + 1 > samples.size()) continue;
        EstimateReport rep = tail_index_hill(samples, k);
        rep.metadata["k_exponent"] = expo;
        out.push_back(std::move(rep));
    }
    return out;
}

// ---------------------------------------------------------------- regression

namespace {

// Least-squares slope of y against x over the given point indices.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y,
                const std::vector<std::size_t>& idx) {
    const double n = static_cast<double>(idx.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i : idx) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i : idx) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx < 1e-12) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

}  // namespace

EstimateReport exponent_regression(const std::vector<double>& log_n,
                                   const std::vector<double>& log_y,
                                   std::uint64_t seed) {
    if (log_n.size() != log_y.size()) {
        throw ConfigError("exponent regression: mismatched point lists");
    }
    if (log_n.size() < 4) {
        throw ConfigError("exponent regression: need at least 4 points");
    }
    const auto [mn, mx] = std::minmax_element(log_n.begin(), log_n.end());
    if (*mx - *mn < 2.0 * std::log(10.0)) {
        throw ConfigError("exponent regression: points must span at least 2 decades");
    }
    std::vector<std::size_t> all(log_n.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const double slope = ls_slope(log_n, log_y, all);
    if (std::isnan(slope)) {
        throw ConfigError("exponent regression: degenerate abscissa spread");
    }

    // Pairs bootstrap: resample points with replacement, keep the slope when
    // the resample is non-degenerate.
    Rng rng(derive_stream(seed, kTagGeneric));
    constexpr int kResamples = 200;
    std::vector<double> boot;
    boot.reserve(kResamples);
    std::vector<std::size_t> pick(log_n.size());
    for (int b = 0; b < kResamples; ++b) {
        for (auto& i : pick) {
            i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(log_n.size()));
            if (i >= log_n.size()) i = log_n.size() - 1;
        }
        const double s = ls_slope(log_n, log_y, pick);
        if (!std::isnan(s)) boot.push_back(s);
    }
    std::sort(boot.begin(), boot.end());
    EstimateReport rep;
    rep.target = "exponent";
    rep.estimate = slope;
    rep.n_samples = log_n.size();
    rep.seed = seed;
    if (boot.size() >= 40) {
        rep.ci_low = boot[static_cast<std::size_t>(0.025 * static_cast<double>(boot.size()))];
        rep.ci_high = boot[std::min(boot.size() - 1,
                                    static_cast<std::size_t>(0.975 * static_cast<double>(boot.size())))];
    } else {
        rep.ci_low = rep.ci_high = slope;
    }
    rep.metadata["bootstrap_resamples"] = static_cast<double>(boot.size());
    return rep;
}

// ---------------------------------------------------------------- velocities

std::vector<EstimateReport> velocity_estimate(
    const std::vector<std::vector<double>>& displacements, double horizon_T,
    std::uint64_t seed) {
    if (displacements.empty()) throw ConfigError("velocity: no replicas");
    if (!(horizon_T > 0.0)) throw ConfigError("velocity: horizon must be > 0");
    const std::size_t n = displacements.size();
    const std::size_t d = displacements[0].size();
    for (const auto& row : displacements) {
        if (row.size() != d) throw ConfigError("velocity: ragged replica rows");
    }
    constexpr int kResamples = 1000;
    Rng rng(derive_stream(seed, kTagGeneric));
    std::vector<EstimateReport> out;
    out.reserve(d);
    std::vector<double> boot(kResamples);
    for (std::size_t axis = 0; axis < d; ++axis) {
        KahanSum sum;
        for (const auto& row : displacements) sum.add(row[axis] / horizon_T);
        const double mean = sum.value() / static_cast<double>(n);
        for (int b = 0; b < kResamples; ++b) {
            KahanSum rs;
            for (std::size_t r = 0; r < n; ++r) {
                auto pick = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
                if (pick >= n) pick = n - 1;
                rs.add(displacements[pick][axis] / horizon_T);
            }
            boot[static_cast<std::size_t>(b)] = rs.value() / static_cast<double>(n);
        }
        std::sort(boot.begin(), boot.end());
        EstimateReport rep;
        rep.target = "velocity_axis_" + std::to_string(axis + 1);
        rep.estimate = mean;
        rep.ci_low = boot[static_cast<std::size_t>(0.025 * kResamples)];
        rep.ci_high = boot[static_cast<std::size_t>(0.975 * kResamples)];
        rep.n_samples = n;
        rep.seed = seed;
        rep.metadata["axis"] = static_cast<double>(axis + 1);
        out.push_back(std::move(rep));
    }
    return out;
}

// ---------------------------------------------------------------- transience

EstimateReport transience_check(const std::vector<DirectionalSummary>& replicas) {
    if (replicas.empty()) throw ConfigError("transience: no replicas");
    const std::size_t n = replicas.size();
    std::size_t conj = 0;
    std::size_t positive = 0;
    for (const auto& r : replicas) {
        const bool pos = r.terminal > 0.0;
        if (pos) ++positive;
        if (pos && r.last_sign_change < r.horizon / 2) ++conj;
    }
    EstimateReport rep;
    rep.target = "directional_transience";
    rep.estimate = static_cast<double>(conj) / static_cast<double>(n);
    wilson_interval(conj, n, rep.ci_low, rep.ci_high);
    rep.n_samples = n;
    double plo = 0.0, phi = 0.0;
    wilson_interval(positive, n, plo, phi);
    rep.metadata["terminal_positive_fraction"] =
        static_cast<double>(positive) / static_cast<double>(n);
    rep.metadata["terminal_positive_ci_low"] = plo;
    rep.metadata["terminal_positive_ci_high"] = phi;
    return rep;
}

OscillationVerdict oscillation_check(const std::vector<DirectionalSummary>& replicas,
                                     double dispersion_c) {
    if (replicas.empty()) throw ConfigError("oscillation: no replicas");
    const double n = static_cast<double>(replicas.size());
    std::size_t osc = 0, plus = 0, minus = 0;
    for (const auto& r : replicas) {
        const double spread =
            dispersion_c * std::sqrt(static_cast<double>(r.horizon));
        const bool oscillating =
            r.last_sign_change >= r.horizon / 2 || std::abs(r.terminal) <= spread;
        if (oscillating) {
            ++osc;
        } else if (r.terminal > 0.0) {
            ++plus;
        } else {
            ++minus;
        }
    }
    OscillationVerdict v;
    v.frac_oscillating = static_cast<double>(osc) / n;
    v.frac_plus = static_cast<double>(plus) / n;
    v.frac_minus = static_cast<double>(minus) / n;
    if (osc >= plus && osc >= minus) {
        v.dominant = "oscillating";
        v.dominant_fraction = v.frac_oscillating;
    } else if (plus >= minus) {
        v.dominant = "transient_plus";
        v.dominant_fraction = v.frac_plus;
    } else {
        v.dominant = "transient_minus";
        v.dominant_fraction = v.frac_minus;
    }
    return v;
}

// ---------------------------------------------------------------- moments

MomentStabilization moment_stabilization(const std::vector<double>& samples,
                                         double s_exponent) {
    if (samples.size() < 100) {
        throw EstimateError("moment stabilization: need at least 100 samples");
    }
    const std::size_t n = samples.size();
    MomentStabilization out;
    KahanSum sum;
    std::size_t next_decade = 10;
    double mean_tenth = 0.0;
    const std::size_t tenth = n / 10;
    for (std::size_t i = 0; i < n; ++i) {
        sum.add(std::pow(samples[i], s_exponent));
        const std::size_t count = i + 1;
        if (count == next_decade) {
            out.running_means.push_back(sum.value() / static_cast<double>(count));
            next_decade *= 10;
        }
        if (count == tenth) mean_tenth = sum.value() / static_cast<double>(count);
    }
    const double mean_full = sum.value() / static_cast<double>(n);
    out.running_means.push_back(mean_full);
    out.last_decade_ratio = mean_full / mean_tenth;
    out.stable = out.last_decade_ratio >= 0.8 && out.last_decade_ratio <= 1.25;
    return out;
}

// ---------------------------------------------------------------- geometric fit

GeometricFit geometric_fit(const std::vector<int>& gaps) {
    if (gaps.size() < 200) {
        throw EstimateError("geometric fit: need at least 200 gaps");
    }
    double sum = 0.0;
    int max_gap = 0;
    for (int g : gaps) {
        if (g < 1) throw ConfigError("geometric fit: gaps must be >= 1");
        sum += static_cast<double>(g);
        max_gap = std::max(max_gap, g);
    }
    GeometricFit fit;
    fit.n = gaps.size();
    fit.p_hat = static_cast<double>(gaps.size()) / sum;
    if (max_gap == 1) {
        // Point mass at 1: the chi-square has no free bins to test.
        fit.degenerate = true;
        fit.p_value = 1.0;
        return fit;
    }

    // Bins 1 .. G-1 individually plus the merged tail [G, inf); G is pushed
    // as far as expected counts stay >= 5.
    const double n = static_cast<double>(gaps.size());
    const double p = fit.p_hat;
    const double q = 1.0 - p;
    int big_g = 1;
    while (true) {
        const double exp_bin = n * p * std::pow(q, big_g - 1);       // P(X = G)
        const double exp_tail = n * std::pow(q, big_g);              // P(X > G)
        if (exp_bin >= 5.0 && exp_tail >= 5.0) {
            ++big_g;
        } else {
            break;
        }
    }
    if (big_g < 3) {
        // Not enough populated bins for a test with dof >= 1.
        fit.degenerate = true;
        fit.p_value = 1.0;
        return fit;
    }
    std::vector<double> observed(static_cast<std::size_t>(big_g), 0.0);
    for (int g : gaps) {
        const int bin = std::min(g, big_g);
        observed[static_cast<std::size_t>(bin - 1)] += 1.0;
    }
    double chi2 = 0.0;
    for (int b = 1; b <= big_g; ++b) {
        const double expected =
            b < big_g ? n * p * std::pow(q, b - 1) : n * std::pow(q, big_g - 1);
        const double diff = observed[static_cast<std::size_t>(b - 1)] - expected;
        chi2 += diff * diff / expected;
    }
    fit.chi2 = chi2;
    const int dof = big_g - 2;  // one for the total, one for the fitted p
    boost::math::chi_squared dist(dof);
    fit.p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    return fit;
}

}  // namespace rwde
