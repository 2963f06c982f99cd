#include "rwde/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rwde/rng.hpp"

namespace rwde {

namespace {

// Inverse-CDF draw over the fixed direction order. The trailing return
// absorbs the 1e-12 normalization slack when u lands past the last partial
// sum.
int draw_direction(const double* p, int two_d, double u) {
    double c = 0.0;
    for (int dir = 0; dir < two_d; ++dir) {
        c += p[dir];
        if (u < c) return dir;
    }
    return two_d - 1;
}

// Periodic site-budget probe. Counts cache growth of the whole environment,
// which overcounts when several walks share one environment; that error is
// on the safe side (walks abort earlier, never later).
class SiteBudgetGuard {
  public:
    SiteBudgetGuard(const LatticeEnvironment& env, std::size_t budget)
        : env_(env), budget_(budget), baseline_(env.materialized_sites()) {}

    void step() {
        if (++count_ % 4096 != 0) return;
        if (env_.materialized_sites() - baseline_ > budget_) {
            throw BudgetError("walk: site budget (" + std::to_string(budget_) +
                              " fresh sites) exceeded");
        }
    }

  private:
    const LatticeEnvironment& env_;
    std::size_t budget_;
    std::size_t baseline_;
    std::size_t count_ = 0;
};

int projection(const Site& s, const Site& origin, int dir, int d) {
    return component_along(s, dir, d) - component_along(origin, dir, d);
}

}  // namespace

// ---------------------------------------------------------------- discrete

Trajectory run_discrete(const LatticeEnvironment& env, std::size_t n_steps,
                        const Site& start, std::uint64_t stream_seed,
                        std::size_t site_budget) {
    const int d = env.d();
    const int two_d = 2 * d;
    Rng dir_rng(derive_stream(stream_seed, kTagWalkDirection));
    SiteBudgetGuard guard(env, site_budget);

    Trajectory traj;
    traj.d = d;
    traj.positions.reserve(n_steps + 1);
    traj.positions.push_back(start);
    Site cur = start;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const int dir = draw_direction(env.probs_ptr(cur), two_d, dir_rng.uniform01());
        cur = step(cur, dir, d);
        traj.positions.push_back(cur);
        guard.step();
    }
    return traj;
}

void stream_discrete(const LatticeEnvironment& env, std::size_t n_steps,
                     const Site& start, std::uint64_t stream_seed,
                     const std::function<bool(std::size_t, const Site&)>& on_step,
                     std::size_t site_budget) {
    const int d = env.d();
    const int two_d = 2 * d;
    Rng dir_rng(derive_stream(stream_seed, kTagWalkDirection));
    SiteBudgetGuard guard(env, site_budget);

    Site cur = start;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const int dir = draw_direction(env.probs_ptr(cur), two_d, dir_rng.uniform01());
        cur = step(cur, dir, d);
        guard.step();
        if (!on_step(k + 1, cur)) return;
    }
}

// ---------------------------------------------------------------- accelerated

namespace {

double provider_gamma_at(GammaProvider& provider, const Site& cur,
                         const LatticeEnvironment& env) {
    try {
        return provider.at(cur);
    } catch (const EstimateError& e) {
        throw EstimateError("accelerated walk: gamma estimation failed at site " +
                            site_to_string(cur, env.d()) + " (environment seed " +
                            std::to_string(env.master_seed()) + "): " + e.what());
    }
}

}  // namespace

Trajectory run_accelerated(const LatticeEnvironment& env,
                           const NeighborhoodSet& lambda, double horizon_T,
                           const Site& start, std::uint64_t stream_seed,
                           std::size_t site_budget, GammaMode mode) {
    if (!(horizon_T > 0.0)) throw ConfigError("accelerated walk: horizon must be > 0");
    const int d = env.d();
    const int two_d = 2 * d;
    // Separate substreams: the direction stream is untouched by clock draws,
    // so the embedded discrete path matches run_discrete(stream_seed) step
    // for step.
    Rng dir_rng(derive_stream(stream_seed, kTagWalkDirection));
    Rng clock_rng(derive_stream(stream_seed, kTagWalkClock));
    SiteBudgetGuard guard(env, site_budget);
    GammaProvider provider(env, lambda, mode);

    Trajectory traj;
    traj.d = d;
    traj.positions.push_back(start);
    traj.jump_times.push_back(0.0);
    Site cur = start;
    double t = 0.0;
    while (t < horizon_T) {
        const double g = provider_gamma_at(provider, cur, env);
        const double e = clock_rng.exponential();
        traj.exp_draws.push_back(e);
        traj.gamma_values.push_back(g);
        t += e / g;
        const int dir = draw_direction(env.probs_ptr(cur), two_d, dir_rng.uniform01());
        cur = step(cur, dir, d);
        traj.positions.push_back(cur);
        traj.jump_times.push_back(t);
        guard.step();
    }
    return traj;
}

void stream_accelerated(const LatticeEnvironment& env,
                        const NeighborhoodSet& lambda, double horizon_T,
                        std::size_t max_steps, const Site& start,
                        std::uint64_t stream_seed,
                        const std::function<void(std::size_t, const Site&, double)>& on_step,
                        std::size_t site_budget, GammaMode mode) {
    if (!(horizon_T > 0.0)) throw ConfigError("accelerated walk: horizon must be > 0");
    const int d = env.d();
    const int two_d = 2 * d;
    Rng dir_rng(derive_stream(stream_seed, kTagWalkDirection));
    Rng clock_rng(derive_stream(stream_seed, kTagWalkClock));
    SiteBudgetGuard guard(env, site_budget);
    GammaProvider provider(env, lambda, mode);

    Site cur = start;
    double t = 0.0;
    std::size_t k = 0;
    while (t < horizon_T && k < max_steps) {
        const double g = provider_gamma_at(provider, cur, env);
        t += clock_rng.exponential() / g;
        const int dir = draw_direction(env.probs_ptr(cur), two_d, dir_rng.uniform01());
        cur = step(cur, dir, d);
        ++k;
        guard.step();
        on_step(k, cur, t);
    }
}

// ---------------------------------------------------------------- time change

double time_change_A(const Trajectory& traj, double t) {
    if (traj.jump_times.empty()) {
        throw ConfigError("time change: trajectory has no continuous clock");
    }
    if (!(t >= 0.0) || t > traj.jump_times.back()) {
        throw ConfigError("time change: t outside [0, last jump time]");
    }
    const auto it =
        std::upper_bound(traj.jump_times.begin(), traj.jump_times.end(), t);
    const std::size_t k =
        static_cast<std::size_t>(it - traj.jump_times.begin()) - 1;
    // Plain left-to-right prefix sum: each completed holding interval
    // contributes gamma * (E/gamma) = E, so A at a jump time must equal the
    // raw sum of the draws bit for bit.
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += traj.exp_draws[j];
    if (k < traj.gamma_values.size()) {
        acc += traj.gamma_values[k] * (t - traj.jump_times[k]);
    }
    return acc;
}

// ---------------------------------------------------------------- hitting

HittingRecord hitting_times(const Trajectory& traj, int dir, int levels,
                            bool continuous_time) {
    if (levels < 0) throw ConfigError("hitting times: levels must be >= 0");
    if (continuous_time && traj.jump_times.size() != traj.positions.size()) {
        throw ConfigError("hitting times: trajectory has no continuous clock");
    }
    HittingRecord rec;
    rec.dir = dir;
    rec.times.assign(static_cast<std::size_t>(levels) + 1, 0.0);
    rec.censored.assign(static_cast<std::size_t>(levels) + 1, 1);
    int next_level = 0;
    for (std::size_t i = 0; i < traj.positions.size(); ++i) {
        const int s = projection(traj.positions[i], traj.positions[0], dir, traj.d);
        while (next_level <= levels && s >= next_level) {
            rec.times[static_cast<std::size_t>(next_level)] =
                continuous_time ? traj.jump_times[i] : static_cast<double>(i);
            rec.censored[static_cast<std::size_t>(next_level)] = 0;
            ++next_level;
        }
        if (next_level > levels) break;
    }
    return rec;
}

// ---------------------------------------------------------------- exit times

std::vector<std::size_t> theta_exit_times(const Trajectory& traj, int dir) {
    const std::size_t n = traj.positions.size();
    std::vector<std::size_t> thetas;
    std::size_t scan = 0;  // monotone hitting-time pointer
    for (std::size_t k = 0;; ++k) {
        // Restart site: the walk's first visit to level 2k along dir.
        const int level = static_cast<int>(2 * k);
        while (scan < n &&
               projection(traj.positions[scan], traj.positions[0], dir, traj.d) < level) {
            ++scan;
        }
        if (scan >= n) break;  // level never reached: censored, stop
        const std::size_t s = scan;
        const Site base = traj.positions[s];
        const Site partner = step(base, dir, traj.d);
        std::size_t j = s + 1;
        while (j < n && (traj.positions[j] == base || traj.positions[j] == partner)) {
            ++j;
        }
        if (j >= n) break;  // no exit before the horizon: censored, stop
        thetas.push_back(std::max<std::size_t>(j - s - 1, 1));
    }
    return thetas;
}

double closed_form_theta_tail(const Weights& w, std::size_t n) {
    if (n == 0) throw ConfigError("theta tail: n must be >= 1");
    if (n == 1) return 1.0;
    const double a_plus = w.alpha[0];
    const double a_minus = w.alpha[static_cast<std::size_t>(w.d)];
    const double a0 = w.alpha0;
    const double cp = std::ceil(static_cast<double>(n) / 2.0);
    const double cm = std::floor(static_cast<double>(n) / 2.0);
    const double log_tail =
        (std::lgamma(a_plus + cp) - std::lgamma(a_plus) + std::lgamma(a0) -
         std::lgamma(a0 + cp)) +
        (std::lgamma(a_minus + cm) - std::lgamma(a_minus) + std::lgamma(a0) -
         std::lgamma(a0 + cm));
    return std::exp(log_tail);
}

// ---------------------------------------------------------------- renewals

RenewalRecord renewal_times(const Trajectory& traj, int dir) {
    const std::size_t n = traj.positions.size();
    RenewalRecord rec;
    if (n == 0) return rec;
    std::vector<int> proj(n);
    for (std::size_t i = 0; i < n; ++i) {
        proj[i] = projection(traj.positions[i], traj.positions[0], dir, traj.d);
    }
    // suffix_min[i] = min of proj[i..n-1].
    std::vector<int> suffix_min(n);
    suffix_min[n - 1] = proj[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        suffix_min[i] = std::min(proj[i], suffix_min[i + 1]);
    }
    const std::size_t horizon = n - 1;
    const std::size_t provisional_from =
        horizon - horizon / 10;  // last tenth of the step range
    int prefix_max = std::numeric_limits<int>::min();
    std::size_t last_solid = 0;
    bool have_solid = false;
    for (std::size_t i = 0; i < n; ++i) {
        const bool two_sided = proj[i] > prefix_max && suffix_min[i] >= proj[i];
        prefix_max = std::max(prefix_max, proj[i]);
        if (!two_sided) continue;
        rec.indices.push_back(i);
        const bool prov = i >= provisional_from;
        rec.provisional.push_back(prov ? 1 : 0);
        if (!prov) {
            if (have_solid) rec.level_gaps.push_back(proj[i] - proj[last_solid]);
            last_solid = i;
            have_solid = true;
        }
    }
    return rec;
}

// ---------------------------------------------------------------- excursions

double excursion_max(const Trajectory& traj, int dir, double window_start) {
    if (traj.jump_times.empty()) {
        throw ConfigError("excursion: trajectory has no continuous clock");
    }
    if (!(window_start >= 0.0) ||
        traj.jump_times.back() < window_start + 1.0) {
        throw ConfigError("excursion: trajectory does not cover the window");
    }
    // Position index at the window start: last arrival at or before it.
    const auto it = std::upper_bound(traj.jump_times.begin(), traj.jump_times.end(),
                                     window_start);
    const std::size_t k0 = static_cast<std::size_t>(it - traj.jump_times.begin()) - 1;
    const int base = component_along(traj.positions[k0], dir, traj.d);
    double m = 0.0;
    for (std::size_t j = k0 + 1;
         j < traj.jump_times.size() && traj.jump_times[j] <= window_start + 1.0; ++j) {
        const double dev =
            std::abs(static_cast<double>(component_along(traj.positions[j], dir, traj.d) - base));
        m = std::max(m, dev);
    }
    return m;
}

}  // namespace rwde
