#include "rwde/torus_chain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "rwde/gamma.hpp"
#include "rwde/stats.hpp"

namespace rwde {

namespace {

// (pi P)(y) = sum over directions of pi(x) omega(x, dir) where x is the site
// whose dir-step lands on y, i.e. x = neighbor(y, opposite(dir)).
void apply_transpose(const TorusEnvironment& env, const std::vector<double>& pi,
                     std::vector<double>& out) {
    const std::size_t n = env.n_sites();
    const int two_d = 2 * env.d();
    for (std::size_t y = 0; y < n; ++y) {
        double acc = 0.0;
        for (int dir = 0; dir < two_d; ++dir) {
            const std::size_t x = env.neighbor(y, opposite_dir(dir, env.d()));
            acc += pi[x] * env.probs_ptr(x)[dir];
        }
        out[y] = acc;
    }
}

double stationary_residual(const TorusEnvironment& env, const std::vector<double>& pi) {
    std::vector<double> next(pi.size());
    apply_transpose(env, pi, next);
    double r = 0.0;
    for (std::size_t y = 0; y < pi.size(); ++y) {
        r = std::max(r, std::abs(next[y] - pi[y]));
    }
    return r;
}

void normalize_to_one(std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    const double total = s.value();
    for (double& x : v) x /= total;
}

StationaryDistribution stationary_dense(const TorusEnvironment& env) {
    const std::size_t n = env.n_sites();
    const int two_d = 2 * env.d();
    // Rows of A are the balance equations (P^T - I) pi = 0 with the last row
    // replaced by the normalization sum pi = 1.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
        const double* p = env.probs_ptr(x);
        for (int dir = 0; dir < two_d; ++dir) {
            const std::size_t y = env.neighbor(x, dir);
            A(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) += p[dir];
        }
        A(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) -= 1.0;
    }
    for (std::size_t x = 0; x < n; ++x) {
        A(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(x)) = 1.0;
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    b(static_cast<Eigen::Index>(n - 1)) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd sol = lu.solve(b);
    // One refinement sweep sharpens the residual to solver precision.
    Eigen::VectorXd r = b - A * sol;
    sol += lu.solve(r);

    StationaryDistribution out;
    out.pi.assign(sol.data(), sol.data() + n);
    normalize_to_one(out.pi);
    for (double v : out.pi) {
        if (!(v > 0.0)) {
            throw EstimateError("stationary solve: non-positive entry in dense solution");
        }
    }
    out.residual = stationary_residual(env, out.pi);
    out.iterations = 0;
    out.dense = true;
    return out;
}

StationaryDistribution stationary_power(const TorusEnvironment& env) {
    const std::size_t n = env.n_sites();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> p1(n), p2(n), aitken(n);
    StationaryDistribution out;
    for (std::size_t sweep = 0; sweep < kPowerIterSweeps; sweep += 2) {
        apply_transpose(env, pi, p1);
        apply_transpose(env, p1, p2);
        double r = 0.0;
        for (std::size_t y = 0; y < n; ++y) r = std::max(r, std::abs(p2[y] - p1[y]));
        if (r <= kStationaryTol) {
            out.pi = p2;
            normalize_to_one(out.pi);
            out.residual = stationary_residual(env, out.pi);
            out.iterations = static_cast<int>(sweep + 2);
            out.dense = false;
            return out;
        }
        // Componentwise Aitken delta-squared; adopted only when it stays
        // strictly positive and actually reduces the residual (the
        // extrapolation can overshoot near convergence).
        bool positive = true;
        for (std::size_t y = 0; y < n; ++y) {
            const double den = p2[y] - 2.0 * p1[y] + pi[y];
            const double num = p2[y] - p1[y];
            double v = p2[y];
            if (std::abs(den) > 1e-300) v = p2[y] - num * num / den;
            aitken[y] = v;
            if (!(v > 0.0)) positive = false;
        }
        if (positive) {
            normalize_to_one(aitken);
            if (stationary_residual(env, aitken) < r) {
                pi.swap(aitken);
                continue;
            }
        }
        pi.swap(p2);
    }
    throw EstimateError("stationary solve: power iteration missed " +
                        std::to_string(kStationaryTol) + " within " +
                        std::to_string(kPowerIterSweeps) + " sweeps");
}

}  // namespace

// ---------------------------------------------------------------- stationary

StationaryDistribution stationary_distribution(const TorusEnvironment& env) {
    if (env.n_sites() <= kDenseSolveLimit) return stationary_dense(env);
    return stationary_power(env);
}

// ---------------------------------------------------------------- accelerated

AcceleratedInvariant accelerated_invariant(const TorusEnvironment& env,
                                           const StationaryDistribution& pi,
                                           const ExitPathSet& paths,
                                           unsigned threads) {
    const std::size_t n = env.n_sites();
    const int two_d = 2 * env.d();
    AcceleratedInvariant inv;
    inv.gamma = gamma_all_torus(env, paths, threads);
    inv.pi_tilde.resize(n);
    for (std::size_t y = 0; y < n; ++y) inv.pi_tilde[y] = pi.pi[y] / inv.gamma[y];
    normalize_to_one(inv.pi_tilde);

    // Rate balance of the accelerated chain: inflow at rate gamma(x) omega(x,y)
    // must match the outflow rate gamma(y) at every site.
    double worst = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
        double inflow = 0.0;
        for (int dir = 0; dir < two_d; ++dir) {
            const std::size_t x = env.neighbor(y, opposite_dir(dir, env.d()));
            inflow += inv.pi_tilde[x] * inv.gamma[x] * env.probs_ptr(x)[dir];
        }
        worst = std::max(worst, std::abs(inflow - inv.pi_tilde[y] * inv.gamma[y]));
    }
    inv.balance_residual = worst;
    return inv;
}

double density_f_N(const TorusEnvironment& env, const AcceleratedInvariant& inv) {
    return static_cast<double>(env.n_sites()) * inv.pi_tilde[0];
}

// ---------------------------------------------------------------- L_p trend

LpEstimate lp_norm_estimate(const Weights& w, int N, double p,
                            const NeighborhoodSet& lambda, std::size_t n_envs,
                            std::uint64_t seed, unsigned threads) {
    if (n_envs == 0) throw ConfigError("lp_norm_estimate: n_envs must be positive");
    const ExitPathSet paths = enumerate_exit_paths(lambda, w.d);

    LpEstimate est;
    est.n_envs = n_envs;
    est.f_values.resize(n_envs);
    est.gamma0_values.resize(n_envs);
    std::vector<double> pi_residuals(n_envs), balance_residuals(n_envs);
    parallel_for(n_envs, threads, [&](std::size_t i) {
        const std::uint64_t env_seed = derive_indexed(seed, kTagEnvReplica, i);
        TorusEnvironment env = sample_torus_env(w, N, env_seed);
        StationaryDistribution pi = stationary_distribution(env);
        AcceleratedInvariant inv = accelerated_invariant(env, pi, paths, 1);
        est.f_values[i] = density_f_N(env, inv);
        est.gamma0_values[i] = inv.gamma[0];
        pi_residuals[i] = pi.residual;
        balance_residuals[i] = inv.balance_residual;
    });
    est.max_pi_residual = *std::max_element(pi_residuals.begin(), pi_residuals.end());
    est.max_balance_residual =
        *std::max_element(balance_residuals.begin(), balance_residuals.end());

    std::vector<double> powered(n_envs);
    for (std::size_t i = 0; i < n_envs; ++i) powered[i] = std::pow(est.f_values[i], p);
    mean_ci(powered, est.raw_mean, est.raw_ci_low, est.raw_ci_high);

    // Winsorize the top ceil(0.1%) at the corresponding order statistic: the
    // raw mean of f_N^p is dominated by rare heavy draws when p approaches
    // the moment boundary, and the clamped mean shows whether the bulk or
    // the extremes carry the trend.
    std::vector<double> sorted = powered;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m =
        static_cast<std::size_t>(std::ceil(0.001 * static_cast<double>(n_envs)));
    const std::size_t cut_idx = n_envs > m ? n_envs - m - 1 : 0;
    const double cut = sorted[cut_idx];
    std::vector<double> winsorized = powered;
    for (double& v : winsorized) v = std::min(v, cut);
    mean_ci(winsorized, est.winsorized_mean, est.winsorized_ci_low,
            est.winsorized_ci_high);
    return est;
}

// ---------------------------------------------------------------- divergence

std::vector<double> divergence(const TorusEnvironment& env, const EdgeFunction& theta) {
    const std::size_t n = env.n_sites();
    const int two_d = 2 * env.d();
    if (theta.n_sites != n || theta.two_d != two_d) {
        throw ConfigError("divergence: edge function does not match the torus");
    }
    std::vector<double> div(n);
    for (std::size_t x = 0; x < n; ++x) {
        double out_sum = 0.0;
        double in_sum = 0.0;
        for (int dir = 0; dir < two_d; ++dir) {
            out_sum += theta.at(x, dir);
            // The incoming dir-edge at x starts at the site one opposite-step away.
            in_sum += theta.at(env.neighbor(x, opposite_dir(dir, env.d())), dir);
        }
        div[x] = out_sum - in_sum;
    }
    return div;
}

EdgeFunction alpha_edge_function(const TorusEnvironment& env) {
    EdgeFunction f;
    f.n_sites = env.n_sites();
    f.two_d = 2 * env.d();
    f.values.resize(f.n_sites * static_cast<std::size_t>(f.two_d));
    for (std::size_t x = 0; x < f.n_sites; ++x) {
        for (int dir = 0; dir < f.two_d; ++dir) {
            f.at(x, dir) = env.weights().alpha[static_cast<std::size_t>(dir)];
        }
    }
    return f;
}

// ---------------------------------------------------------------- reversal

TorusEnvironment reversed_env(const TorusEnvironment& env,
                              const StationaryDistribution& pi) {
    if (pi.residual > 1e-10) {
        throw ConfigError("reversed_env: supplied distribution is not stationary "
                          "(residual above 1e-10)");
    }
    const std::size_t n = env.n_sites();
    const int d = env.d();
    const int two_d = 2 * d;
    std::vector<double> flat(n * static_cast<std::size_t>(two_d));
    for (std::size_t x = 0; x < n; ++x) {
        double row_sum = 0.0;
        double* row = flat.data() + x * static_cast<std::size_t>(two_d);
        for (int dir = 0; dir < two_d; ++dir) {
            const std::size_t y = env.neighbor(x, dir);
            row[dir] = env.probs_ptr(y)[opposite_dir(dir, d)] * pi.pi[y] / pi.pi[x];
            row_sum += row[dir];
        }
        // Stationarity makes row_sum = 1 up to the solve residual; exact
        // renormalization keeps the double reversal an involution.
        for (int dir = 0; dir < two_d; ++dir) row[dir] /= row_sum;
    }
    // The annealed law of a reversed row is Dirichlet with axis-flipped
    // weights, so the reversed environment carries those.
    std::vector<double> flipped(static_cast<std::size_t>(two_d));
    for (int dir = 0; dir < two_d; ++dir) {
        flipped[static_cast<std::size_t>(dir)] =
            env.weights().alpha[static_cast<std::size_t>(opposite_dir(dir, d))];
    }
    return TorusEnvironment::from_flat(make_weights(d, std::move(flipped)), env.N(),
                                       std::move(flat));
}

ReversalCheck reversal_law_check(const Weights& w, int N, std::size_t n_envs,
                                 std::uint64_t seed, unsigned threads) {
    if (n_envs < 2) throw ConfigError("reversal_law_check: need at least 2 environments");
    const int two_d = 2 * w.d;
    // Exponent battery: all unit vectors, then all distinct pairwise sums.
    std::vector<std::vector<double>> battery;
    for (int j = 0; j < two_d; ++j) {
        std::vector<double> theta(static_cast<std::size_t>(two_d), 0.0);
        theta[static_cast<std::size_t>(j)] = 1.0;
        battery.push_back(std::move(theta));
    }
    for (int j = 0; j < two_d; ++j) {
        for (int k = j + 1; k < two_d; ++k) {
            std::vector<double> theta(static_cast<std::size_t>(two_d), 0.0);
            theta[static_cast<std::size_t>(j)] = 1.0;
            theta[static_cast<std::size_t>(k)] = 1.0;
            battery.push_back(std::move(theta));
        }
    }
    const std::size_t n_batt = battery.size();

    std::vector<double> flipped(static_cast<std::size_t>(two_d));
    for (int dir = 0; dir < two_d; ++dir) {
        flipped[static_cast<std::size_t>(dir)] =
            w.alpha[static_cast<std::size_t>(opposite_dir(dir, w.d))];
    }
    const Weights w_rev = make_weights(w.d, flipped);

    // samples[i * n_batt + b]: battery moment of the reversed origin row in
    // environment replica i. Filled by index, so threading cannot reorder.
    std::vector<double> samples(n_envs * n_batt);
    parallel_for(n_envs, threads, [&](std::size_t i) {
        const std::uint64_t env_seed = derive_indexed(seed, kTagEnvReplica, i);
        TorusEnvironment env = sample_torus_env(w, N, env_seed);
        StationaryDistribution pi = stationary_distribution(env);
        TorusEnvironment rev = reversed_env(env, pi);
        const double* row = rev.probs_ptr(0);
        for (std::size_t b = 0; b < n_batt; ++b) {
            double prod = 1.0;
            for (int dir = 0; dir < two_d; ++dir) {
                if (battery[b][static_cast<std::size_t>(dir)] == 1.0) prod *= row[dir];
            }
            samples[i * n_batt + b] = prod;
        }
    });

    ReversalCheck check;
    check.n_envs = n_envs;
    check.z_scores.resize(n_batt);
    for (std::size_t b = 0; b < n_batt; ++b) {
        KahanSum sum;
        for (std::size_t i = 0; i < n_envs; ++i) sum.add(samples[i * n_batt + b]);
        const double mean = sum.value() / static_cast<double>(n_envs);
        KahanSum sq;
        for (std::size_t i = 0; i < n_envs; ++i) {
            const double dlt = samples[i * n_batt + b] - mean;
            sq.add(dlt * dlt);
        }
        const double sd =
            std::sqrt(sq.value() / static_cast<double>(n_envs - 1));
        const double exact = dirichlet_moment(w_rev, battery[b]);
        const double se = sd / std::sqrt(static_cast<double>(n_envs));
        const double z = se > 0.0 ? (mean - exact) / se : 0.0;
        check.z_scores[b] = z;
        check.max_abs_z = std::max(check.max_abs_z, std::abs(z));
    }
    return check;
}

}  // namespace rwde
