#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/exit_paths.hpp"
#include "rwde/gamma.hpp"
#include "rwde/neighborhood.hpp"
#include "rwde/torus_chain.hpp"
#include "rwde/util.hpp"

using namespace rwde;
using boost::multiprecision::cpp_rational;

namespace {

// Deterministic rational site rows shared with the independently computed
// reference values (see the gamma tests for the same construction).
std::vector<double> pattern_probs(int k, int two_d) {
    std::vector<double> raw(static_cast<std::size_t>(two_d));
    double s = 0.0;
    for (int i = 0; i < two_d; ++i) {
        raw[static_cast<std::size_t>(i)] =
            static_cast<double>(2 + (k * 3 + i * 5) % 7) +
            1.0 / static_cast<double>(1 + (k + i) % 3);
        s += raw[static_cast<std::size_t>(i)];
    }
    for (double& r : raw) r /= s;
    return raw;
}

TorusEnvironment pattern_torus() {
    const Weights w = make_weights(2, {1, 1, 1, 1});
    std::vector<double> flat;
    for (int k = 0; k < 9; ++k) {
        for (double v : pattern_probs(k, 4)) flat.push_back(v);
    }
    return TorusEnvironment::from_flat(w, 3, flat);
}

// Exact stationary distribution of the environment's transition matrix by
// rational Gaussian elimination. Doubles convert to cpp_rational exactly,
// so this solves the very matrix the double solver saw, with zero rounding.
std::vector<double> rational_stationary(const TorusEnvironment& env) {
    const std::size_t n = env.n_sites();
    std::vector<std::vector<cpp_rational>> P(n, std::vector<cpp_rational>(n, 0));
    for (std::size_t x = 0; x < n; ++x) {
        for (int dir = 0; dir < 2 * env.d(); ++dir) {
            P[x][env.neighbor(x, dir)] += cpp_rational(env.probs_ptr(x)[dir]);
        }
    }
    // (P^T - I) pi = 0 with the last equation replaced by sum pi = 1.
    std::vector<std::vector<cpp_rational>> M(n, std::vector<cpp_rational>(n + 1, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) M[i][j] = P[j][i];
        M[i][i] -= 1;
    }
    for (std::size_t j = 0; j < n; ++j) M[n - 1][j] = 1;
    M[n - 1][n] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (M[piv][c] == 0) ++piv;
        std::swap(M[c], M[piv]);
        const cpp_rational pv = M[c][c];
        for (auto& v : M[c]) v /= pv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r != c && M[r][c] != 0) {
                const cpp_rational f = M[r][c];
                for (std::size_t j = c; j <= n; ++j) M[r][j] -= f * M[c][j];
            }
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = static_cast<double>(M[i][n]);
    return pi;
}

}  // namespace

// ---------------------------------------------------------------- stationary

TEST_CASE("stationary law matches the exact rational reference") {
    const TorusEnvironment env = pattern_torus();
    const StationaryDistribution sd = stationary_distribution(env);
    CHECK(sd.dense);
    CHECK(sd.iterations == 0);
    CHECK(sd.residual <= 1e-12);

    const double expected[9] = {
        1.364897424800842474e-01, 1.183266161251902288e-01, 1.012310092453697630e-01,
        1.210792505227012150e-01, 1.014328726150821453e-01, 1.268666476295370604e-01,
        9.605458116815387970e-02, 1.136195081053886780e-01, 8.489977210849276867e-02,
    };
    REQUIRE(sd.pi.size() == 9);
    double total = 0.0;
    for (std::size_t k = 0; k < 9; ++k) {
        CHECK(sd.pi[k] == doctest::Approx(expected[k]).epsilon(1e-13));
        total += sd.pi[k];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("stationary solve agrees with rational elimination on sampled environments") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    for (std::uint64_t seed : {11u, 12u}) {
        const TorusEnvironment env(w, 3, seed);
        const StationaryDistribution sd = stationary_distribution(env);
        const std::vector<double> exact = rational_stationary(env);
        for (std::size_t k = 0; k < sd.pi.size(); ++k) {
            CHECK(std::abs(sd.pi[k] - exact[k]) <= 1e-12);
        }
    }
}

TEST_CASE("stationary solve stays at solver precision across sizes") {
    const Weights w2 = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    for (int N : {3, 4, 5}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const StationaryDistribution sd =
                stationary_distribution(TorusEnvironment(w2, N, seed));
            CHECK(sd.residual <= 1e-12);
            for (double p : sd.pi) CHECK(p > 0.0);
        }
    }
    const Weights w3 = make_weights(3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1});
    const StationaryDistribution sd =
        stationary_distribution(TorusEnvironment(w3, 3, 4));
    CHECK(sd.residual <= 1e-12);
    CHECK(sd.pi.size() == 27);
}

// ---------------------------------------------------------------- accelerated

TEST_CASE("accelerated invariant matches the exact rational reference") {
    const TorusEnvironment env = pattern_torus();
    const StationaryDistribution sd = stationary_distribution(env);
    const ExitPathSet paths = enumerate_exit_paths(NeighborhoodSet::pair(2), 2);
    const AcceleratedInvariant inv = accelerated_invariant(env, sd, paths);

    CHECK(inv.gamma[0] == doctest::Approx(1.059261065723692274).epsilon(1e-12));
    CHECK(inv.gamma[8] == doctest::Approx(1.024154849840944737).epsilon(1e-12));
    CHECK(inv.balance_residual <= 1e-10);
    double total = 0.0;
    for (double v : inv.pi_tilde) {
        CHECK(v > 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(density_f_N(env, inv) ==
          doctest::Approx(1.233005335892607635).epsilon(1e-12));
}

TEST_CASE("density f_N has unit mean over environments") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    const ExitPathSet paths = enumerate_exit_paths(NeighborhoodSet::pair(2), 2);
    const std::size_t n = 300;
    double sum = 0.0, sq = 0.0;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        const TorusEnvironment env(w, 3, derive_indexed(515, kTagEnvReplica, seed));
        const StationaryDistribution sd = stationary_distribution(env);
        const AcceleratedInvariant inv = accelerated_invariant(env, sd, paths);
        const double f = density_f_N(env, inv);
        sum += f;
        sq += f * f;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - mean * mean;
    const double z = (mean - 1.0) / std::sqrt(var / static_cast<double>(n));
    CHECK(std::abs(z) < 5.0);
}

TEST_CASE("lp_norm_estimate is deterministic and well-formed") {
    const Weights w = make_weights(3, {0.18, 0.09, 0.09, 0.06, 0.09, 0.09});
    const NeighborhoodSet lambda = NeighborhoodSet::diamond(1, 3);
    const LpEstimate a = lp_norm_estimate(w, 3, 1.2, lambda, 150, 909, 4);
    const LpEstimate b = lp_norm_estimate(w, 3, 1.2, lambda, 150, 909, 2);
    CHECK(a.raw_mean == b.raw_mean);  // thread count cannot move the estimate
    CHECK(a.n_envs == 150);
    CHECK(a.raw_mean > 0.0);
    CHECK(a.raw_ci_low <= a.raw_mean);
    CHECK(a.raw_mean <= a.raw_ci_high);
    CHECK(a.winsorized_mean > 0.0);
    CHECK(a.winsorized_mean <= a.raw_mean + 1e-12);
    CHECK(a.max_pi_residual <= 1e-12);
    CHECK(a.max_balance_residual <= 1e-10);
    REQUIRE(a.f_values.size() == 150);
    REQUIRE(a.gamma0_values.size() == 150);
    for (double g : a.gamma0_values) CHECK(g >= 1.0 - 1e-12);
}

// ---------------------------------------------------------------- divergence

TEST_CASE("alpha edge field has zero divergence") {
    const Weights w = make_weights(2, {0.37, 0.21, 0.12, 0.30});
    const TorusEnvironment env(w, 4, 3);
    const std::vector<double> div = divergence(env, alpha_edge_function(env));
    for (double v : div) CHECK(v == 0.0);
}

TEST_CASE("divergence of a single-edge field is a dipole") {
    const Weights w = make_weights(2, {1, 1, 1, 1});
    const TorusEnvironment env(w, 3, 3);
    EdgeFunction theta;
    theta.n_sites = env.n_sites();
    theta.two_d = 4;
    theta.values.assign(theta.n_sites * 4, 0.0);
    const std::size_t tail = 4;  // site (1,1)
    theta.at(tail, 0) = 1.0;     // edge (1,1) -> (2,1)
    const std::vector<double> div = divergence(env, theta);
    for (std::size_t x = 0; x < env.n_sites(); ++x) {
        if (x == tail) {
            CHECK(div[x] == 1.0);
        } else if (x == env.neighbor(tail, 0)) {
            CHECK(div[x] == -1.0);
        } else {
            CHECK(div[x] == 0.0);
        }
    }
}

// ---------------------------------------------------------------- reversal

TEST_CASE("environment reversal is an involution sharing pi") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.2, 0.4});
    const TorusEnvironment env(w, 3, 21);
    const StationaryDistribution sd = stationary_distribution(env);
    const TorusEnvironment rev = reversed_env(env, sd);

    // pi is stationary for the reversed chain as well.
    const StationaryDistribution sd_rev = stationary_distribution(rev);
    for (std::size_t k = 0; k < sd.pi.size(); ++k) {
        CHECK(sd_rev.pi[k] == doctest::Approx(sd.pi[k]).epsilon(1e-10));
    }

    const TorusEnvironment back = reversed_env(rev, sd_rev);
    for (std::size_t k = 0; k < env.n_sites(); ++k) {
        for (int i = 0; i < 4; ++i) {
            CHECK(back.probs_ptr(k)[i] ==
                  doctest::Approx(env.probs_ptr(k)[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("reversal rejects a non-stationary pi") {
    const Weights w = make_weights(2, {1, 1, 1, 1});
    const TorusEnvironment env(w, 3, 5);
    StationaryDistribution fake;
    fake.pi.assign(9, 1.0 / 9.0);
    fake.residual = 1.0;  // declared unusable
    CHECK_THROWS_AS(reversed_env(env, fake), ConfigError);
}

TEST_CASE("reversed origin row follows the flipped-weight law") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.2, 0.4});
    const ReversalCheck a = reversal_law_check(w, 3, 4000, 1234, 4);
    CHECK(a.n_envs == 4000);
    CHECK(a.z_scores.size() == 10);  // 4 unit exponents + 6 pairwise sums
    CHECK(a.max_abs_z < 5.5);
    const ReversalCheck b = reversal_law_check(w, 3, 4000, 1234, 2);
    CHECK(a.max_abs_z == b.max_abs_z);  // deterministic, thread-invariant
}
