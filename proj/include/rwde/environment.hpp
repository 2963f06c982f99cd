#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "rwde/lattice.hpp"
#include "rwde/rng.hpp"
#include "rwde/util.hpp"

namespace rwde {

// ---------------------------------------------------------------- weights
//
// Dirichlet parameter vector (alpha_1..alpha_2d) plus the dimension. Index
// i < d is the weight of +e_{i+1}, index d+i the weight of -e_{i+1}.
// The single source of truth for every exponent computed downstream.
struct Weights {
    int d = 0;
    std::vector<double> alpha;  // size 2d, all > 0
    double alpha0 = 0.0;        // cached sum of alpha
};

// Validates and caches alpha0. Throws ConfigError on non-positive entries,
// wrong length, or d outside [1, kMaxDim].
Weights make_weights(int d, std::vector<double> alpha);

// Sum of the two weights on axis i (0-based): alpha_i + alpha_{i+d}.
inline double axis_pair(const Weights& w, int axis) {
    return w.alpha[axis] + w.alpha[axis + w.d];
}

// Mean displacement after one annealed step: component i is
// (alpha_i - alpha_{i+d}) / alpha0.
std::vector<double> drift(const Weights& w);

// ---------------------------------------------------------------- sites
//
// Transition probabilities out of one site, in direction order
// (+e_1..+e_d, -e_1..-e_d). Strictly positive, sums to 1 within 1e-12.
struct SiteProbabilities {
    std::vector<double> probs;
};

// Throws ConfigError unless probs has size 2d, all entries strictly
// positive, and |sum - 1| <= 1e-12.
void validate_site_probabilities(const SiteProbabilities& p, int d);

// One Dirichlet(alpha) draw: 2d independent Gamma(alpha_i, 1) variates
// normalized by their sum. Runs in log-space when min(alpha) < 0.05 so tiny
// shapes cannot underflow the normalization; a component that still rounds
// to zero triggers a full resample of the site (strict ellipticity).
SiteProbabilities sample_dirichlet(const Weights& w, Rng& rng);

// Exact mixed moment E[prod_i omega_i^{theta_i}] =
// prod_i Gamma(alpha_i+theta_i)/Gamma(alpha_i) * Gamma(alpha0)/Gamma(alpha0+sum theta),
// evaluated in log-Gamma space. Throws ConfigError when some
// alpha_i + theta_i <= 0 (Gamma pole).
double dirichlet_moment(const Weights& w, std::span<const double> theta);

// ---------------------------------------------------------------- lattice env
//
// Lazy i.i.d. Dirichlet field on Z^d. A site's draw is a pure function of
// (weights, master_seed, site coordinates): the stream is derived by mixing
// the coordinates into the master seed, so materialization order and thread
// schedule cannot change any value. Materialized sites are cached; the cache
// allows concurrent readers and synchronizes first materialization.
class LatticeEnvironment {
  public:
    LatticeEnvironment(Weights w, std::uint64_t master_seed,
                       std::size_t max_sites = 20'000'000);

    const Weights& weights() const { return weights_; }
    std::uint64_t master_seed() const { return master_seed_; }
    int d() const { return weights_.d; }

    // Probabilities at x; materializes and caches on first access.
    // Throws BudgetError once max_sites distinct sites are materialized.
    const SiteProbabilities& site(const Site& x) const;

    // Raw pointer form of site(x).probs for hot loops.
    const double* probs_ptr(const Site& x) const { return site(x).probs.data(); }

    std::size_t materialized_sites() const;

  private:
    SiteProbabilities draw_site(const Site& x) const;

    Weights weights_;
    std::uint64_t master_seed_;
    std::size_t max_sites_;
    mutable std::shared_mutex mu_;
    mutable std::unordered_map<Site, SiteProbabilities, SiteHash> cache_;
};

// ---------------------------------------------------------------- torus env
//
// Dense i.i.d. Dirichlet field on the d-dimensional torus of side N.
// Site index: idx = sum_k x_k N^k (coordinate 0 fastest). Storage is one
// flat array of 2d probabilities per site.
class TorusEnvironment {
  public:
    TorusEnvironment(Weights w, int N, std::uint64_t master_seed);

    // Builds a torus from externally supplied per-site probabilities (e.g.
    // the time reversal of a sampled environment). flat must hold
    // N^d * 2d entries in site-index order; every row is validated.
    static TorusEnvironment from_flat(Weights w, int N, std::vector<double> flat);

    const Weights& weights() const { return weights_; }
    int N() const { return N_; }
    int d() const { return weights_.d; }
    std::uint64_t master_seed() const { return master_seed_; }
    std::size_t n_sites() const { return n_sites_; }

    const double* probs_ptr(std::size_t idx) const {
        return flat_.data() + idx * 2 * weights_.d;
    }
    std::span<const double> probs(std::size_t idx) const {
        return {probs_ptr(idx), static_cast<std::size_t>(2 * weights_.d)};
    }

    std::size_t index_of(std::span<const int> coords) const;
    void coords_of(std::size_t idx, std::span<int> out) const;
    // Index of the site one step from idx in the given direction, wrapping.
    std::size_t neighbor(std::size_t idx, int dir) const;

  private:
    TorusEnvironment() = default;  // used by from_flat

    Weights weights_;
    int N_ = 0;
    std::uint64_t master_seed_ = 0;
    std::size_t n_sites_ = 0;
    std::vector<double> flat_;
    std::vector<std::size_t> stride_;  // N^k per coordinate
};

// Construction wrapper matching the sampling entry points: i.i.d. sites,
// reproducible from (weights, N, seed). Throws ConfigError when N < 3
// (N = 2 collapses +e and -e steps onto the same edge, creating multiple
// edges between site pairs).
TorusEnvironment sample_torus_env(const Weights& w, int N, std::uint64_t seed);

}  // namespace rwde
