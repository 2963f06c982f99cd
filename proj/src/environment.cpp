#include "rwde/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rwde {

// ---------------------------------------------------------------- weights

Weights make_weights(int d, std::vector<double> alpha) {
    if (d < 1 || d > kMaxDim) {
        throw ConfigError("weights: dimension must be in [1, " +
                          std::to_string(kMaxDim) + "], got " + std::to_string(d));
    }
    if (alpha.size() != static_cast<std::size_t>(2 * d)) {
        throw ConfigError("weights: expected " + std::to_string(2 * d) +
                          " alpha entries, got " + std::to_string(alpha.size()));
    }
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw ConfigError("weights: every alpha entry must be finite and > 0");
        }
        sum += a;
    }
    Weights w;
    w.d = d;
    w.alpha = std::move(alpha);
    w.alpha0 = sum;
    return w;
}

std::vector<double> drift(const Weights& w) {
    std::vector<double> v(w.d);
    for (int i = 0; i < w.d; ++i) {
        v[i] = (w.alpha[i] - w.alpha[i + w.d]) / w.alpha0;
    }
    return v;
}

// ---------------------------------------------------------------- sampling

void validate_site_probabilities(const SiteProbabilities& p, int d) {
    if (p.probs.size() != static_cast<std::size_t>(2 * d)) {
        throw ConfigError("site probabilities: wrong arity");
    }
    double sum = 0.0;
    for (double v : p.probs) {
        if (!(v > 0.0)) throw ConfigError("site probabilities: entry not strictly positive");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError("site probabilities: sum deviates from 1 beyond 1e-12");
    }
}

SiteProbabilities sample_dirichlet(const Weights& w, Rng& rng) {
    const int m = 2 * w.d;
    const bool log_route =
        *std::min_element(w.alpha.begin(), w.alpha.end()) < 0.05;
    SiteProbabilities out;
    out.probs.resize(m);
    std::vector<double> work(m);
    // A component can round to zero only through extreme shape ratios; a
    // fresh draw of the whole site preserves both i.i.d.-ness and strict
    // positivity. The attempt cap turns a (never observed) persistent
    // degeneracy into a diagnosable failure instead of a spin.
    for (int attempt = 0; attempt < 64; ++attempt) {
        if (log_route) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                work[i] = log_gamma_draw(rng, w.alpha[i]);
                mx = std::max(mx, work[i]);
            }
            double sum = 0.0;
            for (int i = 0; i < m; ++i) {
                out.probs[i] = std::exp(work[i] - mx);
                sum += out.probs[i];
            }
            for (int i = 0; i < m; ++i) out.probs[i] /= sum;
        } else {
            double sum = 0.0;
            for (int i = 0; i < m; ++i) {
                work[i] = gamma_draw(rng, w.alpha[i]);
                sum += work[i];
            }
            for (int i = 0; i < m; ++i) out.probs[i] = work[i] / sum;
        }
        bool all_positive = true;
        for (int i = 0; i < m; ++i) {
            if (!(out.probs[i] > 0.0)) {
                all_positive = false;
                break;
            }
        }
        if (all_positive) return out;
    }
    throw EstimateError("sample_dirichlet: component underflowed to zero in 64 consecutive site draws");
}

double dirichlet_moment(const Weights& w, std::span<const double> theta) {
    if (theta.size() != w.alpha.size()) {
        throw ConfigError("dirichlet_moment: exponent vector has wrong arity");
    }
    double log_num = 0.0;
    double theta_sum = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double shifted = w.alpha[i] + theta[i];
        if (!(shifted > 0.0)) {
            throw ConfigError("dirichlet_moment: alpha_i + theta_i must be > 0 (Gamma pole)");
        }
        log_num += std::lgamma(shifted) - std::lgamma(w.alpha[i]);
        theta_sum += theta[i];
    }
    if (!(w.alpha0 + theta_sum > 0.0)) {
        throw ConfigError("dirichlet_moment: alpha0 + sum(theta) must be > 0");
    }
    const double log_den = std::lgamma(w.alpha0 + theta_sum) - std::lgamma(w.alpha0);
    return std::exp(log_num - log_den);
}

// ---------------------------------------------------------------- lattice env

LatticeEnvironment::LatticeEnvironment(Weights w, std::uint64_t master_seed,
                                       std::size_t max_sites)
    : weights_(std::move(w)), master_seed_(master_seed), max_sites_(max_sites) {}

SiteProbabilities LatticeEnvironment::draw_site(const Site& x) const {
    Rng rng(derive_stream(master_seed_, kTagSiteWeights,
                          std::span<const std::int32_t>(x.c.data(),
                                                        static_cast<std::size_t>(weights_.d))));
    return sample_dirichlet(weights_, rng);
}

const SiteProbabilities& LatticeEnvironment::site(const Site& x) const {
    {
        std::shared_lock lk(mu_);
        auto it = cache_.find(x);
        if (it != cache_.end()) return it->second;
    }
    // Draw outside the lock: the value is a pure function of (seed, x), so a
    // racing duplicate draw is bit-identical and the first insert wins.
    SiteProbabilities fresh = draw_site(x);
    std::unique_lock lk(mu_);
    if (cache_.size() >= max_sites_ && cache_.find(x) == cache_.end()) {
        throw BudgetError("lattice environment: materialized site budget (" +
                          std::to_string(max_sites_) + ") exhausted");
    }
    auto [it, inserted] = cache_.emplace(x, std::move(fresh));
    return it->second;
}

std::size_t LatticeEnvironment::materialized_sites() const {
    std::shared_lock lk(mu_);
    return cache_.size();
}

// ---------------------------------------------------------------- torus env

TorusEnvironment::TorusEnvironment(Weights w, int N, std::uint64_t master_seed)
    : weights_(std::move(w)), N_(N), master_seed_(master_seed) {
    if (N < 3) {
        throw ConfigError("torus environment: N must be >= 3 (N = 2 creates multiple edges)");
    }
    const int d = weights_.d;
    stride_.resize(d);
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) {
        stride_[k] = n;
        n *= static_cast<std::size_t>(N);
    }
    n_sites_ = n;
    flat_.resize(n_sites_ * 2 * d);
    std::array<std::int32_t, kMaxDim> coords{};
    for (std::size_t idx = 0; idx < n_sites_; ++idx) {
        std::size_t rem = idx;
        for (int k = 0; k < d; ++k) {
            coords[k] = static_cast<std::int32_t>(rem % N);
            rem /= N;
        }
        Rng rng(derive_stream(master_seed_, kTagTorusWeights,
                              std::span<const std::int32_t>(coords.data(),
                                                            static_cast<std::size_t>(d))));
        SiteProbabilities p = sample_dirichlet(weights_, rng);
        std::copy(p.probs.begin(), p.probs.end(), flat_.begin() + idx * 2 * d);
    }
}

TorusEnvironment TorusEnvironment::from_flat(Weights w, int N, std::vector<double> flat) {
    if (N < 3) {
        throw ConfigError("torus environment: N must be >= 3 (N = 2 creates multiple edges)");
    }
    const int d = w.d;
    TorusEnvironment env;
    env.weights_ = std::move(w);
    env.N_ = N;
    env.stride_.resize(d);
    std::size_t n = 1;
    for (int k = 0; k < d; ++k) {
        env.stride_[k] = n;
        n *= static_cast<std::size_t>(N);
    }
    env.n_sites_ = n;
    if (flat.size() != n * 2 * static_cast<std::size_t>(d)) {
        throw ConfigError("torus environment: flat probability table has wrong size");
    }
    env.flat_ = std::move(flat);
    SiteProbabilities row;
    for (std::size_t idx = 0; idx < n; ++idx) {
        row.probs.assign(env.probs_ptr(idx), env.probs_ptr(idx) + 2 * d);
        validate_site_probabilities(row, d);
    }
    return env;
}

std::size_t TorusEnvironment::index_of(std::span<const int> coords) const {
    std::size_t idx = 0;
    for (int k = 0; k < weights_.d; ++k) {
        int c = coords[k] % N_;
        if (c < 0) c += N_;
        idx += static_cast<std::size_t>(c) * stride_[k];
    }
    return idx;
}

void TorusEnvironment::coords_of(std::size_t idx, std::span<int> out) const {
    for (int k = 0; k < weights_.d; ++k) {
        out[k] = static_cast<int>(idx % N_);
        idx /= N_;
    }
}

std::size_t TorusEnvironment::neighbor(std::size_t idx, int dir) const {
    const int d = weights_.d;
    const int axis = dir < d ? dir : dir - d;
    const int delta = dir < d ? 1 : -1;
    const int c = static_cast<int>((idx / stride_[axis]) % N_);
    int nc = c + delta;
    if (nc == N_) nc = 0;
    if (nc < 0) nc = N_ - 1;
    const std::ptrdiff_t diff =
        static_cast<std::ptrdiff_t>(nc - c) * static_cast<std::ptrdiff_t>(stride_[axis]);
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + diff);
}

TorusEnvironment sample_torus_env(const Weights& w, int N, std::uint64_t seed) {
    return TorusEnvironment(w, N, seed);
}

}  // namespace rwde
