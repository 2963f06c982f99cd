#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <thread>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/rng.hpp"
#include "rwde/util.hpp"

using namespace rwde;

namespace {

// z-score of the empirical mean of prod_i omega_i^theta_i against the
// closed-form moment, with the closed-form variance.
double moment_z(const Weights& w, const std::vector<SiteProbabilities>& draws,
                std::vector<double> theta) {
    double acc = 0.0;
    for (const SiteProbabilities& p : draws) {
        double v = 1.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (theta[i] != 0.0) v *= std::pow(p.probs[i], theta[i]);
        }
        acc += v;
    }
    const double mean = acc / static_cast<double>(draws.size());
    const double m1 = dirichlet_moment(w, theta);
    std::vector<double> twice = theta;
    for (double& t : twice) t *= 2.0;
    const double m2 = dirichlet_moment(w, twice);
    const double var = m2 - m1 * m1;
    return (mean - m1) / std::sqrt(var / static_cast<double>(draws.size()));
}

std::vector<SiteProbabilities> draw_many(const Weights& w, std::uint64_t seed,
                                         std::size_t n) {
    Rng rng(derive_stream(seed, kTagGeneric));
    std::vector<SiteProbabilities> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_dirichlet(w, rng));
    return out;
}

}  // namespace

// ---------------------------------------------------------------- weights

TEST_CASE("make_weights validates shape and caches alpha0") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    CHECK(w.d == 2);
    CHECK(w.alpha.size() == 4);
    CHECK(w.alpha0 == doctest::Approx(0.8).epsilon(1e-15));

    CHECK_THROWS_AS(make_weights(2, {0.3, 0.1, 0.3}), ConfigError);
    CHECK_THROWS_AS(make_weights(2, {0.3, 0.1, 0.3, 0.0}), ConfigError);
    CHECK_THROWS_AS(make_weights(2, {0.3, 0.1, -0.3, 0.1}), ConfigError);
    CHECK_THROWS_AS(make_weights(0, {}), ConfigError);
    CHECK_THROWS_AS(make_weights(9, std::vector<double>(18, 1.0)), ConfigError);
}

TEST_CASE("axis_pair and drift") {
    const Weights w = make_weights(3, {0.12, 0.06, 0.06, 0.04, 0.06, 0.06});
    CHECK(axis_pair(w, 0) == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(axis_pair(w, 1) == doctest::Approx(0.12).epsilon(1e-15));
    CHECK(axis_pair(w, 2) == doctest::Approx(0.12).epsilon(1e-15));

    const std::vector<double> dr = drift(w);
    REQUIRE(dr.size() == 3);
    CHECK(dr[0] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(std::abs(dr[1]) < 1e-15);
    CHECK(std::abs(dr[2]) < 1e-15);

    const Weights sym = make_weights(2, {1.0, 1.0, 1.0, 1.0});
    for (double c : drift(sym)) CHECK(std::abs(c) < 1e-15);
}

TEST_CASE("site probability validation") {
    SiteProbabilities good{{0.3, 0.1, 0.4, 0.2}};
    CHECK_NOTHROW(validate_site_probabilities(good, 2));

    SiteProbabilities short_row{{0.5, 0.5}};
    CHECK_THROWS_AS(validate_site_probabilities(short_row, 2), ConfigError);

    SiteProbabilities zero{{0.0, 0.3, 0.4, 0.3}};
    CHECK_THROWS_AS(validate_site_probabilities(zero, 2), ConfigError);

    SiteProbabilities off{{0.3, 0.1, 0.4, 0.2 + 1e-9}};
    CHECK_THROWS_AS(validate_site_probabilities(off, 2), ConfigError);

    SiteProbabilities near{{0.3, 0.1, 0.4, 0.2 + 5e-13}};
    CHECK_NOTHROW(validate_site_probabilities(near, 2));
}

// ---------------------------------------------------------------- moments

TEST_CASE("dirichlet_moment matches exact rational values") {
    struct Case {
        int d;
        std::vector<double> alpha;
        std::vector<double> theta;
        double expect;
    };
    // Independently derived by iterated Beta reduction over exact rationals.
    const std::vector<Case> cases = {
        {2, {0.3, 0.1, 0.3, 0.1}, {1, 0, 0, 0}, 3.0 / 8.0},
        {2, {0.3, 0.1, 0.3, 0.1}, {2, 0, 0, 0}, 13.0 / 48.0},
        {2, {0.3, 0.1, 0.3, 0.1}, {1, 1, 0, 0}, 1.0 / 48.0},
        {2, {0.3, 0.1, 0.3, 0.1}, {1, 0, 2, 0}, 13.0 / 448.0},
        {2, {1, 1, 1, 1}, {1, 1, 0, 0}, 1.0 / 20.0},
        {2, {1, 1, 1, 1}, {3, 0, 0, 0}, 1.0 / 20.0},
        {3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1}, {1, 0, 0, 0, 0, 0}, 0.5},
        {3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1}, {1, 0, 0, 1, 0, 0}, 1.0 / 40.0},
        {3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1}, {0, 2, 0, 0, 0, 0}, 11.0 / 200.0},
    };
    for (const Case& c : cases) {
        const Weights w = make_weights(c.d, c.alpha);
        CHECK(dirichlet_moment(w, c.theta) ==
              doctest::Approx(c.expect).epsilon(1e-13));
    }
}

TEST_CASE("dirichlet_moment matches fractional-exponent quadrature") {
    // High-precision quadrature of the marginal Beta integral.
    const Weights w2 = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    CHECK(dirichlet_moment(w2, std::vector<double>{0.5, 0, 0, 0}) ==
          doctest::Approx(0.50484499949625169387).epsilon(1e-13));

    const Weights w3 = make_weights(3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1});
    CHECK(dirichlet_moment(w3, std::vector<double>{0, 0.25, 0, 0, 0, 0}) ==
          doctest::Approx(0.29527162364359572700).epsilon(1e-13));
}

TEST_CASE("dirichlet_moment rejects gamma poles") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    CHECK_THROWS_AS(dirichlet_moment(w, std::vector<double>{-0.3, 0, 0, 0}),
                    ConfigError);
    CHECK_THROWS_AS(dirichlet_moment(w, std::vector<double>{0, -0.5, 0, 0}),
                    ConfigError);
    // Negative exponents above the pole are legal.
    CHECK(dirichlet_moment(w, std::vector<double>{-0.1, 0, 0, 0}) > 1.0);
}

// ---------------------------------------------------------------- sampler

TEST_CASE("sampler matches closed-form moments within 5 sigma") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    const auto draws = draw_many(w, 0x5eedu, 50'000);
    for (const SiteProbabilities& p : draws) {
        validate_site_probabilities(p, 2);
    }
    CHECK(std::abs(moment_z(w, draws, {1, 0, 0, 0})) < 5.0);
    CHECK(std::abs(moment_z(w, draws, {2, 0, 0, 0})) < 5.0);
    CHECK(std::abs(moment_z(w, draws, {0, 1, 1, 0})) < 5.0);
    CHECK(std::abs(moment_z(w, draws, {1, 0, 1, 0})) < 5.0);
}

TEST_CASE("sampler log-space route keeps tiny shapes elliptic") {
    // min(alpha) < 0.05 selects the log-space normalization.
    const Weights w = make_weights(2, {0.02, 0.02, 0.02, 0.02});
    const auto draws = draw_many(w, 0x7abcu, 20'000);
    for (const SiteProbabilities& p : draws) {
        validate_site_probabilities(p, 2);  // strictly positive, sums to 1
    }
    CHECK(std::abs(moment_z(w, draws, {1, 0, 0, 0})) < 5.0);
    CHECK(std::abs(moment_z(w, draws, {0, 0, 1, 0})) < 5.0);
}

// ---------------------------------------------------------------- lattice env

TEST_CASE("lattice environment is a pure function of seed and site") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    std::vector<Site> sites;
    for (int i = 0; i < 50; ++i) {
        Site s;
        s.c[0] = 7 * i - 100;
        s.c[1] = (i * i) % 13 - 6;
        sites.push_back(s);
    }

    LatticeEnvironment fwd(w, 42);
    LatticeEnvironment rev(w, 42);
    for (const Site& s : sites) (void)fwd.site(s);
    for (auto it = sites.rbegin(); it != sites.rend(); ++it) (void)rev.site(*it);
    for (const Site& s : sites) {
        CHECK(fwd.site(s).probs == rev.site(s).probs);  // bitwise
        validate_site_probabilities(fwd.site(s), 2);
    }

    LatticeEnvironment other(w, 43);
    CHECK(other.site(sites[0]).probs != fwd.site(sites[0]).probs);

    // Repeated access does not re-materialize.
    const std::size_t n = fwd.materialized_sites();
    (void)fwd.site(sites[0]);
    CHECK(fwd.materialized_sites() == n);
}

TEST_CASE("lattice environment enforces the site budget") {
    const Weights w = make_weights(2, {1, 1, 1, 1});
    LatticeEnvironment env(w, 1, 3);
    for (int i = 0; i < 3; ++i) {
        Site s;
        s.c[0] = i;
        (void)env.site(s);
    }
    Site s4;
    s4.c[0] = 99;
    CHECK_THROWS_AS((void)env.site(s4), BudgetError);
    // Cached sites stay readable after the cap is hit.
    Site s0;
    CHECK_NOTHROW((void)env.site(s0));
}

TEST_CASE("lattice environment concurrent reads agree with serial") {
    const Weights w = make_weights(3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1});
    std::vector<Site> sites;
    for (int i = 0; i < 200; ++i) {
        Site s;
        s.c[0] = i % 17;
        s.c[1] = i % 5 - 2;
        s.c[2] = i / 29;
        sites.push_back(s);
    }
    LatticeEnvironment serial(w, 7);
    std::vector<std::vector<double>> expect;
    for (const Site& s : sites) expect.push_back(serial.site(s).probs);

    LatticeEnvironment shared(w, 7);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t) {
        pool.emplace_back([&shared, &sites] {
            for (const Site& s : sites) (void)shared.site(s);
        });
    }
    for (std::thread& t : pool) t.join();
    for (std::size_t i = 0; i < sites.size(); ++i) {
        CHECK(shared.site(sites[i]).probs == expect[i]);
    }
    CHECK(shared.materialized_sites() == serial.materialized_sites());
}

// ---------------------------------------------------------------- torus env

TEST_CASE("torus index layout: coordinate 0 fastest") {
    const Weights w = make_weights(3, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1});
    TorusEnvironment env(w, 4, 11);
    CHECK(env.n_sites() == 64);
    for (int z = 0; z < 4; ++z) {
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                const std::vector<int> c = {x, y, z};
                const std::size_t idx = static_cast<std::size_t>(x + 4 * y + 16 * z);
                CHECK(env.index_of(c) == idx);
                std::vector<int> back(3);
                env.coords_of(idx, back);
                CHECK(back == c);
            }
        }
    }
    // Wrapping single steps, both orientations of every axis.
    CHECK(env.neighbor(env.index_of(std::vector<int>{3, 2, 1}), 0) ==
          env.index_of(std::vector<int>{0, 2, 1}));
    CHECK(env.neighbor(env.index_of(std::vector<int>{0, 0, 0}), 5) ==
          env.index_of(std::vector<int>{0, 0, 3}));
    for (std::size_t idx = 0; idx < env.n_sites(); ++idx) {
        for (int dir = 0; dir < 3; ++dir) {
            CHECK(env.neighbor(env.neighbor(idx, dir), dir + 3) == idx);
        }
    }
}

TEST_CASE("torus from_flat validates every row") {
    const Weights w = make_weights(2, {1, 1, 1, 1});
    std::vector<double> flat(9 * 4, 0.25);
    CHECK_NOTHROW(TorusEnvironment::from_flat(w, 3, flat));

    std::vector<double> short_flat(9 * 4 - 1, 0.25);
    CHECK_THROWS_AS(TorusEnvironment::from_flat(w, 3, short_flat), ConfigError);

    std::vector<double> bad = flat;
    bad[4 * 4 + 2] = 0.26;  // row 4 no longer sums to 1
    CHECK_THROWS_AS(TorusEnvironment::from_flat(w, 3, bad), ConfigError);

    // Round trip: supplied rows come back verbatim.
    std::vector<double> jag(9 * 4);
    for (int k = 0; k < 9; ++k) {
        const double a = 0.1 + 0.05 * static_cast<double>(k % 3);
        jag[static_cast<std::size_t>(4 * k) + 0] = a;
        jag[static_cast<std::size_t>(4 * k) + 1] = 0.3;
        jag[static_cast<std::size_t>(4 * k) + 2] = 0.5 - a;
        jag[static_cast<std::size_t>(4 * k) + 3] = 0.2;
    }
    const TorusEnvironment env = TorusEnvironment::from_flat(w, 3, jag);
    for (std::size_t k = 0; k < 9; ++k) {
        for (int i = 0; i < 4; ++i) {
            CHECK(env.probs_ptr(k)[i] == jag[4 * k + static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("torus environment sampling is deterministic in the seed") {
    const Weights w = make_weights(2, {0.3, 0.1, 0.3, 0.1});
    TorusEnvironment a(w, 5, 99);
    TorusEnvironment b(w, 5, 99);
    TorusEnvironment c(w, 5, 100);
    bool all_equal = true, any_diff = false;
    for (std::size_t k = 0; k < a.n_sites(); ++k) {
        for (int i = 0; i < 4; ++i) {
            all_equal = all_equal && a.probs_ptr(k)[i] == b.probs_ptr(k)[i];
            any_diff = any_diff || a.probs_ptr(k)[i] != c.probs_ptr(k)[i];
        }
        validate_site_probabilities(SiteProbabilities{{a.probs_ptr(k)[0],
                                                       a.probs_ptr(k)[1],
                                                       a.probs_ptr(k)[2],
                                                       a.probs_ptr(k)[3]}},
                                    2);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}
