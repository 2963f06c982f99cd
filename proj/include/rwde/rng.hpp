#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace rwde {

// splitmix64 (Steele, Lea, Flood 2014). One instance per logical stream;
// streams never share state, so interleaving draws across streams cannot
// change any individual stream's output. That property is what makes walk
// trajectories invariant under adding or removing auxiliary randomness
// (clock draws, diagnostics) to a run.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t avalanche64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += kGoldenGamma;
        return avalanche64(state_);
    }

    // Uniform on [0, 1), 53-bit mantissa.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1), strictly interior: safe under log().
    double uniform_open() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard exponential by inversion.
    double exponential() noexcept { return -std::log(uniform_open()); }

    // Standard normal, Box-Muller (cosine branch only, so draws per call
    // stay constant and streams stay reproducible).
    double normal() noexcept {
        double u1 = uniform_open();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
};

// Stream derivation: hash-combine the master seed with a purpose tag and an
// optional coordinate vector. Distinct tags give independent streams off one
// master seed; including coordinates makes per-site streams order-free (the
// draw at a site does not depend on which sites were visited before it).
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t tag) noexcept {
    return avalanche64(master ^ avalanche64(tag + kGoldenGamma));
}

inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t tag,
                                   std::span<const std::int32_t> coords) noexcept {
    std::uint64_t h = derive_stream(master, tag);
    for (std::int32_t c : coords) {
        h = avalanche64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)) + kGoldenGamma));
    }
    return h;
}

// Stream purpose tags. Values are arbitrary but frozen: changing one changes
// every derived draw.
enum StreamTag : std::uint64_t {
    kTagSiteWeights = 0x01,   // per-site Dirichlet draw on the lattice
    kTagTorusWeights = 0x02,  // per-site Dirichlet draw on the torus
    kTagWalkDirection = 0x03, // walk step selection
    kTagWalkClock = 0x04,     // walk holding-time exponentials
    kTagGammaMc = 0x05,       // acceleration Monte Carlo trials
    kTagGeneric = 0x06,       // statistics-level resampling (bootstrap etc.)
    kTagEnvReplica = 0x07,    // per-replica environment master seeds
    kTagWalkReplica = 0x08,   // per-replica walk streams
};

// Indexed stream: replica i of a tagged family.
inline std::uint64_t derive_indexed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
    return avalanche64(derive_stream(master, tag) ^ avalanche64(index + kGoldenGamma));
}

// Gamma(shape, 1) draw, Marsaglia-Tsang squeeze for shape >= 1 and the
// power-of-uniform boost below 1. The log-space variant returns log of the
// draw and never underflows, which matters for shapes well below 0.05 where
// the linear draw can round to zero.
double gamma_draw(Rng& rng, double shape);
double log_gamma_draw(Rng& rng, double shape);

}  // namespace rwde
