#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>

namespace rwde {

// Dimension cap: sites are fixed-size arrays so they can be hashed and
// copied without allocation. Raising the cap is a recompile, not a redesign.
inline constexpr int kMaxDim = 8;

// A lattice site. Coordinates beyond the active dimension stay zero, so
// equality and hashing can ignore the dimension.
struct Site {
    std::array<std::int32_t, kMaxDim> c{};

    friend bool operator==(const Site&, const Site&) = default;
};

struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept {
        std::uint64_t h = 0x9E3779B97F4A7C15ull;
        for (std::int32_t v : s.c) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) + 0x9E3779B97F4A7C15ull +
                 (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

// Directions are indexed 0..2d-1: direction i < d is +e_{i+1}, direction
// d + i is -e_{i+1}. opposite() maps between the two halves.
inline int opposite_dir(int dir, int d) noexcept {
    return dir < d ? dir + d : dir - d;
}

inline Site step(Site s, int dir, int d) noexcept {
    if (dir < d) {
        s.c[dir] += 1;
    } else {
        s.c[dir - d] -= 1;
    }
    return s;
}

inline int norm1(const Site& s, int d) noexcept {
    int n = 0;
    for (int i = 0; i < d; ++i) n += std::abs(s.c[i]);
    return n;
}

// Signed component of s along direction dir's axis, oriented so that a site
// reached by one step in direction dir from the origin has value +1.
inline int component_along(const Site& s, int dir, int d) noexcept {
    return dir < d ? s.c[dir] : -s.c[dir - d];
}

// Canonical site order: by L1 norm, then per coordinate by absolute value
// with the positive sign first. Puts the origin first; among nearest
// neighbors a smaller |coordinate| in an earlier axis wins, so higher-axis
// unit vectors come first (d = 2: 0, +e_2, -e_2, +e_1, -e_1). Every
// tie-break over vertex sets in this codebase sorts by this order, so
// reported minimizers are unique and stable across platforms.
inline bool canonical_less(const Site& a, const Site& b, int d) noexcept {
    int na = norm1(a, d), nb = norm1(b, d);
    if (na != nb) return na < nb;
    for (int i = 0; i < d; ++i) {
        int aa = std::abs(a.c[i]), ab = std::abs(b.c[i]);
        if (aa != ab) return aa < ab;
        bool sa = a.c[i] < 0, sb = b.c[i] < 0;
        if (sa != sb) return sb;
    }
    return false;
}

inline std::string site_to_string(const Site& s, int d) {
    std::string out = "(";
    for (int i = 0; i < d; ++i) {
        if (i) out += ",";
        out += std::to_string(s.c[i]);
    }
    out += ")";
    return out;
}

}  // namespace rwde
