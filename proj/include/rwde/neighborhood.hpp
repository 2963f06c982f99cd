#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rwde/lattice.hpp"

namespace rwde {

// Finite connected set of lattice sites containing the origin. Defines the
// acceleration region: the walk's acceleration at x looks at exit paths from
// x + Lambda. Vertices are kept in canonical site order so every downstream
// enumeration and tie-break is deterministic.
class NeighborhoodSet {
  public:
    // {0}.
    static NeighborhoodSet singleton(int d);
    // {0, e_1}.
    static NeighborhoodSet pair(int d);
    // Sup-norm ball of radius R.
    static NeighborhoodSet box(int R, int d);
    // L1 ball of radius R.
    static NeighborhoodSet diamond(int R, int d);
    // Arbitrary vertex list; validates origin membership, connectivity, and
    // uniqueness. Throws ConfigError on violation.
    static NeighborhoodSet from_sites(std::vector<Site> sites, int d);

    int d() const { return d_; }
    std::size_t size() const { return vertices_.size(); }
    const std::vector<Site>& vertices() const { return vertices_; }
    // Sites of Lambda with at least one nearest neighbor outside Lambda.
    const std::vector<Site>& boundary() const { return boundary_; }
    bool contains(const Site& s) const { return index_.count(s) != 0; }
    // Position of s in vertices(), or -1.
    int index_of(const Site& s) const;
    // Max L1 norm over members; the R_Lambda scale used by excursion tests.
    int l1_radius() const { return l1_radius_; }
    const std::string& name() const { return name_; }

  private:
    NeighborhoodSet() = default;
    void finalize(std::string name);

    int d_ = 0;
    int l1_radius_ = 0;
    std::string name_;
    std::vector<Site> vertices_;
    std::vector<Site> boundary_;
    std::unordered_map<Site, int, SiteHash> index_;
};

// Parses a shape spec: "singleton", "pair", "box:R", "diamond:R".
// Throws ConfigError on anything else.
NeighborhoodSet parse_neighborhood(const std::string& spec, int d);

}  // namespace rwde
