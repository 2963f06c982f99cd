#include "rwde/neighborhood.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "rwde/util.hpp"

namespace rwde {

void NeighborhoodSet::finalize(std::string name) {
    name_ = std::move(name);
    std::sort(vertices_.begin(), vertices_.end(),
              [this](const Site& a, const Site& b) { return canonical_less(a, b, d_); });
    index_.clear();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (!index_.emplace(vertices_[i], static_cast<int>(i)).second) {
            throw ConfigError("neighborhood: duplicate vertex " +
                              site_to_string(vertices_[i], d_));
        }
    }
    if (!index_.count(Site{})) {
        throw ConfigError("neighborhood: must contain the origin");
    }
    // Connectivity under nearest-neighbor adjacency, from the origin.
    std::unordered_set<Site, SiteHash> seen;
    std::deque<Site> frontier{Site{}};
    seen.insert(Site{});
    while (!frontier.empty()) {
        Site cur = frontier.front();
        frontier.pop_front();
        for (int dir = 0; dir < 2 * d_; ++dir) {
            Site nxt = step(cur, dir, d_);
            if (index_.count(nxt) && !seen.count(nxt)) {
                seen.insert(nxt);
                frontier.push_back(nxt);
            }
        }
    }
    if (seen.size() != vertices_.size()) {
        throw ConfigError("neighborhood: vertex set is not connected");
    }
    boundary_.clear();
    l1_radius_ = 0;
    for (const Site& v : vertices_) {
        l1_radius_ = std::max(l1_radius_, norm1(v, d_));
        for (int dir = 0; dir < 2 * d_; ++dir) {
            if (!index_.count(step(v, dir, d_))) {
                boundary_.push_back(v);
                break;
            }
        }
    }
}

int NeighborhoodSet::index_of(const Site& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : it->second;
}

NeighborhoodSet NeighborhoodSet::singleton(int d) {
    NeighborhoodSet out;
    out.d_ = d;
    out.vertices_ = {Site{}};
    out.finalize("singleton");
    return out;
}

NeighborhoodSet NeighborhoodSet::pair(int d) {
    NeighborhoodSet out;
    out.d_ = d;
    Site e1;
    e1.c[0] = 1;
    out.vertices_ = {Site{}, e1};
    out.finalize("pair");
    return out;
}

namespace {

void fill_box(std::vector<Site>& out, Site& cur, int axis, int R, int d) {
    if (axis == d) {
        out.push_back(cur);
        return;
    }
    for (int v = -R; v <= R; ++v) {
        cur.c[axis] = v;
        fill_box(out, cur, axis + 1, R, d);
    }
    cur.c[axis] = 0;
}

}  // namespace

NeighborhoodSet NeighborhoodSet::box(int R, int d) {
    if (R < 0) throw ConfigError("neighborhood: box radius must be >= 0");
    NeighborhoodSet out;
    out.d_ = d;
    Site cur;
    fill_box(out.vertices_, cur, 0, R, d);
    out.finalize("box:" + std::to_string(R));
    return out;
}

NeighborhoodSet NeighborhoodSet::diamond(int R, int d) {
    if (R < 0) throw ConfigError("neighborhood: diamond radius must be >= 0");
    NeighborhoodSet out;
    out.d_ = d;
    Site cur;
    std::vector<Site> box_sites;
    fill_box(box_sites, cur, 0, R, d);
    for (const Site& s : box_sites) {
        if (norm1(s, d) <= R) out.vertices_.push_back(s);
    }
    out.finalize("diamond:" + std::to_string(R));
    return out;
}

NeighborhoodSet NeighborhoodSet::from_sites(std::vector<Site> sites, int d) {
    if (d < 1 || d > kMaxDim) throw ConfigError("neighborhood: bad dimension");
    NeighborhoodSet out;
    out.d_ = d;
    out.vertices_ = std::move(sites);
    out.finalize("custom");
    return out;
}

NeighborhoodSet parse_neighborhood(const std::string& spec, int d) {
    auto radius_of = [&](const std::string& s, const char* shape) {
        auto pos = s.find(':');
        if (pos == std::string::npos) {
            throw ConfigError(std::string("neighborhood spec '") + s + "' needs a radius, e.g. " +
                              shape + ":1");
        }
        try {
            return std::stoi(s.substr(pos + 1));
        } catch (const std::exception&) {
            throw ConfigError("neighborhood spec '" + s + "': bad radius");
        }
    };
    if (spec == "singleton") return NeighborhoodSet::singleton(d);
    if (spec == "pair") return NeighborhoodSet::pair(d);
    if (spec.rfind("box", 0) == 0) return NeighborhoodSet::box(radius_of(spec, "box"), d);
    if (spec.rfind("diamond", 0) == 0) {
        return NeighborhoodSet::diamond(radius_of(spec, "diamond"), d);
    }
    throw ConfigError("unknown neighborhood spec '" + spec +
                      "' (expected singleton, pair, box:R, diamond:R)");
}

}  // namespace rwde
