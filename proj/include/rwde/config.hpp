#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// Flat key = value configuration. '#' starts a comment; keys are
// lower_snake_case; list values are comma-separated. Unknown keys are
// rejected so typos fail loudly instead of silently using defaults.
class ExperimentConfig {
  public:
    // Parses file contents (not a path). Throws ConfigError on malformed
    // lines, unknown keys, or invalid values.
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    // An empty config: every field at its default.
    ExperimentConfig() = default;

    // Typed accessors with documented defaults.
    std::string experiment() const { return get_str("experiment", ""); }
    int dimension() const { return static_cast<int>(get_int("d", 2)); }
    std::vector<double> alpha() const;
    // Lambda shape spec, e.g. "pair", "box:1", "diamond:2". The default is
    // the L1 ball: the smallest shape for a given cut-value boost.
    std::string lambda_shape() const { return get_str("lambda", "diamond:1"); }
    std::vector<int> torus_sizes() const;
    double p_exponent() const { return get_real("p", 1.2); }
    std::uint64_t seed() const {
        return static_cast<std::uint64_t>(get_int("seed", 20240915));
    }
    std::size_t replicas() const { return static_cast<std::size_t>(get_int("replicas", 100)); }
    std::size_t n_envs() const { return static_cast<std::size_t>(get_int("n_envs", 10000)); }
    std::size_t horizon_steps() const {
        return static_cast<std::size_t>(get_int("horizon_steps", 200000));
    }
    double horizon_time() const { return get_real("horizon_time", 2000.0); }
    std::size_t n_draws() const { return static_cast<std::size_t>(get_int("n_draws", 200000)); }
    std::size_t n_windows() const { return static_cast<std::size_t>(get_int("n_windows", 10000)); }
    std::size_t levels() const { return static_cast<std::size_t>(get_int("levels", 1000)); }
    std::string out_dir() const { return get_str("out", "results"); }
    unsigned threads() const { return static_cast<unsigned>(get_int("threads", 0)); }

    // Raw access and overrides (CLI flags write through these).
    void set(const std::string& key, const std::string& value);
    std::optional<std::string> raw(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

    // Assembled weight vector; throws if alpha/d are inconsistent.
    Weights weights() const;
    NeighborhoodSet neighborhood() const;

    // Stable content hash over sorted key=value pairs; keys the ledger.
    std::string params_hash() const;

  private:
    std::string get_str(const std::string& key, const std::string& def) const;
    long long get_int(const std::string& key, long long def) const;
    double get_real(const std::string& key, double def) const;

    std::map<std::string, std::string> kv_;
};

}  // namespace rwde
