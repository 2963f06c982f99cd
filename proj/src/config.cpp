#include "rwde/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rwde/rng.hpp"

namespace rwde {

namespace {

// Every key the runner understands. Parsing rejects anything else so a
// typoed key fails the run instead of silently falling back to a default.
const std::array<const char*, 16> kKnownKeys = {
    "experiment", "d",        "alpha",         "lambda",       "torus_sizes",
    "p",          "seed",     "replicas",      "n_envs",       "horizon_steps",
    "horizon_time", "n_draws", "n_windows",    "levels",       "out",
    "threads"};

bool known_key(const std::string& key) {
    for (const char* k : kKnownKeys) {
        if (key == k) return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key or value");
        }
        if (cfg.kv_.count(key)) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        }
        cfg.set(key, value);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (!known_key(key)) {
        throw ConfigError("config: unknown key '" + key + "'");
    }
    if (trim(value).empty()) {
        throw ConfigError("config: empty value for key '" + key + "'");
    }
    kv_[key] = trim(value);
}

std::optional<std::string> ExperimentConfig::raw(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
}

std::string ExperimentConfig::get_str(const std::string& key,
                                      const std::string& def) const {
    auto v = raw(key);
    return v ? *v : def;
}

long long ExperimentConfig::get_int(const std::string& key, long long def) const {
    auto v = raw(key);
    if (!v) return def;
    long long out = 0;
    const char* first = v->data();
    const char* last = first + v->size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + *v + "'");
    }
    return out;
}

double ExperimentConfig::get_real(const std::string& key, double def) const {
    auto v = raw(key);
    if (!v) return def;
    try {
        std::size_t pos = 0;
        const double out = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a real number, got '" + *v + "'");
    }
}

std::vector<double> ExperimentConfig::alpha() const {
    auto v = raw("alpha");
    if (!v) return {};
    std::vector<double> out;
    for (const std::string& tok : split_commas(*v)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("config: alpha entry '" + tok + "' is not a real number");
        }
    }
    return out;
}

std::vector<int> ExperimentConfig::torus_sizes() const {
    auto v = raw("torus_sizes");
    if (!v) return {3, 4, 5, 6};
    std::vector<int> out;
    for (const std::string& tok : split_commas(*v)) {
        int n = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw ConfigError("config: torus size '" + tok + "' is not an integer");
        }
        out.push_back(n);
    }
    if (out.empty()) throw ConfigError("config: torus_sizes must not be empty");
    return out;
}

Weights ExperimentConfig::weights() const {
    const int d = dimension();
    std::vector<double> a = alpha();
    if (a.empty()) a.assign(static_cast<std::size_t>(2 * d), 1.0);
    return make_weights(d, std::move(a));
}

NeighborhoodSet ExperimentConfig::neighborhood() const {
    return parse_neighborhood(lambda_shape(), dimension());
}

std::string ExperimentConfig::params_hash() const {
    // Chain every byte of the sorted key=value list through the 64-bit
    // mixer; std::map iteration is already sorted, so the hash is stable
    // across insertion orders. Operational keys (worker count, output
    // directory) do not change what is computed, so they stay out of the
    // statistical identity the ledger keys on.
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (const auto& [k, v] : kv_) {
        if (k == "threads" || k == "out") continue;
        for (char c : k) h = avalanche64(h ^ static_cast<unsigned char>(c));
        h = avalanche64(h ^ '=');
        for (char c : v) h = avalanche64(h ^ static_cast<unsigned char>(c));
        h = avalanche64(h ^ ';');
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) {
        out[static_cast<std::size_t>(15 - i)] = hex[(h >> (4 * i)) & 0xF];
    }
    return out;
}

}  // namespace rwde
