#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs the installed binary (path in RWDE_BIN) and captures stdout.
int run_cli(const std::string& args, std::string& out) {
    const char* bin = std::getenv("RWDE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "RWDE_BIN must point at the rwde binary");
    const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    out.clear();
    char buf[4096];
    while (std::fgets(buf, sizeof(buf), pipe) != nullptr) out += buf;
    const int status = ::pclose(pipe);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "rwde_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path path = dir / "run.cfg";
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing file " << path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

const char* kIdentityCfg =
    "experiment = gamma-identity\n"
    "d = 2\n"
    "alpha = 0.3, 0.1, 0.3, 0.1\n"
    "n_envs = 150\n"
    "seed = 42\n";

const char* kThetaCfg =
    "experiment = theta-tail\n"
    "d = 2\n"
    "alpha = 1, 1, 1, 1\n"
    "n_draws = 4000\n"
    "seed = 42\n";

}  // namespace

// ---------------------------------------------------------------- exponents

TEST_CASE("exponents subcommand prints the closed-form table") {
    const fs::path dir = fresh_dir("exponents");
    const fs::path cfg = write_config(
        dir, "d = 3\nalpha = 0.12, 0.06, 0.06, 0.04, 0.06, 0.06\n");
    std::string out;
    const int code = run_cli("exponents --config " + cfg.string(), out);
    CHECK(code == 0);
    const auto lines = lines_of(out);
    REQUIRE(lines.size() == 8);
    CHECK(lines[0] == "kappa                   = 0.64");
    CHECK(lines[1] == "drift                   = (0.2, 0, 0)");
    CHECK(lines[2] == "box cut value R=0       = 0.4");
    CHECK(lines[3] == "box cut value R=1       = 0.64");
    CHECK(lines[4] == "box cut value R=2       = 0.88");
    CHECK(lines[5] == "box cut value R=3       = 1.12");
    CHECK(lines[6] == "box cut value R=4       = 1.36");
    CHECK(lines[7] == "minimal R with cut > 1  = 3");
}

// ---------------------------------------------------------------- run: pass

TEST_CASE("run writes summary, ledger, and plot data on a passing experiment") {
    const fs::path dir = fresh_dir("identity");
    const fs::path cfg = write_config(dir, kIdentityCfg);
    const fs::path out_dir = dir / "results";
    std::string out;
    const int code =
        run_cli("run gamma-identity --config " + cfg.string() + " --out " +
                    out_dir.string(),
                out);
    CHECK(code == 0);
    CHECK(contains(out, "PASS gamma-identity (exit 0)"));
    CHECK(contains(out, "wrote " + out_dir.string() + "/gamma-identity_summary.json"));
    CHECK(contains(out, "wrote " + out_dir.string() + "/ledger.csv"));
    CHECK(contains(out, "wrote " + out_dir.string() + "/gamma-identity_deviation.dat"));

    const json j = json::parse(slurp(out_dir / "gamma-identity_summary.json"));
    CHECK(j.at("schema_version") == 1);
    CHECK(j.at("experiment") == "gamma-identity");
    CHECK(j.at("pass") == true);
    CHECK(j.at("exit_code") == 0);
    CHECK(j.at("params_hash").get<std::string>().size() == 16);
    CHECK(j.at("config").at("n_envs") == "150");
    CHECK(j.at("config").at("seed") == "42");
    CHECK(j.at("config").at("out") == out_dir.string());

    REQUIRE(j.at("reports").size() == 2);
    CHECK(j["reports"][0].at("target") == "gamma_singleton_max_abs_dev");
    CHECK(j["reports"][0].at("estimate").get<double>() <= 1e-14);
    CHECK(j["reports"][0].at("n") == 150);
    CHECK(j["reports"][1].at("target") == "gamma_pair_uniform");
    CHECK(std::abs(j["reports"][1].at("estimate").get<double>() - 16.0 / 15.0) <=
          1e-12);
    CHECK(j["reports"][1].at("seed") == 42);
    CHECK(j["reports"][1].at("metadata").at("abs_dev").get<double>() <= 1e-12);

    for (const auto& artifact : j.at("artifacts")) {
        CHECK(fs::exists(out_dir / artifact.get<std::string>()));
    }

    // Plot data: one "index deviation" pair per environment, space-separated.
    const auto rows = lines_of(slurp(out_dir / "gamma-identity_deviation.dat"));
    REQUIRE(rows.size() == 150);
    double x = 0.0, y = 0.0;
    REQUIRE(std::sscanf(rows[7].c_str(), "%lf %lf", &x, &y) == 2);
    CHECK(x == 7.0);
    CHECK(y >= 0.0);

    const auto ledger = lines_of(slurp(out_dir / "ledger.csv"));
    REQUIRE(ledger.size() == 3);  // header + two reports
    CHECK(ledger[0] == "target,estimate,ci_low,ci_high,n,seed,params_hash");
    CHECK(contains(ledger[1], "gamma_singleton_max_abs_dev,"));
    CHECK(contains(ledger[2], "gamma_pair_uniform,"));
}

TEST_CASE("rerunning the same config rewrites byte-identical outputs") {
    const fs::path dir = fresh_dir("rerun");
    const fs::path cfg = write_config(dir, kThetaCfg);
    const fs::path out_dir = dir / "results";
    const std::string args =
        "run theta-tail --config " + cfg.string() + " --out " + out_dir.string();
    std::string out;
    REQUIRE(run_cli(args, out) == 0);
    const std::string summary1 = slurp(out_dir / "theta-tail_summary.json");
    const std::string ledger1 = slurp(out_dir / "ledger.csv");
    const std::string tail1 = slurp(out_dir / "theta-tail_tail.dat");
    const std::string exact1 = slurp(out_dir / "theta-tail_exact.dat");

    REQUIRE(run_cli(args, out) == 0);
    CHECK(slurp(out_dir / "theta-tail_summary.json") == summary1);
    CHECK(slurp(out_dir / "ledger.csv") == ledger1);
    CHECK(slurp(out_dir / "theta-tail_tail.dat") == tail1);
    CHECK(slurp(out_dir / "theta-tail_exact.dat") == exact1);
}

TEST_CASE("ledger accumulates distinct configs and replaces reruns") {
    const fs::path dir = fresh_dir("ledger");
    const fs::path out_dir = dir / "results";
    const fs::path cfg_a = write_config(dir, kIdentityCfg);
    const fs::path theta_dir = fresh_dir("ledger_theta");
    const fs::path cfg_b = write_config(theta_dir, kThetaCfg);
    const std::string args_a = "run gamma-identity --config " + cfg_a.string() +
                               " --out " + out_dir.string();
    const std::string args_b = "run theta-tail --config " + cfg_b.string() +
                               " --out " + out_dir.string();
    std::string out;
    REQUIRE(run_cli(args_a, out) == 0);
    REQUIRE(run_cli(args_b, out) == 0);
    const std::string both = slurp(out_dir / "ledger.csv");
    const auto both_rows = lines_of(both);
    REQUIRE(both_rows.size() == 8);  // header + 2 identity + 5 theta levels
    CHECK(contains(both, "gamma_pair_uniform,"));
    CHECK(contains(both, "theta_tail_n2,"));

    // Rerunning the most recent config rewrites the very same bytes.
    REQUIRE(run_cli(args_b, out) == 0);
    CHECK(slurp(out_dir / "ledger.csv") == both);

    // Rerunning the older config moves its rows to the end, nothing is lost.
    REQUIRE(run_cli(args_a, out) == 0);
    const auto rows = lines_of(slurp(out_dir / "ledger.csv"));
    REQUIRE(rows.size() == 8);
    CHECK(contains(rows[1], "theta_tail_n2,"));
    CHECK(contains(rows[6], "gamma_singleton_max_abs_dev,"));
    CHECK(contains(rows[7], "gamma_pair_uniform,"));
}

// ---------------------------------------------------------------- run: fail

TEST_CASE("a failed statistical gate exits 1 and records the failure") {
    const fs::path dir = fresh_dir("statfail");
    // Drift tuned so the replica classes split: no class reaches the 90%
    // dominance gate at this horizon.
    const fs::path cfg = write_config(dir,
                                      "experiment = transience\n"
                                      "d = 2\n"
                                      "alpha = 0.32, 0.2, 0.14, 0.2\n"
                                      "replicas = 40\n"
                                      "horizon_steps = 2000\n"
                                      "seed = 424242\n");
    const fs::path out_dir = dir / "results";
    std::string out;
    const int code = run_cli(
        "run transience --config " + cfg.string() + " --out " + out_dir.string(),
        out);
    CHECK(code == 1);
    CHECK(contains(out, "FAIL transience (exit 1)"));
    CHECK(contains(out, "FAIL: one behavior class dominates"));

    const json j = json::parse(slurp(out_dir / "transience_summary.json"));
    CHECK(j.at("pass") == false);
    CHECK(j.at("exit_code") == 1);
    // The failed run still persists its reports for inspection.
    CHECK(j.at("reports").size() >= 2);
    CHECK(j["reports"][0].at("target") == "directional_transience");
}

// ---------------------------------------------------------------- exit 2 / 3

TEST_CASE("configuration errors exit 2") {
    const fs::path dir = fresh_dir("config_errors");
    std::string out;

    SUBCASE("unknown experiment fails before touching the output directory") {
        const fs::path out_dir = dir / "results";
        const int code = run_cli("run nonesuch --out " + out_dir.string(), out);
        CHECK(code == 2);
        CHECK(contains(out, "config error: unknown experiment 'nonesuch'"));
        CHECK(contains(out, "FAIL nonesuch (exit 2)"));
        CHECK_FALSE(fs::exists(out_dir));
    }

    SUBCASE("unknown config key") {
        const fs::path cfg = write_config(dir, "bogus = 1\n");
        const int code = run_cli("exponents --config " + cfg.string(), out);
        CHECK(code == 2);
        const json j = json::parse(out);
        CHECK(j.at("error") == "config");
        CHECK(contains(j.at("message").get<std::string>(), "bogus"));
        CHECK(j.at("exit_code") == 2);
    }

    SUBCASE("duplicate config key") {
        const fs::path cfg = write_config(dir, "d = 2\nd = 3\n");
        const int code = run_cli("exponents --config " + cfg.string(), out);
        CHECK(code == 2);
        CHECK(json::parse(out).at("error") == "config");
    }

    SUBCASE("missing config file") {
        const int code =
            run_cli("exponents --config " + (dir / "absent.cfg").string(), out);
        CHECK(code == 2);
        const json j = json::parse(out);
        CHECK(j.at("error") == "config");
        CHECK(contains(j.at("message").get<std::string>(), "cannot open"));
    }

    SUBCASE("unknown flag is a cli error") {
        const int code = run_cli("run gamma-identity --nope 3", out);
        CHECK(code == 2);
        const json j = json::parse(out);
        CHECK(j.at("error") == "cli");
        CHECK(j.at("exit_code") == 2);
    }
}

TEST_CASE("an estimator failure inside an experiment exits 3") {
    const fs::path dir = fresh_dir("estfail");
    // Too few draws for the Hill floor: the runner fails cleanly, keeps the
    // note, and still writes the summary.
    const fs::path cfg = write_config(dir,
                                      "experiment = gamma-tail\n"
                                      "d = 2\n"
                                      "lambda = pair\n"
                                      "alpha = 0.3, 0.1, 0.3, 0.1\n"
                                      "n_draws = 2000\n"
                                      "seed = 7\n");
    const fs::path out_dir = dir / "results";
    std::string out;
    const int code = run_cli(
        "run gamma-tail --config " + cfg.string() + " --out " + out_dir.string(),
        out);
    CHECK(code == 3);
    CHECK(contains(out, "FAIL gamma-tail (exit 3)"));
    CHECK(contains(out, "estimate error: hill"));

    const json j = json::parse(slurp(out_dir / "gamma-tail_summary.json"));
    CHECK(j.at("exit_code") == 3);
    CHECK(j.at("pass") == false);
}

// ---------------------------------------------------------------- report

TEST_CASE("report renders the ledger as aligned columns") {
    const fs::path dir = fresh_dir("report");
    const fs::path cfg = write_config(dir, kIdentityCfg);
    const fs::path out_dir = dir / "results";
    std::string out;
    REQUIRE(run_cli("run gamma-identity --config " + cfg.string() + " --out " +
                        out_dir.string(),
                    out) == 0);

    const int code = run_cli("report --out " + out_dir.string(), out);
    CHECK(code == 0);
    const auto lines = lines_of(out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].substr(0, 6) == "target");
    CHECK(contains(lines[0], "estimate"));
    CHECK(contains(lines[0], "params_hash"));
    CHECK(lines[1].substr(0, 28) == "gamma_singleton_max_abs_dev ");
    CHECK(contains(lines[2], "gamma_pair_uniform"));
    // Aligned: the second column starts at one shared offset.
    const std::size_t col = lines[1].find("  ");
    CHECK(lines[2].substr(0, 18) + std::string(col - 18, ' ') ==
          lines[2].substr(0, col));

    std::string empty_out;
    const fs::path bare = fresh_dir("report_bare");
    CHECK(run_cli("report --out " + bare.string(), empty_out) == 0);
    CHECK(contains(empty_out, "no ledger at"));
}

// ---------------------------------------------------------------- overrides

TEST_CASE("global flags override the config file") {
    const fs::path dir = fresh_dir("overrides");
    const fs::path cfg = write_config(dir, kIdentityCfg);  // seed = 42 inside
    const fs::path out_dir = dir / "results";
    std::string out;
    REQUIRE(run_cli("run gamma-identity --config " + cfg.string() + " --seed 777" +
                        " --replicas 9 --threads 2 --out " + out_dir.string(),
                    out) == 0);
    const json j = json::parse(slurp(out_dir / "gamma-identity_summary.json"));
    CHECK(j.at("config").at("seed") == "777");
    CHECK(j.at("config").at("replicas") == "9");
    CHECK(j.at("config").at("threads") == "2");
    CHECK(j["reports"][0].at("seed") == 777);
    const std::string hash1 = j.at("params_hash");

    // threads and out stay out of the parameter hash: rerunning with a
    // different worker count replaces the ledger rows instead of adding new
    // ones.
    REQUIRE(run_cli("run gamma-identity --config " + cfg.string() + " --seed 777" +
                        " --replicas 9 --threads 1 --out " + out_dir.string(),
                    out) == 0);
    const json j2 = json::parse(slurp(out_dir / "gamma-identity_summary.json"));
    CHECK(j2.at("params_hash") == hash1);
    CHECK(lines_of(slurp(out_dir / "ledger.csv")).size() == 3);
}
