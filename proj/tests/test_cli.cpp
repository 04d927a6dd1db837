#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "k3glue/cache.hpp"
#include "k3glue/report.hpp"
#include "k3glue/run_config.hpp"

using namespace k3glue;
namespace fs = std::filesystem;

namespace {

RunConfig parse_text(const std::string& text)
{
    std::istringstream in(text);
    return RunConfig::parse(in, "<test>");
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(K3GLUE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

} // namespace

TEST_CASE("run config: full parse, dyadic numbers, defaults")
{
    const RunConfig cfg = parse_text(R"(
schema_version = 1
[torus]
basis = 2 0 0  0 2 0  0 0 2
[weights]
m = 1 1 2 2 2 2 2 2
[pair]
position = 0.23 0.11 0.37
k = 2
[run]
epsilons = 2^-5 0.015625
beta = 0.4
tol_profile = fast
threads = 3
)");
    CHECK(cfg.basis(0, 0) == 2.0);
    CHECK(cfg.dihedral_weights[0] == 1);
    REQUIRE(cfg.pairs.size() == 1);
    CHECK(cfg.pairs[0].weight == 2);
    REQUIRE(cfg.epsilons.size() == 2);
    CHECK(cfg.epsilons[0] == doctest::Approx(0.03125));
    CHECK(cfg.epsilons[1] == doctest::Approx(0.015625));
    CHECK(cfg.threads == 3);
    CHECK(cfg.effective_dirs() < cfg.grid_dirs);  // fast profile shrinks grids
    CHECK_NOTHROW(cfg.charge_config());
}

TEST_CASE("run config: line-precise diagnostics")
{
    auto expect_error = [](const std::string& text, const std::string& needle) {
        try {
            parse_text(text);
            FAIL_CHECK("expected ConfigError containing '" << needle << "'");
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK(what.find(needle) != std::string::npos);
        }
    };

    expect_error("schema_version = 1\n[weights]\nm = 1 1\n", "exactly 8");
    expect_error("schema_version = 1\n[weights]\nbogus = 3\n", "unknown key 'bogus'");
    expect_error("schema_version = 1\n[mystery]\n", "unknown section");
    expect_error("schema_version = 2\n", "unsupported schema_version");
    expect_error("[weights]\nm = 2 2 2 2 2 2 2 2\n", "missing schema_version");
    expect_error("schema_version = 1\n[weights]\nm = 2 2 2 2 2 2 2 2\n[pair]\nk = 2\n",
                 "missing 'position'");
    expect_error("schema_version = 1\n[run]\nepsilons = nope\n", "expected a number");

    // The reported location carries the line number of the offense.
    try {
        parse_text("schema_version = 1\n\n[weights]\nwrong = 1\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    }
}

TEST_CASE("blob cache: roundtrip, corruption recovery, disabled mode")
{
    const std::string dir = "/tmp/k3glue_cache_test";
    fs::remove_all(dir);
    BlobCache cache(dir);
    CacheStatus status;

    const std::vector<double> payload = {1.0, 2.5, -3.75, 1e-9};
    std::vector<double> loaded;
    CHECK_FALSE(cache.load("unit", 42, loaded, status));
    CHECK(status.misses == 1);
    cache.store("unit", 42, payload, status);
    CHECK(cache.load("unit", 42, loaded, status));
    CHECK(status.hits == 1);
    CHECK(loaded == payload);

    // Truncate the file: corrupt entry counted and treated as a miss.
    std::string blob_path;
    for (const auto& entry : fs::directory_iterator(dir)) blob_path = entry.path().string();
    fs::resize_file(blob_path, 12);
    CHECK_FALSE(cache.load("unit", 42, loaded, status));
    CHECK(status.corrupt == 1);

    // Flip a payload byte: checksum failure.
    cache.store("unit", 42, payload, status);
    {
        std::fstream f(blob_path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(26);
        char b = 0x5a;
        f.write(&b, 1);
    }
    CHECK_FALSE(cache.load("unit", 42, loaded, status));
    CHECK(status.corrupt == 2);

    BlobCache disabled("");
    CHECK_FALSE(disabled.enabled());
    CHECK_FALSE(disabled.load("unit", 42, loaded, status));
}

TEST_CASE("content hashes separate configurations")
{
    const FlatTorus torus(Matrix3::Identity());
    const ChargeConfig a(torus, {1, 1, 2, 2, 2, 2, 2, 2}, {{Vector3(0.23, 0.11, 0.37), 2}});
    const ChargeConfig b(torus, {1, 2, 1, 2, 2, 2, 2, 2}, {{Vector3(0.23, 0.11, 0.37), 2}});
    CHECK(config_content_hash(a, "x") != config_content_hash(b, "x"));
    CHECK(config_content_hash(a, "x") != config_content_hash(a, "y"));
    CHECK(config_content_hash(a, "x") == config_content_hash(a, "x"));
}

TEST_CASE("report: banding, exit code, csv schema")
{
    Report rep;
    rep.check("inside", 0.5, 0.0, 1.0, "unit");
    rep.check("outside", 2.0, 0.0, 1.0, "unit");
    CHECK_FALSE(rep.all_acceptance_pass());
    CHECK(rep.exit_code() == 1);
    rep.write_csv("/tmp/k3glue_report_test.csv");
    const std::string text = slurp("/tmp/k3glue_report_test.csv");
    CHECK(text.find("name,status,measured") == 0);
    CHECK(text.find("outside,fail") != std::string::npos);
}

TEST_CASE("cli: validate subcommand and determinism across thread counts")
{
    const std::string cfg = std::string(K3GLUE_CONFIG_DIR) + "/ci_generic.cfg";

    fs::remove_all("/tmp/k3glue_cli_a");
    fs::remove_all("/tmp/k3glue_cli_b");
    REQUIRE(run_cli("validate --config " + cfg + " --out /tmp/k3glue_cli_a --threads 1") == 0);
    REQUIRE(run_cli("validate --config " + cfg + " --out /tmp/k3glue_cli_b --threads 4") == 0);
    CHECK(slurp("/tmp/k3glue_cli_a/validate_report.csv") ==
          slurp("/tmp/k3glue_cli_b/validate_report.csv"));

    // Same for a sweep-style command with parallel inner loops.
    REQUIRE(run_cli("collapse --config " + cfg + " --out /tmp/k3glue_cli_a --threads 1 "
                    "--tol-profile fast") == 0);
    REQUIRE(run_cli("collapse --config " + cfg + " --out /tmp/k3glue_cli_b --threads 4 "
                    "--tol-profile fast") == 0);
    CHECK(slurp("/tmp/k3glue_cli_a/collapse.csv") == slurp("/tmp/k3glue_cli_b/collapse.csv"));
    CHECK(!slurp("/tmp/k3glue_cli_a/collapse.csv").empty());
}

TEST_CASE("cli: cache reuse on identical reruns, corrupted entries recomputed")
{
    const std::string cfg = std::string(K3GLUE_CONFIG_DIR) + "/ci_generic.cfg";
    fs::remove_all("/tmp/k3glue_cli_cache");
    fs::remove_all("/tmp/k3glue_cli_out");
    const std::string base = " --config " + cfg +
                             " --out /tmp/k3glue_cli_out --cache /tmp/k3glue_cli_cache "
                             "--tol-profile fast --threads 2";

    REQUIRE(run_cli("monopole" + base) == 0);
    const std::string first = slurp("/tmp/k3glue_cli_out/monopole_report.csv");
    CHECK(first.find("cache hits,pass,0,") != std::string::npos);

    REQUIRE(run_cli("monopole" + base) == 0);
    const std::string second = slurp("/tmp/k3glue_cli_out/monopole_report.csv");
    CHECK(second.find("cache hits,pass,2,") != std::string::npos);  // ewald + regparts

    // Truncate every cache entry: the rerun recomputes and still succeeds.
    for (const auto& entry : fs::directory_iterator("/tmp/k3glue_cli_cache"))
        fs::resize_file(entry.path(), 10);
    REQUIRE(run_cli("monopole" + base) == 0);
    const std::string third = slurp("/tmp/k3glue_cli_out/monopole_report.csv");
    CHECK(third.find("corrupt cache entry recomputed") != std::string::npos);
}

TEST_CASE("cli: topology table matches the golden file byte for byte")
{
    const std::string cfg = std::string(K3GLUE_CONFIG_DIR) + "/kummer.cfg";
    fs::remove_all("/tmp/k3glue_cli_topo");
    REQUIRE(run_cli("topology --config " + cfg + " --out /tmp/k3glue_cli_topo") == 0);
    const std::string emitted = slurp("/tmp/k3glue_cli_topo/topology.csv");
    const std::string golden = slurp(std::string(K3GLUE_GOLDEN_DIR) + "/topology.csv");
    CHECK(!golden.empty());
    CHECK(emitted == golden);
}
