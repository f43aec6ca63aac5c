#include "rwde/report.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct CliResult {
    int status = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(RWDE_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
    const int rc = pclose(pipe);
    res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return res;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream f(path);
    f << contents;
    return path;
}

}  // namespace

TEST_CASE("list prints the catalog with identity anchors", "[cli]") {
    const auto res = run_cli("list");
    REQUIRE(res.status == 0);
    for (const char* anchor :
         {"Eq. (4)", "Eq. (5)", "Eq. (7)", "Lemma 1", "Lemma 2", "Corollary"})
        REQUIRE(res.output.find(anchor) != std::string::npos);

    // stable ordering
    REQUIRE(run_cli("list").output == res.output);

    const auto js = run_cli("list --json");
    REQUIRE(js.status == 0);
    const auto parsed = rwde::Json::parse(js.output);
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() >= 9);
}

TEST_CASE("lemma 1 subcommand verifies exactly", "[cli]") {
    const auto res = run_cli("verify-lemma1 --u 1,0 --L 1 --max-cycle-len 8");
    REQUIRE(res.status == 0);
    REQUIRE(res.output.find("PASS") != std::string::npos);
}

TEST_CASE("identity subcommand reports the exact target", "[cli]") {
    const auto res =
        run_cli("identity --u 2,1 --alpha 2,1,1,1 --walks 3000 --L-ladder 4,8 --json --seed 5");
    REQUIRE(res.status == 0);
    const auto j = rwde::Json::parse(res.output);
    REQUIRE(j.at("target").at("exact") == "2/5");
    REQUIRE(rwde::validate_report_json(j).empty());
}

TEST_CASE("reports are identical across worker counts", "[cli]") {
    const std::string base = "slab-ratio --u 1,0 --L 4 --walks 3000 --seed 11 --json";
    auto j1 = rwde::Json::parse(run_cli(base + " --workers 1").output);
    auto j4 = rwde::Json::parse(run_cli(base + " --workers 4").output);
    j1.erase("runtime_seconds");
    j4.erase("runtime_seconds");
    j1["parameters"].erase("workers");
    j4["parameters"].erase("workers");
    REQUIRE(j1 == j4);
}

TEST_CASE("failing verdicts exit with status 1", "[cli]") {
    const auto res = run_cli(
        "direction --alpha 3,1,1,1 --steps 500 --walks 10 --angle-threshold 1e-12 --seed 3");
    REQUIRE(res.status == 1);
    REQUIRE(res.output.find("FAIL") != std::string::npos);
}

TEST_CASE("validation problems exit with status 2", "[cli]") {
    REQUIRE(run_cli("identity --u 0,0").status == 2);
    REQUIRE(run_cli("identity --u 1,0 --alpha 1,1,1,1").status == 2);  // drift condition
    REQUIRE(run_cli("identity --u 1,0 --alpha 2,1,1").status == 2);    // weight count
    REQUIRE(run_cli("nonsense-subcommand").status == 2);
}

TEST_CASE("config runs execute and honor the exit contract", "[cli]") {
    const auto good = temp_file("rwde_cfg_good.json", R"({
        "model": {"dimension": 2, "weights": ["2", "1", "1", "1"]},
        "direction": {"u": [1, 0]},
        "experiment": {"name": "slab-ratio", "L": 4, "walks": 2000},
        "seed": 9
    })");
    const auto out_dir = std::filesystem::temp_directory_path() / "rwde_cli_reports";
    std::filesystem::remove_all(out_dir);
    const auto res = run_cli("run --config " + good.string() + " --out " + out_dir.string());
    REQUIRE(res.status == 0);
    std::ifstream written(out_dir / "slab-ratio.json");
    REQUIRE(written.good());
    const auto j = rwde::Json::parse(written);
    REQUIRE(rwde::validate_report_json(j).empty());
    REQUIRE(j.at("parameters").at("seed") == 9);
}

TEST_CASE("malformed configs exit with status 2 and a pointed message", "[cli]") {
    const auto broken = temp_file("rwde_cfg_broken.json", "{ not json }");
    const auto res = run_cli("run --config " + broken.string());
    REQUIRE(res.status == 2);
    REQUIRE(res.output.find("config") != std::string::npos);

    const auto unknown = temp_file("rwde_cfg_unknown.json", R"({
        "model": {"dimension": 2, "weights": ["2", "1", "1", "1"]},
        "experiment": {"name": "slab-ratio"},
        "mystery": true
    })");
    const auto res2 = run_cli("run --config " + unknown.string());
    REQUIRE(res2.status == 2);
    REQUIRE(res2.output.find("mystery") != std::string::npos);

    REQUIRE(run_cli("run --config /nonexistent/path.json").status == 2);
}

TEST_CASE("frame dump is machine readable", "[cli]") {
    const auto res = run_cli("frame --u 2,1 --alpha 2,1,1,1");
    REQUIRE(res.status == 0);
    const auto j = rwde::Json::parse(res.output);
    REQUIRE(j.at("u") == rwde::Json::array({2, 1}));
    REQUIRE(j.at("H0").size() == 2);
    REQUIRE(j.at("mu") == rwde::Json::array({"3/5", "2/5"}));
    REQUIRE(j.at("Z") == "5");
}

TEST_CASE("graph dump has the documented layout", "[cli]") {
    const auto res = run_cli("graph --u 2,1 --alpha 2,1,1,1 --N 1 --L 1");
    REQUIRE(res.status == 0);
    REQUIRE(res.output.rfind("# source target step weight", 0) == 0);
    REQUIRE(res.output.find("collector") != std::string::npos);
}

TEST_CASE("walk subcommand emits CSV with a header", "[cli]") {
    const auto res = run_cli("walk --mode urn --n-steps 16 --seed 2");
    REQUIRE(res.status == 0);
    REQUIRE(res.output.rfind("step,x0,x1", 0) == 0);
    // header + 17 positions
    REQUIRE(std::count(res.output.begin(), res.output.end(), '\n') == 18);
    const auto quenched = run_cli("walk --mode quenched --n-steps 5 --seed 2");
    REQUIRE(quenched.status == 0);
}
