#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "support/cli_runner.hpp"

namespace fs = std::filesystem;
using vcsem::cli::ExitCode;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("vcsem_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("usage and input errors map to exit codes") {
    const fs::path dir = scratch("errors");
    CHECK(support::run_cli({"fit"}) == ExitCode::kUsage);
    CHECK(support::run_cli({"frobnicate"}) == ExitCode::kUsage);
    CHECK(support::run_cli({"fit", "--data", (dir / "absent.csv").string(), "--out", (dir / "o").string()}) ==
          ExitCode::kIoError);

    write_file(dir / "nocov.csv", "a,b\n1,2\n3,4\n");
    CHECK(support::run_cli({"fit", "--data", (dir / "nocov.csv").string(), "--out", (dir / "o").string()}) ==
          ExitCode::kMissingColumn);

    write_file(dir / "nan.csv", "a,b,z\n1,2,0\n3,inf,1\n");
    CHECK(support::run_cli({"fit", "--data", (dir / "nan.csv").string(), "--out", (dir / "o").string()}) ==
          ExitCode::kNonFiniteData);

    write_file(dir / "junk.csv", "a,b,z\n1,x,0\n");
    CHECK(support::run_cli({"fit", "--data", (dir / "junk.csv").string(), "--out", (dir / "o").string()}) ==
          ExitCode::kInvalidInput);
    fs::remove_all(dir);
}

TEST_CASE("simulate, fit, summarize and eval produce consistent outputs") {
    const fs::path dir = scratch("pipeline");
    const std::string sim = (dir / "sim").string();
    const std::string fit = (dir / "fit").string();
    REQUIRE(support::run_cli({"simulate", "--scenario", "1", "--p", "4", "--n", "150", "--seed", "3", "--out", sim}) ==
            ExitCode::kOk);
    REQUIRE(support::run_cli({"fit", "--data", sim + "/data.csv", "--out", fit, "--seed", "7", "--iters", "60",
                              "--burnin", "20", "--thin", "4"}) == ExitCode::kOk);

    std::ifstream lines(fit + "/chain.jsonl");
    int count = 0;
    for (std::string line; std::getline(lines, line);) ++count;
    CHECK(count == 10);

    const auto summary = nlohmann::json::parse(std::ifstream(fit + "/summary.json"));
    const auto& ppi = summary.at("ppi");
    REQUIRE(ppi.size() == 4);
    for (int j = 0; j < 4; ++j) CHECK(ppi[j][j].get<double>() == 0.0);

    const std::string re = (dir / "re").string();
    REQUIRE(support::run_cli({"summarize", "--chain", fit, "--out", re}) == ExitCode::kOk);
    CHECK(support::read_bytes(fit + "/summary.json").size() > 0);
    const auto again = nlohmann::json::parse(std::ifstream(re + "/summary.json"));
    CHECK(again.at("ppi") == summary.at("ppi"));

    const std::string ev = (dir / "ev").string();
    REQUIRE(support::run_cli({"eval", "--truth", sim + "/truth.json", "--estimate", fit + "/summary.json", "--out",
                              ev}) == ExitCode::kOk);
    const auto metrics = nlohmann::json::parse(std::ifstream(ev + "/metrics.json"));
    CHECK(metrics.at("tp").get<int>() + metrics.at("fp").get<int>() + metrics.at("tn").get<int>() +
              metrics.at("fn").get<int>() ==
          12);

    const std::string vc = (dir / "vc").string();
    REQUIRE(support::run_cli({"varcurve", "--data", sim + "/data.csv", "--out", vc, "--bootstrap-reps", "20"}) ==
            ExitCode::kOk);
    CHECK(fs::exists(vc + "/varcurve.json"));
    fs::remove_all(dir);
}

TEST_CASE("fit is byte-stable for a fixed seed") {
    const fs::path dir = scratch("stable");
    const std::string sim = (dir / "sim").string();
    REQUIRE(support::run_cli({"simulate", "--scenario", "2", "--p", "3", "--n", "100", "--seed", "1", "--out", sim}) ==
            ExitCode::kOk);
    const std::vector<std::string> fit = {"fit",     "--data", sim + "/data.csv", "--out",   (dir / "f").string(),
                                          "--seed",  "7",      "--iters",         "40",      "--burnin",
                                          "20",      "--thin", "2"};
    REQUIRE(support::run_cli(fit) == ExitCode::kOk);
    const auto first = support::snapshot(dir / "f");
    fs::remove_all(dir / "f");
    REQUIRE(support::run_cli(fit) == ExitCode::kOk);
    CHECK(support::snapshot(dir / "f") == first);
    CHECK(first.count("chain.jsonl") == 1);
    fs::remove_all(dir);
}
