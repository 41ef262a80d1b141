#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vcsem/error.hpp"

namespace vcsem::cli {

/// Process exit codes, one per failure class.
enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kUsage = 2,
    kMissingColumn = 3,
    kNonFiniteData = 4,
    kIoError = 5,
    kInvalidInput = 6,
    kNumerical = 7,
};

int exit_code_for(ErrorKind kind) noexcept;

/// Effective settings of one invocation. Defaults:
/// psi = I, dof = p, a = b = 0.5, alpha = beta0 = 0.01, K = 10, schedule (2000, 1000, 5), threshold 0.5.
struct RunConfig {
    std::string subcommand;

    // I/O
    std::string data;
    std::string covariate_col = "z";
    std::string out = ".";
    std::string chain;     // summarize: directory holding chain.jsonl and chain_header.json
    std::string truth;     // eval
    std::string estimate;  // eval

    std::uint64_t seed = 1;
    int threads = 1;

    // sampler
    int iters = 2000;
    int burnin = 1000;
    int thin = 5;
    double threshold = 0.5;
    int basis = 10;
    double a = 0.5;
    double b = 0.5;
    double alpha = 0.01;
    double beta0 = 0.01;
    std::optional<double> dof;  // default p
    bool acyclic = false;
    std::string birth_proposal = "conditional";
    int anneal_sweeps = -1;  // burnin / 2
    double initial_temperature = 0.01;
    bool strict_domain = false;
    bool regress_out_mean = false;
    int grid_points = 50;

    // simulate
    std::string scenario = "1";
    int p = 10;
    int n = 1000;
    std::optional<double> edge_prob;
    double curvature = 1.0;

    // varcurve
    std::optional<double> bandwidth;
    int bootstrap_reps = 200;
    int block_length = 1;

    /// Everything that can influence outputs; the worker count is omitted because results do not depend on it.
    nlohmann::json to_json() const;
};

void cmd_simulate(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_summarize(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_varcurve(const RunConfig& config);

/// Parses argv, dispatches, and maps errors to exit codes with a one-line report on stderr.
int run(int argc, char** argv);

}  // namespace vcsem::cli
