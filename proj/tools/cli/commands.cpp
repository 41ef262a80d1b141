#include "cli/commands.hpp"

#include <filesystem>
#include <iostream>
#include <span>

#include <CLI11.hpp>

#include "vcsem/chain_io.hpp"
#include "vcsem/evaluate.hpp"
#include "vcsem/io.hpp"
#include "vcsem/parallel.hpp"
#include "vcsem/sampler.hpp"
#include "vcsem/simulate.hpp"

namespace fs = std::filesystem;

namespace vcsem::cli {
namespace {

fs::path prepare_out_dir(const std::string& out) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorKind::io_error, "cannot create output directory '" + out + "'");
    }
    return dir;
}

void warn(const std::string& kind, const std::string& message) {
    std::cerr << "vcsem: warning kind=" << kind << " message=" << nlohmann::json(message).dump() << '\n';
}

std::span<const double> col_span(const Matrix& m, Eigen::Index c) {
    return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

void regress_out_mean(Dataset& data) {
    const double h = silverman_bandwidth(data.z_span());
    for (int c = 0; c < data.p(); ++c) {
        const auto mean = kernel_conditional_mean(col_span(data.x, c), data.z_span(), data.z_span(), h);
        for (Eigen::Index i = 0; i < data.n(); ++i) data.x(i, c) -= mean[static_cast<std::size_t>(i)];
    }
}

BirthProposal parse_birth(const std::string& s) {
    if (s == "conditional") return BirthProposal::conditional;
    if (s == "prior") return BirthProposal::prior;
    throw Error(ErrorKind::invalid_argument, "unknown birth proposal '" + s + "'");
}

Hyperparameters hyperparameters_from(const RunConfig& config, int p) {
    Hyperparameters hp;
    hp.a = config.a;
    hp.b = config.b;
    hp.alpha = config.alpha;
    hp.beta0 = config.beta0;
    hp.basis_count = config.basis;
    hp.dof = config.dof ? *config.dof : static_cast<double>(p);
    hp = hp.resolved(p);
    hp.validate(p);
    return hp;
}

void write_summary_outputs(const fs::path& dir, const Chain& chain, const RunConfig& config) {
    const auto summary = summarize(chain, config.threshold, default_summary_grid(chain.scaling, config.grid_points),
                                   config.strict_domain ? DomainPolicy::strict : DomainPolicy::clamp);
    if (summary.clamped_grid_points > 0) {
        warn("out_of_domain", std::to_string(summary.clamped_grid_points) + " grid points clamped to the covariate range");
    }
    auto json = summary_to_json(summary, chain.names);
    json["config"] = config.to_json();
    write_json(dir / "summary.json", json);
    write_json(dir / "graph.json", graph_to_json(summary.graph, chain.names));
    write_band_csv(dir / "bands.csv", summary, chain.names);
}

EdgeIndicators read_graph_file(const std::string& path) {
    return indicators_from_graph(graph_from_json(read_json(path)));
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::missing_column: return kMissingColumn;
        case ErrorKind::non_finite_data: return kNonFiniteData;
        case ErrorKind::io_error: return kIoError;
        case ErrorKind::invalid_argument:
        case ErrorKind::out_of_domain:
        case ErrorKind::index_out_of_range:
        case ErrorKind::dimension_mismatch:
        case ErrorKind::insufficient_data:
        case ErrorKind::parse_error:
        case ErrorKind::empty_chain: return kInvalidInput;
        case ErrorKind::near_singular:
        case ErrorKind::not_positive_definite:
        case ErrorKind::retry_exhausted:
        case ErrorKind::pathological_data: return kNumerical;
    }
    return kUnexpected;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    if (subcommand == "simulate") {
        j["scenario"] = scenario;
        j["p"] = p;
        j["n"] = n;
        j["edge_prob"] = edge_prob ? nlohmann::json(*edge_prob) : nlohmann::json("1/p");
        j["curvature"] = curvature;
        j["seed"] = seed;
    } else if (subcommand == "fit" || subcommand == "summarize") {
        if (subcommand == "fit") {
            j["data"] = data;
            j["covariate_col"] = covariate_col;
            j["seed"] = seed;
            j["iters"] = iters;
            j["burnin"] = burnin;
            j["thin"] = thin;
            j["basis"] = basis;
            j["a"] = a;
            j["b"] = b;
            j["alpha"] = alpha;
            j["beta0"] = beta0;
            j["psi"] = "identity";
            j["dof"] = dof ? nlohmann::json(*dof) : nlohmann::json("p");
            j["acyclic"] = acyclic;
            j["birth_proposal"] = birth_proposal;
            j["anneal_sweeps"] = anneal_sweeps < 0 ? burnin / 2 : anneal_sweeps;
            j["initial_temperature"] = initial_temperature;
            j["regress_out_mean"] = regress_out_mean;
        } else {
            j["chain"] = chain;
        }
        j["threshold"] = threshold;
        j["grid_points"] = grid_points;
        j["strict_domain"] = strict_domain;
    } else if (subcommand == "eval") {
        j["truth"] = truth;
        j["estimate"] = estimate;
    } else if (subcommand == "varcurve") {
        j["data"] = data;
        j["covariate_col"] = covariate_col;
        j["grid_points"] = grid_points;
        j["bandwidth"] = bandwidth ? nlohmann::json(*bandwidth) : nlohmann::json("silverman");
        j["bootstrap_reps"] = bootstrap_reps;
        j["block_length"] = block_length;
        j["seed"] = seed;
    }
    j["out"] = out;
    return j;
}

void cmd_simulate(const RunConfig& config) {
    const auto scenario = parse_scenario(config.scenario);
    if (!scenario) throw Error(ErrorKind::invalid_argument, "unknown scenario '" + config.scenario + "'");
    ScenarioConfig sc;
    sc.scenario = *scenario;
    sc.p = *scenario == Scenario::misspec1 ? 3 : config.p;
    sc.n = config.n;
    sc.edge_prob = config.edge_prob;
    sc.curvature = config.curvature;
    sc.seed = config.seed;
    const Simulation sim = simulate(sc);

    const fs::path dir = prepare_out_dir(config.out);
    write_dataset(dir / "data.csv", sim.data.observed);
    if (sim.truth.hidden > 0) write_dataset(dir / "oracle.csv", sim.data.full);

    const int q = sim.truth.p_observed();
    auto truth = graph_to_json(make_mixed_graph(sim.truth.observed_indicators(),
                                                NoiseCovariance(sim.truth.s.matrix().topLeftCorner(q, q))),
                               sim.data.observed.names);
    auto effects = nlohmann::json::array();
    const int pt = sim.truth.p_total();
    for (int j = 0; j < pt; ++j)
        for (int l = 0; l < pt; ++l)
            if (sim.truth.r(j, l)) {
                const auto& e = *sim.truth.effect(j, l);
                effects.push_back({{"edge", {l + 1, j + 1}}, {"effect", e.label()}, {"scale", e.scale},
                                   {"curvature", e.curvature}});
            }
    truth["effects"] = effects;
    truth["S"] = matrix_to_json(sim.truth.s.matrix());
    truth["p_total"] = pt;
    truth["hidden"] = sim.truth.hidden;
    truth["shrink_factor"] = sim.truth.shrink_factor;
    write_json(dir / "truth.json", truth);
    write_json(dir / "config.json", config.to_json());
}

void cmd_fit(const RunConfig& config) {
    if (config.data.empty()) throw Error(ErrorKind::invalid_argument, "--data is required");
    Dataset data = read_dataset(config.data, config.covariate_col);
    if (data.p() < 2) throw Error(ErrorKind::invalid_argument, "need at least two non-covariate columns");
    if (config.regress_out_mean) regress_out_mean(data);

    const Hyperparameters hp = hyperparameters_from(config, data.p());
    const Schedule schedule{config.iters, config.burnin, config.thin};
    SamplerOptions options;
    options.acyclic = config.acyclic;
    options.birth_proposal = parse_birth(config.birth_proposal);
    options.anneal_sweeps = config.anneal_sweeps;
    options.initial_temperature = config.initial_temperature;

    const fs::path dir = prepare_out_dir(config.out);
    const Chain chain = run_chain(data, hp, schedule, config.seed, options);
    write_chain(dir / "chain.jsonl", dir / "chain_header.json", chain, config.to_json());
    write_summary_outputs(dir, chain, config);
}

void cmd_summarize(const RunConfig& config) {
    if (config.chain.empty()) throw Error(ErrorKind::invalid_argument, "--chain is required");
    const fs::path src(config.chain);
    const Chain chain = read_chain(src / "chain.jsonl", src / "chain_header.json");
    write_summary_outputs(prepare_out_dir(config.out), chain, config);
}

void cmd_eval(const RunConfig& config) {
    if (config.truth.empty() || config.estimate.empty()) {
        throw Error(ErrorKind::invalid_argument, "--truth and --estimate are required");
    }
    const EdgeIndicators truth = read_graph_file(config.truth);
    const nlohmann::json estimate_json = read_json(config.estimate);
    const EdgeIndicators estimate = indicators_from_graph(graph_from_json(estimate_json));
    const MetricsReport m = structure_metrics(truth, estimate);
    nlohmann::json out = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn},
                          {"tpr", m.tpr}, {"fdr", m.fdr}, {"mcc", m.mcc}};
    if (estimate_json.contains("ppi")) {
        const int p = truth.p();
        Matrix scores(p, p);
        const auto& ppi = estimate_json.at("ppi");
        if (ppi.size() != static_cast<std::size_t>(p)) throw Error(ErrorKind::dimension_mismatch, "ppi has wrong size");
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) scores(j, l) = ppi.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(l)).get<double>();
        out["auc"] = roc_auc(truth, scores);
    }
    out["config"] = config.to_json();
    write_json(prepare_out_dir(config.out) / "metrics.json", out);
}

void cmd_varcurve(const RunConfig& config) {
    if (config.data.empty()) throw Error(ErrorKind::invalid_argument, "--data is required");
    const Dataset data = read_dataset(config.data, config.covariate_col);
    const fs::path dir = prepare_out_dir(config.out);
    const auto grid = default_variance_grid(data.z_span(), config.grid_points);
    auto columns = nlohmann::json::array();
    for (int c = 0; c < data.p(); ++c) {
        const auto x = col_span(data.x, c);
        const VarianceCurve curve = kernel_conditional_variance(x, data.z_span(), grid, config.bandwidth);
        const FlatnessResult flat =
            flatness_test(x, data.z_span(), curve, config.bootstrap_reps, config.seed + static_cast<std::uint64_t>(c),
                          config.block_length);
        Matrix table(static_cast<Eigen::Index>(grid.size()), 4);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto row = static_cast<Eigen::Index>(g);
            table(row, 0) = grid[g];
            table(row, 1) = curve.estimate[g];
            table(row, 2) = flat.lower[g];
            table(row, 3) = flat.upper[g];
        }
        const std::string file = "varcurve_" + std::to_string(c + 1) + ".csv";
        write_csv(dir / file, {data.covariate_name, "variance", "lower", "upper"}, table);
        columns.push_back({{"column", data.names[static_cast<std::size_t>(c)]}, {"file", file},
                           {"bandwidth", curve.bandwidth}, {"flat", flat.flat}, {"score", flat.score}});
    }
    write_json(dir / "varcurve.json", {{"columns", columns}, {"config", config.to_json()}});
}

int run(int argc, char** argv) {
    CLI::App app{"Bayesian discovery of cyclic, confounded causal graphs from heterogeneous data"};
    app.require_subcommand(1);
    RunConfig config;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", config.out, "Output directory")->capture_default_str();
        sub->add_option("--threads", config.threads, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--data", config.data, "Input CSV with a header row")->required();
        sub->add_option("--covariate-col", config.covariate_col, "Covariate column name")->capture_default_str();
    };
    auto add_summary = [&](CLI::App* sub) {
        sub->add_option("--threshold", config.threshold, "PPI threshold (edge kept iff PPI > threshold)")
            ->capture_default_str();
        sub->add_option("--grid-points", config.grid_points, "Points in the effect-band grid")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_flag("--strict-domain", config.strict_domain, "Fail instead of clamping out-of-range covariates");
    };

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
    add_common(sim);
    sim->add_option("--scenario", config.scenario, "1|2|3|misspec1 (or cyclic_confounded, ...)")->capture_default_str();
    sim->add_option("--p", config.p, "Number of nodes")->capture_default_str();
    sim->add_option("--n", config.n, "Sample size")->capture_default_str();
    sim->add_option("--edge-prob", config.edge_prob, "Edge probability (default 1/p)");
    sim->add_option("--curvature", config.curvature, "Misspecification-1 curvature")->capture_default_str();
    sim->add_option("--seed", config.seed, "Random seed")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Run the MCMC sampler and summarize the posterior");
    add_common(fit);
    add_data(fit);
    add_summary(fit);
    fit->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    fit->add_option("--iters", config.iters, "Total iterations")->capture_default_str();
    fit->add_option("--burnin", config.burnin, "Burn-in iterations")->capture_default_str();
    fit->add_option("--thin", config.thin, "Keep every thin-th iteration after burn-in")->capture_default_str();
    fit->add_option("--basis", config.basis, "Number of cubic B-spline basis functions K")->capture_default_str();
    fit->add_option("--a", config.a, "Beta prior shape a")->capture_default_str();
    fit->add_option("--b", config.b, "Beta prior shape b")->capture_default_str();
    fit->add_option("--alpha", config.alpha, "Inverse-gamma shape for tau")->capture_default_str();
    fit->add_option("--beta0", config.beta0, "Inverse-gamma scale for tau")->capture_default_str();
    fit->add_option("--dof", config.dof, "Inverse-Wishart degrees of freedom (default p)");
    fit->add_flag("--acyclic", config.acyclic, "Restrict the sampler to acyclic graphs");
    fit->add_option("--birth-proposal", config.birth_proposal, "conditional|prior")->capture_default_str();
    fit->add_option("--anneal-sweeps", config.anneal_sweeps,
                    "Burn-in sweeps over which the likelihood power rises to 1 (default burnin / 2)");
    fit->add_option("--initial-temperature", config.initial_temperature, "Likelihood power at the first sweep")
        ->check(CLI::Range(1e-6, 1.0))
        ->capture_default_str();
    fit->add_flag("--regress-out-mean", config.regress_out_mean,
                  "Subtract a kernel estimate of E[X_j | z] from every column before fitting");

    auto* sum = app.add_subcommand("summarize", "Summarize an existing chain");
    add_common(sum);
    add_summary(sum);
    sum->add_option("--chain", config.chain, "Directory with chain.jsonl and chain_header.json")->required();

    auto* ev = app.add_subcommand("eval", "Compare an estimated graph against the truth");
    add_common(ev);
    ev->add_option("--truth", config.truth, "Ground-truth graph JSON")->required();
    ev->add_option("--estimate", config.estimate, "Estimated graph or summary JSON")->required();

    auto* vc = app.add_subcommand("varcurve", "Kernel conditional-variance curves per column");
    add_common(vc);
    add_data(vc);
    vc->add_option("--grid-points", config.grid_points, "Grid size")->check(CLI::PositiveNumber)->capture_default_str();
    vc->add_option("--bandwidth", config.bandwidth, "Kernel bandwidth (default Silverman)");
    vc->add_option("--bootstrap-reps", config.bootstrap_reps, "Bootstrap replicates")->capture_default_str();
    vc->add_option("--block-length", config.block_length, "Bootstrap block length")->capture_default_str();
    vc->add_option("--seed", config.seed, "Random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        set_thread_count(config.threads);
        if (sim->parsed()) {
            config.subcommand = "simulate";
            cmd_simulate(config);
        } else if (fit->parsed()) {
            config.subcommand = "fit";
            cmd_fit(config);
        } else if (sum->parsed()) {
            config.subcommand = "summarize";
            cmd_summarize(config);
        } else if (ev->parsed()) {
            config.subcommand = "eval";
            cmd_eval(config);
        } else if (vc->parsed()) {
            config.subcommand = "varcurve";
            cmd_varcurve(config);
        }
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        std::cerr << "vcsem: error kind=" << to_string(e.kind()) << " exit=" << code
                  << " message=" << nlohmann::json(std::string(e.what())).dump() << '\n';
        return code;
    } catch (const std::exception& e) {
        std::cerr << "vcsem: error kind=unexpected exit=" << kUnexpected
                  << " message=" << nlohmann::json(std::string(e.what())).dump() << '\n';
        return kUnexpected;
    }
    return kOk;
}

}  // namespace vcsem::cli
