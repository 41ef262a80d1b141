#include "vcsem/chain_io.hpp"

#include <fstream>
#include <sstream>

#include "vcsem/error.hpp"
#include "vcsem/io.hpp"

namespace vcsem {
namespace {

nlohmann::json stats_json(const MoveStats& s) {
    return {{"proposed", s.proposed},
            {"accepted", s.accepted},
            {"singular_rejected", s.singular_rejected},
            {"structure_rejected", s.structure_rejected},
            {"acceptance_rate", s.acceptance_rate()}};
}

MoveStats stats_from_json(const nlohmann::json& j) {
    MoveStats s;
    s.proposed = j.value("proposed", std::int64_t{0});
    s.accepted = j.value("accepted", std::int64_t{0});
    s.singular_rejected = j.value("singular_rejected", std::int64_t{0});
    s.structure_rejected = j.value("structure_rejected", std::int64_t{0});
    return s;
}

std::string edge_label(const std::vector<std::string>& names, int from, int to) {
    auto name = [&](int i) { return i < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(i)] : "x" + std::to_string(i + 1); };
    return name(from) + "->" + name(to);
}

}  // namespace

const char* to_string(BirthProposal proposal) noexcept {
    return proposal == BirthProposal::prior ? "prior" : "conditional";
}

nlohmann::json sample_to_json(const ChainSample& sample) {
    const SamplerState& st = sample.state;
    const int p = st.r.p();
    auto edges = nlohmann::json::array();
    auto coef = nlohmann::json::array();
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (st.r(j, l)) {
                edges.push_back({l + 1, j + 1});
                for (double v : st.beta.edge(j, l)) coef.push_back(v);
            }
    nlohmann::json out;
    out["iter"] = sample.iteration;
    out["r"] = st.r.flattened();
    out["beta"] = {{"edges", edges}, {"coef", coef}};
    out["S"] = matrix_to_json(st.s.matrix());
    out["pi"] = st.pi;
    out["tau"] = st.tau;
    out["loglik"] = st.log_likelihood;
    return out;
}

ChainSample sample_from_json(const nlohmann::json& j, int p, int basis_count) {
    try {
        ChainSample sample;
        sample.iteration = j.at("iter").get<int>();
        const auto flat = j.at("r").get<std::vector<int>>();
        sample.state.r = EdgeIndicators::from_flattened(p, flat);
        sample.state.beta = SplineCoefficients(p, basis_count);
        const auto& edges = j.at("beta").at("edges");
        const auto coef = j.at("beta").at("coef").get<std::vector<double>>();
        if (coef.size() != edges.size() * static_cast<std::size_t>(basis_count)) {
            throw Error(ErrorKind::parse_error, "beta coefficient count does not match edge count");
        }
        std::size_t offset = 0;
        for (const auto& e : edges) {
            const int from = e.at(0).get<int>() - 1;
            const int to = e.at(1).get<int>() - 1;
            if (!sample.state.r(to, from)) throw Error(ErrorKind::parse_error, "beta lists an inactive edge");
            auto dst = sample.state.beta.edge(to, from);
            std::copy(coef.begin() + static_cast<std::ptrdiff_t>(offset),
                      coef.begin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(basis_count)),
                      dst.begin());
            offset += static_cast<std::size_t>(basis_count);
        }
        sample.state.s = NoiseCovariance(matrix_from_json(j.at("S"), p, p));
        sample.state.pi = j.at("pi").get<double>();
        sample.state.tau = j.at("tau").get<double>();
        sample.state.log_likelihood = j.at("loglik").get<double>();
        return sample;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed chain sample: ") + e.what());
    }
}

nlohmann::json chain_header_json(const Chain& chain, const nlohmann::json& config) {
    nlohmann::json h;
    h["format"] = "vcsem-chain";
    h["version"] = 1;
    h["p"] = chain.p;
    h["names"] = chain.names;
    h["covariate"] = chain.covariate_name;
    h["seed"] = chain.seed;
    h["schedule"] = {{"total", chain.schedule.total}, {"burn_in", chain.schedule.burn_in}, {"thin", chain.schedule.thin}};
    h["retained"] = chain.samples.size();
    h["hyperparameters"] = {{"a", chain.hp.a},
                            {"b", chain.hp.b},
                            {"alpha", chain.hp.alpha},
                            {"beta0", chain.hp.beta0},
                            {"psi", matrix_to_json(chain.hp.psi)},
                            {"dof", chain.hp.dof},
                            {"basis_count", chain.hp.basis_count}};
    h["acyclic"] = chain.acyclic;
    h["birth_proposal"] = to_string(chain.birth_proposal);
    h["anneal"] = {{"sweeps", chain.anneal_sweeps}, {"initial_temperature", chain.initial_temperature}};
    h["covariate_scaling"] = {{"lo", chain.scaling.lo}, {"hi", chain.scaling.hi}, {"basis_domain", {0.0, 1.0}}};
    const auto& d = chain.diagnostics;
    h["diagnostics"] = {{"birth", stats_json(d.birth)},
                        {"death", stats_json(d.death)},
                        {"coefficient", stats_json(d.coefficient)},
                        {"coefficient_after_burn_in", stats_json(d.coefficient_after_burn)},
                        {"max_cache_drift", d.max_cache_drift}};
    h["config"] = config;
    return h;
}

void write_chain(const std::filesystem::path& samples_path, const std::filesystem::path& header_path,
                 const Chain& chain, const nlohmann::json& config) {
    std::string text;
    for (const auto& s : chain.samples) {
        text += sample_to_json(s).dump();
        text.push_back('\n');
    }
    write_text(samples_path, text);
    write_json(header_path, chain_header_json(chain, config));
}

Chain read_chain(const std::filesystem::path& samples_path, const std::filesystem::path& header_path) {
    const nlohmann::json h = read_json(header_path);
    Chain chain;
    try {
        if (h.value("format", std::string{}) != "vcsem-chain") {
            throw Error(ErrorKind::parse_error, "'" + header_path.string() + "' is not a chain header");
        }
        chain.p = h.at("p").get<int>();
        chain.names = h.at("names").get<std::vector<std::string>>();
        chain.covariate_name = h.at("covariate").get<std::string>();
        chain.seed = h.at("seed").get<std::uint64_t>();
        const auto& sch = h.at("schedule");
        chain.schedule = Schedule{sch.at("total").get<int>(), sch.at("burn_in").get<int>(), sch.at("thin").get<int>()};
        const auto& hp = h.at("hyperparameters");
        chain.hp.a = hp.at("a").get<double>();
        chain.hp.b = hp.at("b").get<double>();
        chain.hp.alpha = hp.at("alpha").get<double>();
        chain.hp.beta0 = hp.at("beta0").get<double>();
        chain.hp.dof = hp.at("dof").get<double>();
        chain.hp.basis_count = hp.at("basis_count").get<int>();
        chain.hp.psi = matrix_from_json(hp.at("psi"), chain.p, chain.p);
        chain.acyclic = h.at("acyclic").get<bool>();
        if (h.contains("anneal")) {
            chain.anneal_sweeps = h["anneal"].at("sweeps").get<int>();
            chain.initial_temperature = h["anneal"].at("initial_temperature").get<double>();
        }
        chain.birth_proposal =
            h.at("birth_proposal").get<std::string>() == "prior" ? BirthProposal::prior : BirthProposal::conditional;
        chain.scaling = CovariateScaling{h.at("covariate_scaling").at("lo").get<double>(),
                                         h.at("covariate_scaling").at("hi").get<double>()};
        const auto& d = h.at("diagnostics");
        chain.diagnostics.birth = stats_from_json(d.at("birth"));
        chain.diagnostics.death = stats_from_json(d.at("death"));
        chain.diagnostics.coefficient = stats_from_json(d.at("coefficient"));
        chain.diagnostics.coefficient_after_burn = stats_from_json(d.at("coefficient_after_burn_in"));
        chain.diagnostics.max_cache_drift = d.at("max_cache_drift").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed chain header: ") + e.what());
    }

    std::ifstream in(samples_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + samples_path.string() + "' for reading");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            chain.samples.push_back(sample_from_json(nlohmann::json::parse(line), chain.p, chain.hp.basis_count));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::parse_error, std::string("invalid chain line: ") + e.what());
        }
    }
    return chain;
}

nlohmann::json summary_to_json(const PosteriorSummary& summary, const std::vector<std::string>& names) {
    nlohmann::json out;
    const int p = static_cast<int>(summary.ppi.rows());
    out["threshold"] = summary.threshold;
    out["p"] = p;
    out["names"] = names;
    // ppi[j][l] is the inclusion probability of l -> j.
    auto ppi = nlohmann::json::array();
    for (int j = 0; j < p; ++j) {
        auto row = nlohmann::json::array();
        for (int l = 0; l < p; ++l) row.push_back(summary.ppi(j, l));
        ppi.push_back(row);
    }
    out["ppi"] = ppi;
    out["graph"] = graph_to_json(summary.graph, names);
    out["directed_edges"] = out["graph"]["directed_edges"];
    out["bidirected_edges"] = out["graph"]["bidirected_edges"];
    out["mean_S"] = matrix_to_json(summary.mean_s);
    out["z_grid"] = summary.z_grid;
    out["clamped_grid_points"] = summary.clamped_grid_points;
    auto bands = nlohmann::json::array();
    for (const auto& b : summary.bands) {
        bands.push_back({{"edge", {b.from + 1, b.to + 1}},
                         {"label", edge_label(names, b.from, b.to)},
                         {"lower", b.lower},
                         {"median", b.median},
                         {"upper", b.upper},
                         {"covers_constant", b.covers_constant}});
    }
    out["bands"] = bands;
    return out;
}

void write_band_csv(const std::filesystem::path& path, const PosteriorSummary& summary,
                    const std::vector<std::string>& names) {
    std::ostringstream text;
    text << "edge,z,lower,median,upper\n";
    for (const auto& b : summary.bands) {
        const std::string label = csv_field(edge_label(names, b.from, b.to));
        for (std::size_t g = 0; g < summary.z_grid.size(); ++g) {
            text << label << ',' << format_double(summary.z_grid[g]) << ',' << format_double(b.lower[g]) << ','
                 << format_double(b.median[g]) << ',' << format_double(b.upper[g]) << '\n';
        }
    }
    write_text(path, text.str());
}

}  // namespace vcsem
