#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vcsem/sampler.hpp"

namespace vcsem {

/// One retained sample as a JSON object:
/// {iter, r (flattened p*p), beta {edges [[from,to]...] 1-based, coef (K per edge)}, S (flattened), pi, tau, loglik}.
nlohmann::json sample_to_json(const ChainSample& sample);
ChainSample sample_from_json(const nlohmann::json& j, int p, int basis_count);

/// Sidecar header: schedule, seed, hyperparameters, column names, covariate scaling,
/// diagnostics and the caller's effective configuration.
nlohmann::json chain_header_json(const Chain& chain, const nlohmann::json& config = nlohmann::json::object());

/// Writes one line per retained sample.
void write_chain(const std::filesystem::path& samples_path, const std::filesystem::path& header_path,
                 const Chain& chain, const nlohmann::json& config = nlohmann::json::object());
Chain read_chain(const std::filesystem::path& samples_path, const std::filesystem::path& header_path);

/// {threshold, ppi, graph, mean_S, z_grid, bands[...]} with node names.
nlohmann::json summary_to_json(const PosteriorSummary& summary, const std::vector<std::string>& names);

/// Long-format band table: edge, z, lower, median, upper.
void write_band_csv(const std::filesystem::path& path, const PosteriorSummary& summary,
                    const std::vector<std::string>& names);

const char* to_string(BirthProposal proposal) noexcept;

}  // namespace vcsem
