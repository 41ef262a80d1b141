#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vcsem/sem_model.hpp"

namespace vcsem {

/// Numeric CSV with a header row.
struct CsvTable {
    std::vector<std::string> header;
    Matrix values;  // rows x header.size()
};

/// Parses RFC-4180 CSV (quoted fields, CRLF tolerated). Every body cell must parse
/// as a number; "nan"/"inf" parse but are reported as non-finite by the dataset layer.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(const std::string& s);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values);

/// All columns except covariate_column become X, in file order.
Dataset dataset_from_table(const CsvTable& table, const std::string& covariate_column);
Dataset read_dataset(const std::filesystem::path& path, const std::string& covariate_column);
/// Writes X columns followed by the covariate column.
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// {"p", "directed_edges": [[from, to], ...], "bidirected_edges": [[a, b], ...]} with 1-based indices.
nlohmann::json graph_to_json(const MixedGraph& graph, const std::vector<std::string>& names = {});
MixedGraph graph_from_json(const nlohmann::json& j);
EdgeIndicators indicators_from_graph(const MixedGraph& graph);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json matrix_to_json(const Matrix& m);  // flattened row-major
Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols);

}  // namespace vcsem
