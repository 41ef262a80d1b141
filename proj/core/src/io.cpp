#include "vcsem/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vcsem/error.hpp"

namespace vcsem {
namespace {

std::vector<std::vector<std::string>> split_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                field_started = true;
                break;
            case ',':
                record.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (field_started || !field.empty() || !record.empty()) {
                    record.push_back(std::move(field));
                    records.push_back(std::move(record));
                }
                record.clear();
                field.clear();
                field_started = false;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw Error(ErrorKind::parse_error, "unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t row, std::size_t col) {
    std::string s = trim(raw);
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::parse_error, "CSV cell at data row " + std::to_string(row + 1) + ", column " +
                                                std::to_string(col + 1) + " is not a number: '" + raw + "'");
    }
    return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "' for writing");
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorKind::io_error, "failed writing '" + path.string() + "'");
}


}  // namespace

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

CsvTable parse_csv(const std::string& text) {
    auto records = split_records(text);
    if (records.empty()) throw Error(ErrorKind::parse_error, "CSV is empty; a header row is required");
    CsvTable table;
    table.header = std::move(records.front());
    for (auto& h : table.header) h = trim(h);
    if (!table.header.empty() && table.header.front().rfind("\xEF\xBB\xBF", 0) == 0) {
        table.header.front().erase(0, 3);
    }
    const std::size_t cols = table.header.size();
    table.values.resize(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != cols) {
            throw Error(ErrorKind::parse_error, "CSV data row " + std::to_string(r) + " has " +
                                                    std::to_string(records[r].size()) + " fields, header has " +
                                                    std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            table.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
                parse_number(records[r][c], r - 1, c);
        }
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw Error(ErrorKind::io_error, "failed to format number");
    return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
        throw Error(ErrorKind::dimension_mismatch, "CSV header and value widths differ");
    }
    std::string text;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) text.push_back(',');
        text += csv_field(header[c]);
    }
    text.push_back('\n');
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) text.push_back(',');
            text += format_double(values(r, c));
        }
        text.push_back('\n');
    }
    write_text(path, text);
}

Dataset dataset_from_table(const CsvTable& table, const std::string& covariate_column) {
    const auto it = std::find(table.header.begin(), table.header.end(), covariate_column);
    if (it == table.header.end()) {
        throw Error(ErrorKind::missing_column, "covariate column '" + covariate_column + "' not found in CSV header");
    }
    const auto zcol = static_cast<Eigen::Index>(it - table.header.begin());
    Dataset data;
    data.covariate_name = covariate_column;
    data.z = table.values.col(zcol);
    data.x.resize(table.values.rows(), table.values.cols() - 1);
    Eigen::Index out = 0;
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
        if (c == zcol) continue;
        data.x.col(out++) = table.values.col(c);
        data.names.push_back(table.header[static_cast<std::size_t>(c)]);
    }
    data.validate();
    return data;
}

Dataset read_dataset(const std::filesystem::path& path, const std::string& covariate_column) {
    return dataset_from_table(read_csv(path), covariate_column);
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
    std::vector<std::string> header = data.names;
    if (header.empty())
        for (int c = 0; c < data.p(); ++c) header.push_back("x" + std::to_string(c + 1));
    header.push_back(data.covariate_name);
    Matrix values(data.n(), data.p() + 1);
    values.leftCols(data.p()) = data.x;
    values.col(data.p()) = data.z;
    write_csv(path, header, values);
}

nlohmann::json graph_to_json(const MixedGraph& graph, const std::vector<std::string>& names) {
    nlohmann::json j;
    j["p"] = graph.p;
    auto directed = nlohmann::json::array();
    for (const auto& [from, to] : graph.directed) directed.push_back({from + 1, to + 1});
    auto bidirected = nlohmann::json::array();
    for (const auto& [a, b] : graph.bidirected) bidirected.push_back({a + 1, b + 1});
    j["directed_edges"] = directed;
    j["bidirected_edges"] = bidirected;
    if (!names.empty()) j["names"] = names;
    return j;
}

MixedGraph graph_from_json(const nlohmann::json& j) {
    try {
        MixedGraph g;
        g.p = j.at("p").get<int>();
        if (g.p < 1) throw Error(ErrorKind::parse_error, "graph JSON needs p >= 1");
        auto read_pairs = [&](const char* key, std::vector<std::pair<int, int>>& out) {
            if (!j.contains(key)) return;
            for (const auto& e : j.at(key)) {
                const int a = e.at(0).get<int>() - 1;
                const int b = e.at(1).get<int>() - 1;
                if (a < 0 || b < 0 || a >= g.p || b >= g.p) {
                    throw Error(ErrorKind::parse_error, std::string("edge index out of range in ") + key);
                }
                out.emplace_back(a, b);
            }
        };
        read_pairs("directed_edges", g.directed);
        read_pairs("bidirected_edges", g.bidirected);
        std::sort(g.directed.begin(), g.directed.end());
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed graph JSON: ") + e.what());
    }
}

EdgeIndicators indicators_from_graph(const MixedGraph& graph) {
    EdgeIndicators r(graph.p);
    for (const auto& [from, to] : graph.directed) r.set(to, from, true);
    return r;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "' for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, "invalid JSON in '" + path.string() + "': " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    write_text(path, value.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_for_write(path);
    out << text;
    finish_write(out, path);
}

nlohmann::json matrix_to_json(const Matrix& m) {
    auto arr = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw Error(ErrorKind::parse_error, "flattened matrix has wrong length");
    }
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r * cols + c)].get<double>();
    return m;
}

}  // namespace vcsem
