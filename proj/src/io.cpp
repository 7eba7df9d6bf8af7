#include "pointer_sim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pointer_sim/errors.hpp"

namespace psim {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    // shortest representation that round-trips
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, value);
        double parsed = 0.0;
        std::sscanf(buf, "%lf", &parsed);
        if (parsed == value) return buf;
    }
    return buf;
}

struct CsvWriter::State {
    std::ofstream out;
    std::size_t columns = 0;
};

CsvWriter::CsvWriter(std::filesystem::path path, const std::vector<std::string>& columns)
    : state_(std::make_unique<State>()) {
    state_->out.open(path);
    if (!state_->out) throw ConfigError("CsvWriter: cannot open " + path.string());
    state_->columns = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) state_->out << ',';
        state_->out << columns[i];
    }
    state_->out << '\n';
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row_cells(cells);
}

void CsvWriter::row_cells(const std::vector<std::string>& cells) {
    if (cells.size() != state_->columns)
        throw ConfigError("CsvWriter: wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) state_->out << ',';
        state_->out << cells[i];
    }
    state_->out << '\n';
}

void CsvWriter::close() {
    state_->out.flush();
    state_->out.close();
}

nlohmann::ordered_json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + err.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string());
    out << doc.dump(2) << '\n';
}

std::string config_bitstring(std::uint64_t config, int sites) {
    std::string text(std::size_t(sites), '0');
    for (int l = 1; l <= sites; ++l)
        if ((config >> (l - 1)) & 1u) text[std::size_t(l - 1)] = '1';
    return text;
}

std::uint64_t parse_config_bitstring(const std::string& text, int sites) {
    if (int(text.size()) != sites)
        throw ConfigError("configuration bitstring must have one character per site");
    std::uint64_t config = 0;
    for (int l = 1; l <= sites; ++l) {
        const char c = text[std::size_t(l - 1)];
        if (c == '1') config |= std::uint64_t{1} << (l - 1);
        else if (c != '0') throw ConfigError("configuration bitstring must be 0/1");
    }
    return config;
}

} // namespace psim
