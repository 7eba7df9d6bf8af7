// io.hpp — CSV emission and JSON file helpers
//
// All floating-point output goes through format_double so that identical
// inputs produce byte-identical files.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace psim {

// shortest round-trip decimal representation
std::string format_double(double value);

class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, const std::vector<std::string>& columns);
    ~CsvWriter();

    void row(const std::vector<double>& values);
    void row_cells(const std::vector<std::string>& cells);
    void close();

private:
    struct State;
    std::unique_ptr<State> state_;
};

nlohmann::ordered_json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

// environment configuration <-> bitstring ("σ_1 σ_2 ... σ_M", '0' = up, '1' = down)
std::string config_bitstring(std::uint64_t config, int sites);
std::uint64_t parse_config_bitstring(const std::string& text, int sites);

} // namespace psim
