#pragma once

#include "airsync/metrics.hpp"
#include "airsync/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace airsync
{

inline constexpr const char* kToolName = "airsync";
inline constexpr const char* kToolVersion = "0.1.0";

/// Empty cell, integer, real or text.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

/// Shortest round-trip text for doubles; empty string for an empty cell.
std::string format_cell(const Cell& cell);
nlohmann::json cell_to_json(const Cell& cell);

enum class OutputFormat
{
    Csv,
    Json,
};

const char* extension(OutputFormat format);

/// Provenance stamped into every output file.
struct Provenance
{
    std::uint64_t seed = 0;
    nlohmann::json config;
};

/// CSV: "# key: value" comment lines, a header row, then one line per row.
void write_csv(std::ostream& out, const Table& table, const Provenance& prov);
/// JSON: {"tool", "version", "seed", "config", "columns", "rows": [{column: value}]}.
void write_json(std::ostream& out, const Table& table, const Provenance& prov);
void write_table(const std::filesystem::path& file, OutputFormat format, const Table& table, const Provenance& prov);

/// Long format: section, node, metric, value. Times are reported in ns.
Table report_table(const Scenario& scenario, const MetricsReport& report);

/// Every sample, sync and delivery with tick-exact fields.
Table trace_table(const Scenario& scenario, const RawTrace& trace);

/// Creates `dir`, refusing one that already holds files.
void prepare_output_dir(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& dir, const std::string& command, const Provenance& prov,
                    OutputFormat format, const std::vector<std::string>& files);

} // namespace airsync
