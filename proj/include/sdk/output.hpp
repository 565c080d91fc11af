#pragma once

// Comma-separated tables with '#' metadata lines.
//
//   # tool: sdksim 1.0.0
//   # subcommand: revival
//   # config_digest: <sha256 of the canonical config>
//   # seed: 0
//   # units: T_s=s contrast=1
//   # <extra key: value lines>
//   # payload_sha256: <sha256 of every non-'#' line, each ending in '\n'>
//   T_s,contrast
//   ...
//
// Numbers are printed with "%.15g"; nothing time-dependent is written, so the
// same inputs give byte-identical files.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sdk {

inline constexpr std::string_view kToolName = "sdksim";
inline constexpr std::string_view kToolVersion = "1.0.0";

struct Column {
    std::string name;
    std::string unit; // "1" for dimensionless, "-" for labels
};

using Cell = std::variant<double, long long, std::string>;

std::string format_number(double x);

class Table {
public:
    explicit Table(std::vector<Column> columns);

    // Throws DimensionMismatch on a wrong cell count.
    void add_row(std::vector<Cell> cells);

    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    // Header line plus data lines, each terminated by '\n'.
    std::string payload() const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<std::string>> rows_;
};

struct OutputMeta {
    std::string subcommand;
    std::string config_digest;
    unsigned long long seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;
};

std::string render_table(const Table& table, const OutputMeta& meta);

// Writes to a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Tracks files written during one run and removes them unless committed.
class OutputSession {
public:
    explicit OutputSession(std::filesystem::path dir);
    ~OutputSession();
    OutputSession(const OutputSession&) = delete;
    OutputSession& operator=(const OutputSession&) = delete;

    std::filesystem::path write(const std::string& name, std::string_view content);
    void commit() noexcept { committed_ = true; }
    const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    bool committed_ = false;
};

struct ParsedTable {
    std::map<std::string, std::string> meta;
    std::map<std::string, std::string> units;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // Recomputed from the payload lines.
    std::string payload_sha256;
};

// Reads a file produced by render_table. SchemaError on malformed input.
ParsedTable parse_table(std::string_view text);

} // namespace sdk
