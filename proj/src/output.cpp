#include "sdk/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sdk/config.hpp"
#include "sdk/errors.hpp"

namespace sdk {

namespace fs = std::filesystem;

std::string format_number(double x)
{
    if (x == 0.0) return "0"; // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

Table::Table(std::vector<Column> columns) : columns_(std::move(columns))
{
    for (const auto& c : columns_) {
        if (c.name.empty() || c.name.find_first_of(",\n# =") != std::string::npos) {
            throw Error(ErrorKind::InvalidArgument, "bad column name '" + c.name + "'");
        }
    }
}

void Table::add_row(std::vector<Cell> cells)
{
    if (cells.size() != columns_.size()) {
        throw Error(ErrorKind::DimensionMismatch, "row has the wrong number of cells");
    }
    std::vector<std::string> row;
    for (const auto& cell : cells) {
        if (const auto* d = std::get_if<double>(&cell)) {
            row.push_back(format_number(*d));
        } else if (const auto* i = std::get_if<long long>(&cell)) {
            row.push_back(std::to_string(*i));
        } else {
            const auto& s = std::get<std::string>(cell);
            if (s.find_first_of(",\n") != std::string::npos || (!s.empty() && s[0] == '#')) {
                throw Error(ErrorKind::InvalidArgument, "label cell cannot hold '" + s + "'");
            }
            row.push_back(s);
        }
    }
    rows_.push_back(std::move(row));
}

std::string Table::payload() const
{
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += columns_[i].name;
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::string render_table(const Table& table, const OutputMeta& meta)
{
    const std::string payload = table.payload();
    std::ostringstream out;
    out << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
    out << "# subcommand: " << meta.subcommand << '\n';
    out << "# config_digest: " << meta.config_digest << '\n';
    out << "# seed: " << meta.seed << '\n';
    out << "# units:";
    for (const auto& c : table.columns()) out << ' ' << c.name << '=' << c.unit;
    out << '\n';
    for (const auto& [k, v] : meta.extra) out << "# " << k << ": " << v << '\n';
    out << "# payload_sha256: " << sha256_hex(payload) << '\n';
    out << payload;
    return out.str();
}

void write_atomic(const fs::path& path, std::string_view content)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::IoError, "cannot write " + tmp.string(), "out");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorKind::IoError, "short write to " + tmp.string(), "out");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot rename onto " + path.string(), "out");
    }
}

OutputSession::OutputSession(fs::path dir) : dir_(std::move(dir))
{
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
        throw Error(ErrorKind::IoError, "cannot create output directory " + dir_.string(), "out");
    }
}

OutputSession::~OutputSession()
{
    if (committed_) return;
    for (const auto& p : written_) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

fs::path OutputSession::write(const std::string& name, std::string_view content)
{
    const fs::path p = dir_ / name;
    write_atomic(p, content);
    written_.push_back(p);
    return p;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

} // namespace

ParsedTable parse_table(std::string_view text)
{
    ParsedTable t;
    std::string payload;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') {
            if (header_seen) throw Error(ErrorKind::SchemaError, "metadata after header", "");
            const auto colon = line.find(':');
            if (line.size() < 2 || line[1] != ' ' || colon == std::string::npos) {
                throw Error(ErrorKind::SchemaError, "malformed metadata line: " + line, "");
            }
            const std::string key = line.substr(2, colon - 2);
            std::string value = line.substr(colon + 1);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            if (key == "units") {
                for (const auto& item : split(value, ' ')) {
                    const auto eq = item.find('=');
                    if (eq == std::string::npos) {
                        throw Error(ErrorKind::SchemaError, "malformed unit entry " + item, "units");
                    }
                    t.units[item.substr(0, eq)] = item.substr(eq + 1);
                }
            }
            t.meta[key] = value;
            continue;
        }
        payload += line;
        payload += '\n';
        if (!header_seen) {
            t.header = split(line, ',');
            header_seen = true;
        } else {
            auto row = split(line, ',');
            if (row.size() != t.header.size()) {
                throw Error(ErrorKind::SchemaError, "row width differs from header", "");
            }
            t.rows.push_back(std::move(row));
        }
    }
    if (!header_seen) throw Error(ErrorKind::SchemaError, "no header row", "");
    t.payload_sha256 = sha256_hex(payload);
    return t;
}

} // namespace sdk
