#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace injurycast::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by exact header name.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// RFC-4180 style: comma separated, double-quote escaping, CRLF tolerated.
Table parse(std::string_view text);
/// Throws DataError when the file cannot be read.
Table read(const std::filesystem::path& path);

std::string escape(std::string_view field);

/// Shortest round-trip decimal form; empty string for NaN.
std::string format_number(double v);

/// Parses a finite double; nullopt on trailing garbage or empty input.
std::optional<double> parse_number(std::string_view text);

/// Accumulates rows and renders them as CSV text.
class Writer {
public:
    explicit Writer(std::vector<std::string> header);
    void row(const std::vector<std::string>& fields);
    const std::string& str() const { return out_; }

private:
    void append(const std::vector<std::string>& fields);
    std::size_t width_;
    std::string out_;
};

/// Writes to `<path>.tmp` and renames over `path`; creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace injurycast::csv
