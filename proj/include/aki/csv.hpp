#pragma once

#include <optional>
#include <string>
#include <vector>

namespace aki {

// Minimal CSV: comma-separated, UTF-8, '.' decimal point, double quotes for
// fields containing commas. Matches what the cohort files need; not a general
// RFC 4180 implementation.
std::vector<std::string> split_csv_line(const std::string& line);
std::string join_csv(const std::vector<std::string>& fields);

// shortest round-trip representation
std::string format_double(double v);

std::optional<double> parse_double(const std::string& s);
std::optional<bool> parse_bool01(const std::string& s);

struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line per row
};

// Reads the whole file; throws IoError when unreadable, MissingColumn when a
// required header is absent.
CsvFile read_csv(const std::string& path, const std::vector<std::string>& required_columns);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace aki
