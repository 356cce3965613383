#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ibis {

struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based line number where the row starts
};

// Parses RFC 4180 content: quoted fields may contain commas, doubled quotes
// and newlines; both LF and CRLF row endings are accepted. A stray quote in
// the middle of an unquoted field or an unterminated quoted field is a
// malformed record.
std::vector<CsvRow> parse_csv(std::istream& in, const std::string& origin);
std::vector<CsvRow> parse_csv_file(const std::string& path);

// Writes rows with CRLF endings, quoting only the fields that need it.
std::string to_csv_line(const std::vector<std::string>& fields);
void write_csv_file(const std::string& path, const std::vector<std::vector<std::string>>& rows);

// Shortest decimal form that round-trips the exact double value.
std::string format_double(double value);

// Strict numeric parsers; `what` names the field in error messages.
double parse_double_field(const std::string& text, const std::string& what, std::size_t line);
long long parse_int_field(const std::string& text, const std::string& what, std::size_t line);

} // namespace ibis
