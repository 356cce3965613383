#include "ibis/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <system_error>

#include "ibis/errors.hpp"

namespace ibis {

std::vector<CsvRow> parse_csv(std::istream& in, const std::string& origin) {
    std::string content;
    {
        std::ostringstream buf;
        buf << in.rdbuf();
        content = buf.str();
    }

    std::vector<CsvRow> rows;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = content.size();
    while (i < n) {
        CsvRow row;
        row.line = line;
        bool row_done = false;
        while (!row_done) {
            std::string field;
            if (i < n && content[i] == '"') {
                ++i; // opening quote
                bool closed = false;
                while (i < n) {
                    char c = content[i];
                    if (c == '"') {
                        if (i + 1 < n && content[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                        } else {
                            ++i;
                            closed = true;
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field.push_back(c);
                        ++i;
                    }
                }
                if (!closed)
                    fail(ErrorKind::MalformedRecord,
                         origin + ": unterminated quoted field starting at line " +
                             std::to_string(row.line));
                if (i < n && content[i] != ',' && content[i] != '\r' && content[i] != '\n')
                    fail(ErrorKind::MalformedRecord,
                         origin + ": unexpected character after closing quote at line " +
                             std::to_string(line));
            } else {
                while (i < n && content[i] != ',' && content[i] != '\r' && content[i] != '\n') {
                    if (content[i] == '"')
                        fail(ErrorKind::MalformedRecord,
                             origin + ": stray quote inside unquoted field at line " +
                                 std::to_string(line));
                    field.push_back(content[i]);
                    ++i;
                }
            }
            row.fields.push_back(std::move(field));

            if (i >= n) {
                row_done = true;
            } else if (content[i] == ',') {
                ++i;
            } else if (content[i] == '\r') {
                ++i;
                if (i < n && content[i] == '\n') ++i;
                ++line;
                row_done = true;
            } else { // '\n'
                ++i;
                ++line;
                row_done = true;
            }
        }
        rows.push_back(std::move(row));
    }
    // A trailing newline does not produce an empty final row; an actual empty
    // line in the middle does, and the record validators reject it.
    if (!rows.empty() && rows.back().fields.size() == 1 && rows.back().fields[0].empty())
        rows.pop_back();
    return rows;
}

std::vector<CsvRow> parse_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    return parse_csv(in, path);
}

static bool needs_quoting(const std::string& field) {
    for (char c : field)
        if (c == ',' || c == '"' || c == '\r' || c == '\n') return true;
    return false;
}

std::string to_csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        const std::string& f = fields[i];
        if (needs_quoting(f)) {
            out.push_back('"');
            for (char c : f) {
                if (c == '"') out.push_back('"');
                out.push_back(c);
            }
            out.push_back('"');
        } else {
            out += f;
        }
    }
    out += "\r\n";
    return out;
}

void write_csv_file(const std::string& path, const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
    for (const auto& row : rows) out << to_csv_line(row);
    if (!out) fail(ErrorKind::IoFailure, "short write to " + path);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) fail(ErrorKind::IoFailure, "number formatting failed");
    return std::string(buf, ptr);
}

double parse_double_field(const std::string& text, const std::string& what, std::size_t line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        fail(ErrorKind::MalformedRecord,
             "line " + std::to_string(line) + ": field '" + what + "' is not a number: '" +
                 text + "'");
    return value;
}

long long parse_int_field(const std::string& text, const std::string& what, std::size_t line) {
    long long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        fail(ErrorKind::MalformedRecord,
             "line " + std::to_string(line) + ": field '" + what + "' is not an integer: '" +
                 text + "'");
    return value;
}

} // namespace ibis
