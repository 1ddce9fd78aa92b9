#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pact {

// Header plus raw string cells of a delimited text file. Rows keep their
// original field count so callers can reject ragged lines themselves.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or -1.
    [[nodiscard]] int column(std::string_view name) const;
};

std::vector<std::string> split_delimited(std::string_view line, char delim);

// Throws ConfigError naming the path when the file cannot be opened.
Table read_delimited(const std::filesystem::path& path, char delim = ',');
Table parse_delimited(std::istream& in, char delim = ',');

void write_delimited(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows, char delim = ',');

std::string_view trim(std::string_view s);

// Shortest round-trippable decimal form of a double.
std::string format_number(double v);

}  // namespace pact
