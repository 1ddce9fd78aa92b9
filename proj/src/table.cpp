#include "pact/table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "pact/error.hpp"

namespace pact {

int Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_delimited(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

Table parse_delimited(std::istream& in, char delim) {
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!have_header) {
            if (trim(line).empty()) continue;
            for (auto& h : split_delimited(line, delim)) t.header.emplace_back(trim(h));
            have_header = true;
            continue;
        }
        if (trim(line).empty()) continue;
        t.rows.push_back(split_delimited(line, delim));
    }
    return t;
}

Table read_delimited(const std::filesystem::path& path, char delim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    return parse_delimited(in, delim);
}

namespace {

void write_cell(std::ostream& out, const std::string& cell, char delim) {
    if (cell.find_first_of(std::string{delim, '"', '\n'}) == std::string::npos) {
        out << cell;
        return;
    }
    out << '"';
    for (char c : cell) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

void write_delimited(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows, char delim) {
    auto emit = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out << delim;
            write_cell(out, r[i], delim);
        }
        out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace pact
