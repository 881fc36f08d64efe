#include "exactcp/series_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

namespace exactcp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, '\t')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == '\t') cells.emplace_back();
    return cells;
}

std::optional<double> parse_number(const std::string& text) {
    if (text.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (errno != 0 || end != text.c_str() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    std::ostringstream ss;
    ss << source << ':' << line << ": " << what;
    throw InvalidInput(ss.str());
}

}  // namespace

std::vector<CountSeries> parse_series(std::istream& in, const std::string& source) {
    std::vector<CountSeries> out;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split_tabs(line);

        if (!header_seen && out.empty()) {
            const bool numeric = cells.size() == 1 && parse_number(cells.front()).has_value();
            if (!numeric) {
                for (const auto& name : cells) {
                    if (name.empty()) fail(source, line_no, "empty column name in header");
                    out.push_back(CountSeries{{}, name});
                }
                header_seen = true;
                continue;
            }
            out.push_back(CountSeries{{}, source});
        }
        if (cells.size() != out.size()) {
            std::ostringstream ss;
            ss << "expected " << out.size() << " column(s), found " << cells.size();
            fail(source, line_no, ss.str());
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_number(cells[c]);
            if (!v) fail(source, line_no, "not a number: '" + cells[c] + "'");
            out[c].values.push_back(*v);
        }
    }
    if (out.empty() || out.front().values.empty()) fail(source, line_no, "no data values found");
    return out;
}

std::vector<CountSeries> read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open input file '" + path + "'");
    return parse_series(in, path);
}

}  // namespace exactcp
