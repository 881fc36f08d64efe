#ifndef EXACTCP_SERIES_IO_HPP
#define EXACTCP_SERIES_IO_HPP

#include <istream>
#include <string>
#include <vector>

#include "exactcp/emission.hpp"

namespace exactcp {

/// Reads one or more series from plain text.
///
/// Two layouts are accepted:
///  - one value per line, giving a single series labelled `source`;
///  - tab-separated columns under a header line naming each condition,
///    giving one series per column.
/// Blank lines and lines starting with '#' are ignored. Malformed content
/// throws InvalidInput with "source:line:" in front of the message.
std::vector<CountSeries> parse_series(std::istream& in, const std::string& source);

std::vector<CountSeries> read_series_file(const std::string& path);

}  // namespace exactcp

#endif
