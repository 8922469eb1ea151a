#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace bdbc {

using CsvRow = std::vector<std::string>;

/// Comma-separated records with RFC 4180 quoting ("" escapes a quote, quoted
/// fields may span lines). A UTF-8 byte-order mark and CR before LF are
/// dropped. Blank lines are skipped.
std::vector<CsvRow> read_csv(std::istream& in);
std::vector<CsvRow> read_csv_file(const std::string& path);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const CsvRow& row);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

} // namespace bdbc
