#pragma once

// RFC 4180 CSV with LF line endings and '.' as decimal separator.

#include <iosfwd>
#include <string>
#include <vector>

namespace semiscale {

using CsvRow = std::vector<std::string>;

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& text);

/// Shortest decimal text that reads back to the same double.
std::string csv_number(double value);

void write_csv_row(std::ostream& out, const CsvRow& row);
void write_csv(std::ostream& out, const CsvRow& header, const std::vector<CsvRow>& rows);
void write_csv_file(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows);

/// Parses quoted fields (including embedded newlines); accepts LF or CRLF.
std::vector<CsvRow> read_csv(std::istream& in);
std::vector<CsvRow> read_csv_file(const std::string& path);

}  // namespace semiscale
