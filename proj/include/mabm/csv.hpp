#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mabm {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Writes each line of `header` prefixed with "# ".
void write_comment_header(std::ostream& out, std::string_view header);

/// A parsed comma-separated table. Lines starting with '#' and blank lines
/// are skipped; the first remaining line is the column header.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of the named column. Throws std::out_of_range if absent.
    std::size_t column(std::string_view name) const;

    /// All non-empty cells of a column, parsed as doubles.
    std::vector<double> numeric_column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);

}  // namespace mabm
