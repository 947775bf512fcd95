#pragma once

#include <somp/datamodel.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace somp {

/// Numeric CSV with one header row.
struct CsvTable
{
    std::vector<std::string> header;
    Matrix values;  // rows x header.size()
};

/// Throws Error(Parse) for unreadable files, ragged rows and non-numeric cells;
/// messages give 1-based data row and column numbers.
CsvTable read_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const CsvTable& table);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Fixed notation with the given number of decimals.
std::string format_fixed(double value, int decimals);

} // namespace somp
