#include <somp/csv_io.hpp>

#include <somp/errors.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace somp {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

} // namespace

CsvTable read_csv(std::istream& in, const std::string& source)
{
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            // tolerate a UTF-8 byte order mark
            if (cells[0].starts_with("\xEF\xBB\xBF")) cells[0].remove_prefix(3);
            for (auto c : cells) table.header.emplace_back(c);
            have_header = true;
            continue;
        }
        ++rows;
        if (cells.size() != table.header.size()) {
            throw Error(ErrorCode::Parse, source + ": row " + std::to_string(rows) + " has " +
                                              std::to_string(cells.size()) + " columns, expected " +
                                              std::to_string(table.header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto cell = cells[c];
            const char* begin = cell.data();
            if (!cell.empty() && *begin == '+') ++begin;
            const char* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(begin, end, v);
            if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
                throw Error(ErrorCode::Parse, source + ": non-numeric value '" + std::string(cell) + "' at row " +
                                                  std::to_string(rows) + ", column " + std::to_string(c + 1));
            }
            values.push_back(v);
        }
    }
    if (!have_header) throw Error(ErrorCode::Parse, source + ": empty file (a header row is required)");
    const auto cols = static_cast<Eigen::Index>(table.header.size());
    table.values.resize(static_cast<Eigen::Index>(rows), cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            table.values(static_cast<Eigen::Index>(r), c) = values[r * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
        }
    }
    return table;
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
    return read_csv(in, path);
}

void write_csv(std::ostream& out, const CsvTable& table)
{
    for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
    out << '\n';
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            out << (c ? "," : "") << format_double(table.values(r, c));
        }
        out << '\n';
    }
}

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

std::string format_fixed(double value, int decimals)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, decimals);
    if (ec != std::errc()) throw std::runtime_error("format_fixed failed");
    std::string s(buf.data(), ptr);
    if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

} // namespace somp
