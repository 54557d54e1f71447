#pragma once

// Plain-text persistence: CSV with shortest round-trip floats, and discrete
// measures stored one mass per line.

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "nlslab/measure_lab.hpp"

namespace nlslab {

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan".
std::string format_double(double x);

/// Parses what format_double writes, rejecting trailing garbage.
double parse_double(const std::string& text);

using CsvCell = std::variant<double, long long, std::string>;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<CsvCell> row);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<CsvCell>> rows_;
};

/// One nonnegative mass per line; blank lines and a leading non-numeric
/// header line are skipped.
DiscreteMeasure read_measure_csv(const std::filesystem::path& path);

} // namespace nlslab
