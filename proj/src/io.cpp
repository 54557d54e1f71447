#include "nlslab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nlslab/errors.hpp"

namespace nlslab {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, x);
    if (res.ec != std::errc{} || res.ptr != end) throw InvalidArgument("not a number: '" + text + "'");
    return x;
}

void CsvTable::add_row(std::vector<CsvCell> row) {
    if (row.size() != header_.size()) throw InvalidArgument("csv: row width does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) out += format_double(v);
                    else if constexpr (std::is_same_v<T, long long>) out += std::to_string(v);
                    else out += v;
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

DiscreteMeasure read_measure_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    DiscreteMeasure m;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == ',')) line.pop_back();
        const auto start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        line = line.substr(start);
        try {
            m.atoms.push_back(parse_double(line));
        } catch (const InvalidArgument&) {
            if (!first) throw InvalidArgument(path.string() + ": bad mass '" + line + "'");
        }
        first = false;
    }
    m.validate();
    return m;
}

} // namespace nlslab
