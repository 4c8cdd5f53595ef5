#include "mlpmc/csv.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace mlpmc::cli {

std::string format_double(double value) {
    // Shortest representation that round-trips; %.17g always round-trips,
    // try shorter precisions first to keep files readable.
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        double parsed = 0.0;
        std::sscanf(buf, "%lf", &parsed);
        if (parsed == value) return buf;
    }
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) body_ += ',';
        body_ += header[i];
    }
    body_ += '\n';
}

void CsvWriter::add(double value) { add(format_double(value)); }

void CsvWriter::add(std::uint64_t value) { add(std::to_string(value)); }

void CsvWriter::add(int value) { add(std::to_string(value)); }

void CsvWriter::add(const std::string& value) {
    if (in_row_ >= columns_) throw std::logic_error("csv: too many cells in row");
    if (in_row_ > 0) body_ += ',';
    body_ += value;
    ++in_row_;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw std::logic_error("csv: row has wrong cell count");
    body_ += '\n';
    in_row_ = 0;
}

std::string CsvWriter::str() const { return body_; }

void CsvWriter::write_to(const std::string& path) const {
    if (path.empty() || path == "-") {
        std::cout << body_;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot open output '" + path + "'");
    out << body_;
}

}  // namespace mlpmc::cli
