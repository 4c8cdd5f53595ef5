#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mlpmc::cli {

// Minimal CSV writer: comma separator, header row, '.' decimal point,
// shortest round-trip formatting for reals.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add(double value);
    void add(std::uint64_t value);
    void add(int value);
    void add(const std::string& value);
    void end_row();

    [[nodiscard]] std::string str() const;
    void write_to(const std::string& path_or_empty_for_stdout) const;

private:
    std::size_t columns_;
    std::size_t in_row_ = 0;
    std::string body_;
};

std::string format_double(double value);

}  // namespace mlpmc::cli
