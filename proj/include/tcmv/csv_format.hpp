#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tcmv {

/// 12 significant digits; fixed notation for 1e-6 <= |v| < 1e6 (and 0),
/// scientific otherwise. Trailing zeros are trimmed so output is stable.
std::string format_number(double v);

/// Comma-separated table with a mandatory header and LF line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    /// Throws std::invalid_argument when the column count differs from the header.
    void add_row(std::vector<std::string> cells);
    void add_row(const std::vector<double>& values);

    std::size_t columns() const noexcept { return header_.size(); }
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace tcmv
