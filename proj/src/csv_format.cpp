#include "tcmv/csv_format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace tcmv {

namespace {

constexpr int kSignificant = 12;

void trim_fraction(std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos) return;
    auto end = s.find_last_not_of('0');
    if (end == dot) --end;
    s.erase(end + 1);
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";

    char buf[64];
    const double mag = std::abs(v);
    if (mag >= 1e-6 && mag < 1e6) {
        const int exponent = static_cast<int>(std::floor(std::log10(mag)));
        const int decimals = std::max(0, kSignificant - 1 - exponent);
        auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
        std::string s(buf, res.ptr);
        trim_fraction(s);
        if (s == "-0") s = "0";
        return s;
    }
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific,
                             kSignificant - 1);
    std::string s(buf, res.ptr);
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    trim_fraction(mantissa);
    return mantissa + s.substr(e);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) +
                                    " cells, header has " + std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    add_row(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
}

}  // namespace tcmv
