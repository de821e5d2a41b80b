#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sntlab::csv {

inline constexpr std::string_view kMissing = "NA";

/// Six significant digits, '.' decimal separator, independent of the locale.
std::string format_double(double x);
std::string format_double(const std::optional<double>& x);

/// The value a number takes after a round trip through format_double.
double quantize(double x);
std::optional<double> quantize(const std::optional<double>& x);

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::optional<double> parse_optional_double(std::string_view field);
double parse_double(std::string_view field);
std::uint64_t parse_u64(std::string_view field);

/// Writes comma-separated rows terminated by '\n'.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> columns);
    Writer& field(std::string_view text);
    Writer& field(double x) { return field(format_double(x)); }
    Writer& field(const std::optional<double>& x) { return field(format_double(x)); }
    Writer& field(std::uint64_t x) { return field(std::to_string(x)); }
    void end_row();

private:
    std::ostream& out_;
    bool row_open_ = false;
};

/// Header-checked table reader. Fields may not contain commas or quotes.
class Table {
public:
    static Table read(std::istream& in, std::initializer_list<std::string_view> expected_header,
                      std::string_view source);

    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
    std::size_t column(std::string_view name) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> split_line(std::string_view line);

}  // namespace sntlab::csv
