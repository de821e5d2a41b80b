#include "sntlab/csv.hpp"

#include <charconv>
#include <cmath>

namespace sntlab::csv {

std::string format_double(double x) {
    if (std::isnan(x)) return std::string(kMissing);
    if (x == 0.0) return "0";  // also folds -0
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string format_double(const std::optional<double>& x) { return x ? format_double(*x) : std::string(kMissing); }

double quantize(double x) {
    if (std::isnan(x)) return x;
    return parse_double(format_double(x));
}

std::optional<double> quantize(const std::optional<double>& x) {
    if (!x) return std::nullopt;
    return quantize(*x);
}

double parse_double(std::string_view field) {
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw ParseError("not a number: '" + std::string(field) + "'");
    }
    return v;
}

std::optional<double> parse_optional_double(std::string_view field) {
    if (field == kMissing || field.empty()) return std::nullopt;
    return parse_double(field);
}

std::uint64_t parse_u64(std::string_view field) {
    std::uint64_t v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw ParseError("not an unsigned integer: '" + std::string(field) + "'");
    }
    return v;
}

void Writer::header(std::initializer_list<std::string_view> columns) {
    for (auto c : columns) field(c);
    end_row();
}

Writer& Writer::field(std::string_view text) {
    if (row_open_) out_ << ',';
    out_ << text;
    row_open_ = true;
    return *this;
}

void Writer::end_row() {
    out_ << '\n';
    row_open_ = false;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

Table Table::read(std::istream& in, std::initializer_list<std::string_view> expected_header, std::string_view source) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(std::string(source) + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header_ = split_line(line);
    std::vector<std::string> expected(expected_header.begin(), expected_header.end());
    if (t.header_ != expected) throw ParseError(std::string(source) + ": unexpected header '" + line + "'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != t.header_.size()) {
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header_.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows_.push_back(std::move(fields));
    }
    return t;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    throw ParseError("no column '" + std::string(name) + "'");
}

}  // namespace sntlab::csv
