#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cptmag/errors.hpp"

namespace cptmag {

// %.17g round-trips every double exactly; all numeric CSV output uses it.
inline std::string format_double(double v) {
    char buf[32];
    int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(context + ": cannot parse '" + std::string(s) + "' as a number");
    return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
    long long v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(context + ": cannot parse '" + std::string(s) + "' as an integer");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// Line-oriented CSV reader with a mandatory header and 1-based line numbers
// in every diagnostic.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string name, const std::vector<std::string>& header)
        : in_(in), name_(std::move(name)) {
        std::string line;
        if (!std::getline(in_, line)) {
            // Empty file: treated as "no rows" only if a header was optional;
            // spec wants header mandatory, so a missing header is a data error
            // unless the stream was empty AND caller allows it. Callers that
            // accept empty streams check eof() via had_header().
            had_header_ = false;
            return;
        }
        strip_cr(line);
        ++line_no_;
        auto cols = split_csv_line(line);
        if (cols.size() != header.size())
            throw DataError(name_ + ":1: expected header with " + std::to_string(header.size()) +
                            " columns, got " + std::to_string(cols.size()));
        for (std::size_t i = 0; i < header.size(); ++i)
            if (cols[i] != header[i])
                throw DataError(name_ + ":1: expected header column '" + header[i] + "', got '" +
                                std::string(cols[i]) + "'");
        had_header_ = true;
        n_cols_ = header.size();
    }

    bool had_header() const { return had_header_; }

    // Returns false at end of input. Throws DataError with line number on a
    // malformed row.
    bool next_row(std::vector<std::string_view>& cols) {
        if (!std::getline(in_, row_buf_)) return false;
        strip_cr(row_buf_);
        ++line_no_;
        cols = split_csv_line(row_buf_);
        if (cols.size() != n_cols_)
            throw DataError(location() + ": expected " + std::to_string(n_cols_) +
                            " columns, got " + std::to_string(cols.size()));
        return true;
    }

    std::string location() const { return name_ + ":" + std::to_string(line_no_); }

private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }
    std::istream& in_;
    std::string name_;
    std::string row_buf_;
    std::size_t line_no_ = 0;
    std::size_t n_cols_ = 0;
    bool had_header_ = false;
};

inline std::ifstream open_input_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open input file: " + path);
    return f;
}

inline std::ofstream open_output_file(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open output file: " + path);
    return f;
}

}  // namespace cptmag
