#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"

namespace cptmag {

// Flat dotted-key configuration: lines of `key = value`, `#` comments, blank
// lines ignored. CLI overrides are applied on top with set(). The resolved
// map is echoed verbatim into every output directory.
class Config {
public:
    Config() = default;

    static Config from_stream(std::istream& in, const std::string& name) {
        Config cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::string_view sv = line;
            sv = trim(sv);
            if (sv.empty() || sv.front() == '#') continue;
            auto eq = sv.find('=');
            if (eq == std::string_view::npos)
                throw DataError(name + ":" + std::to_string(line_no) +
                                ": expected 'key = value', got '" + std::string(sv) + "'");
            std::string key(trim(sv.substr(0, eq)));
            std::string val(trim(sv.substr(eq + 1)));
            if (key.empty())
                throw DataError(name + ":" + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = val;
        }
        return cfg;
    }

    static Config from_file(const std::string& path) {
        auto f = open_input_file(path);
        return from_stream(f, path);
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(it->second, "config key '" + key + "'");
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_int(it->second, "config key '" + key + "'");
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& s = it->second;
        try {
            if (s.empty() || s.front() == '-') throw std::invalid_argument(s);
            std::size_t pos = 0;
            std::uint64_t v = std::stoull(s, &pos, 0);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw DataError("config key '" + key + "': cannot parse '" + s +
                            "' as an unsigned integer");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& s = it->second;
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw DataError("config key '" + key + "': cannot parse '" + s + "' as a boolean");
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    // Reject unknown keys (typo guard). `known` must be sorted or not; we scan.
    template <typename Container>
    void validate_keys(const Container& known) const {
        for (const auto& [k, v] : values_) {
            if (std::find(std::begin(known), std::end(known), k) == std::end(known))
                throw UsageError("unknown config key '" + k + "'");
        }
    }

    // Deterministic serialization (sorted by key — std::map order).
    std::string echo() const {
        std::ostringstream out;
        for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
        return out.str();
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace cptmag
