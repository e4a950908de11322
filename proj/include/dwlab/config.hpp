#pragma once

#include "dwlab/measure.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dwlab {

/// Flat key/value configuration.
///
/// Text form is one `key = value` per line; `[block]` headers prefix the
/// following keys with `block.`; `#` starts a comment. Lists are comma
/// separated; complex numbers are written `a+bi`, `a-bi`, `bi` or `a`.
class Config {
public:
    Config() = default;

    static Config parse(std::string_view text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<cplx> get_complexes(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key, char sep = ',') const;

    /// Sub-configuration of every key under `prefix.` with the prefix removed.
    Config block(const std::string& prefix) const;

    /// Canonical text (sorted keys), stable across runs.
    std::string to_text() const;
    std::uint64_t digest() const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

cplx parse_complex(std::string_view text);
std::string format_complex(cplx z);
std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex_digest(std::uint64_t digest);

}  // namespace dwlab
