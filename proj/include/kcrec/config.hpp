#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kcrec {

// Flat key-value run configuration. File format: one `key = value` per
// line, `#` starts a comment. Command-line overrides are applied on top;
// the fully-resolved config is written next to every run's report.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text, const std::string& origin = "<string>");

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const;

    // Deterministic serialization, keys sorted.
    std::string resolved_text() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace kcrec
