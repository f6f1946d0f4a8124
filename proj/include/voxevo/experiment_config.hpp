#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace voxevo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` document. `[section]` headers prefix the keys that
/// follow (`section.key`); dotted keys work anywhere. `#` starts a comment.
class ConfigDocument {
public:
    static ConfigDocument parse(std::string_view text);
    static ConfigDocument load(const std::string& path);

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    /// Comma-separated list of trimmed items.
    std::vector<std::string> get_list(const std::string& key) const;

    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace voxevo
