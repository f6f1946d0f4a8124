#include "voxevo/experiment_config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace voxevo {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || p != last) throw ConfigError(fmt::format("config key '{}': '{}' is not a valid number", key, value));
    return out;
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text)
{
    ConfigDocument doc;
    std::string section;
    std::size_t lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(fmt::format("config line {}: unterminated section header", lineno));
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("config line {}: expected 'key = value'", lineno));
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(fmt::format("config line {}: empty key", lineno));
        const std::string full = section.empty() ? key : section + "." + key;
        if (doc.entries_.count(full)) throw ConfigError(fmt::format("config line {}: duplicate key '{}'", lineno, full));
        doc.entries_.emplace(full, value);
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string ConfigDocument::get_string(const std::string& key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(fmt::format("missing config key '{}'", key));
    return it->second;
}

double ConfigDocument::get_double(const std::string& key) const { return parse_number<double>(key, get_string(key)); }
std::int64_t ConfigDocument::get_int(const std::string& key) const { return parse_number<std::int64_t>(key, get_string(key)); }
std::uint64_t ConfigDocument::get_uint(const std::string& key) const { return parse_number<std::uint64_t>(key, get_string(key)); }

bool ConfigDocument::get_bool(const std::string& key) const
{
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::vector<std::string> ConfigDocument::get_list(const std::string& key) const
{
    std::vector<std::string> out;
    std::string_view rest = get_string(key);
    while (true) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

}  // namespace voxevo
