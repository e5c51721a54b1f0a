#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfnet::io {

class ConfigFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Line-based `key = value` configuration with '#' comments. Values are
// strings until a typed getter is called; consumers check for unknown keys
// via keys().
class ConfigFile {
public:
    ConfigFile() = default;
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get_str(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma separated

    std::vector<std::string> keys() const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace rfnet::io
