#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tailmix {

// Minimal structured-text config: [section] headers, key = value lines,
// numbers, booleans, quoted strings and (nested) arrays. Sections nest via
// dotted headers.
class ConfigValue {
public:
    using Array = std::vector<ConfigValue>;

    ConfigValue() : v_(0.0) {}
    explicit ConfigValue(double d) : v_(d) {}
    explicit ConfigValue(bool b) : v_(b) {}
    explicit ConfigValue(std::string s) : v_(std::move(s)) {}
    explicit ConfigValue(Array a) : v_(std::move(a)) {}

    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }

    double number() const;
    bool boolean() const;
    const std::string& string() const;
    const Array& array() const;
    std::vector<double> number_array() const;

private:
    std::variant<double, bool, std::string, Array> v_;
};

class ConfigTable {
public:
    bool has(const std::string& key) const;
    bool has_table(const std::string& key) const;

    const ConfigValue& at(const std::string& key) const;
    const ConfigTable& table(const std::string& key) const;

    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string string(const std::string& key) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> number_array(const std::string& key) const;

    void set(const std::string& key, ConfigValue value);
    ConfigTable& subtable(const std::string& key); // creates on demand

    const std::map<std::string, ConfigValue>& values() const { return values_; }
    const std::map<std::string, ConfigTable>& tables() const { return tables_; }

private:
    std::map<std::string, ConfigValue> values_;
    std::map<std::string, ConfigTable> tables_;
};

ConfigTable parse_config(const std::string& text);
ConfigTable parse_config_file(const std::string& path);

} // namespace tailmix
