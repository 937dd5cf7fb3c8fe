#include "tailmix/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tailmix {

double ConfigValue::number() const {
    if (!is_number()) throw std::runtime_error("config: expected a number");
    return std::get<double>(v_);
}

bool ConfigValue::boolean() const {
    if (!is_bool()) throw std::runtime_error("config: expected a boolean");
    return std::get<bool>(v_);
}

const std::string& ConfigValue::string() const {
    if (!is_string()) throw std::runtime_error("config: expected a string");
    return std::get<std::string>(v_);
}

const ConfigValue::Array& ConfigValue::array() const {
    if (!is_array()) throw std::runtime_error("config: expected an array");
    return std::get<Array>(v_);
}

std::vector<double> ConfigValue::number_array() const {
    std::vector<double> out;
    for (const auto& v : array()) out.push_back(v.number());
    return out;
}

bool ConfigTable::has(const std::string& key) const { return values_.count(key) > 0; }
bool ConfigTable::has_table(const std::string& key) const { return tables_.count(key) > 0; }

const ConfigValue& ConfigTable::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config: missing key '" + key + "'");
    return it->second;
}

const ConfigTable& ConfigTable::table(const std::string& key) const {
    auto it = tables_.find(key);
    if (it == tables_.end()) throw std::runtime_error("config: missing section [" + key + "]");
    return it->second;
}

double ConfigTable::number(const std::string& key) const { return at(key).number(); }

double ConfigTable::number_or(const std::string& key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
}

std::string ConfigTable::string(const std::string& key) const { return at(key).string(); }

std::string ConfigTable::string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).string() : fallback;
}

std::vector<double> ConfigTable::number_array(const std::string& key) const {
    return at(key).number_array();
}

void ConfigTable::set(const std::string& key, ConfigValue value) {
    values_[key] = std::move(value);
}

ConfigTable& ConfigTable::subtable(const std::string& key) { return tables_[key]; }

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;
    int line = 1;

    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    void advance() {
        if (s[i] == '\n') ++line;
        ++i;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
    }
    void skip_inline_ws() {
        while (!done() && (peek() == ' ' || peek() == '\t')) advance();
    }
};

ConfigValue parse_value(Cursor& c);

ConfigValue parse_array(Cursor& c) {
    ConfigValue::Array items;
    c.advance(); // '['
    for (;;) {
        c.skip_inline_ws();
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ']') {
            c.advance();
            break;
        }
        items.push_back(parse_value(c));
        c.skip_inline_ws();
        if (!c.done() && c.peek() == ',') c.advance();
    }
    return ConfigValue(std::move(items));
}

ConfigValue parse_value(Cursor& c) {
    c.skip_inline_ws();
    if (c.done()) c.fail("missing value");
    char ch = c.peek();
    if (ch == '[') return parse_array(c);
    if (ch == '"') {
        c.advance();
        std::string s;
        while (!c.done() && c.peek() != '"') {
            s.push_back(c.peek());
            c.advance();
        }
        if (c.done()) c.fail("unterminated string");
        c.advance();
        return ConfigValue(std::move(s));
    }
    std::string tok;
    while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != '\n' &&
           c.peek() != '#' && c.peek() != ' ' && c.peek() != '\t') {
        tok.push_back(c.peek());
        c.advance();
    }
    if (tok == "true") return ConfigValue(true);
    if (tok == "false") return ConfigValue(false);
    try {
        std::size_t used = 0;
        double d = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return ConfigValue(d);
    } catch (const std::exception&) {
        c.fail("cannot parse value '" + tok + "'");
    }
}

std::string parse_key(Cursor& c) {
    std::string key;
    while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_' ||
                         c.peek() == '.')) {
        key.push_back(c.peek());
        c.advance();
    }
    if (key.empty()) c.fail("expected a key");
    return key;
}

ConfigTable* resolve_section(ConfigTable& root, const std::string& dotted) {
    ConfigTable* t = &root;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) t = &t->subtable(part);
    return t;
}

} // namespace

ConfigTable parse_config(const std::string& text) {
    ConfigTable root;
    ConfigTable* current = &root;
    Cursor c{text};
    while (!c.done()) {
        c.skip_inline_ws();
        if (c.done()) break;
        char ch = c.peek();
        if (ch == '\n' || ch == '\r') {
            c.advance();
            continue;
        }
        if (ch == '#') {
            while (!c.done() && c.peek() != '\n') c.advance();
            continue;
        }
        if (ch == '[') {
            c.advance();
            std::string name = parse_key(c);
            c.skip_inline_ws();
            if (c.done() || c.peek() != ']') c.fail("unterminated section header");
            c.advance();
            current = resolve_section(root, name);
            continue;
        }
        std::string key = parse_key(c);
        c.skip_inline_ws();
        if (c.done() || c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
        c.advance();
        current->set(key, parse_value(c));
        c.skip_inline_ws();
        if (!c.done() && c.peek() == '#')
            while (!c.done() && c.peek() != '\n') c.advance();
    }
    return root;
}

ConfigTable parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace tailmix
