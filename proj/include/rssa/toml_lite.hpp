#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace rssa::toml {

// Minimal TOML subset: [table] headers, key = value with strings, integers,
// floats, booleans and flat arrays, # comments. Covers the run configs.
struct Value {
    std::variant<std::string, std::int64_t, double, bool, std::vector<double>, std::vector<std::string>> v;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
    bool is_float() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_number_array() const { return std::holds_alternative<std::vector<double>>(v); }
};

struct Document {
    // table name ("" for root) -> ordered key/value pairs
    std::map<std::string, std::map<std::string, Value>> tables;

    bool has(const std::string& table, const std::string& key) const;
    const Value& at(const std::string& table, const std::string& key) const;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Document parse(const std::string& text);
Document parse_file(const std::filesystem::path& path);

}  // namespace rssa::toml
