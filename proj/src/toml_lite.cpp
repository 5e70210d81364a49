#include "rssa/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace rssa::toml {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// remove a trailing comment that is not inside a string
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

Value parse_scalar(const std::string& raw, int line) {
    const std::string t = strip(raw);
    if (t.empty()) throw ParseError("toml: empty value at line " + std::to_string(line));
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            throw ParseError("toml: unterminated string at line " + std::to_string(line));
        return Value{t.substr(1, t.size() - 2)};
    }
    if (t == "true") return Value{true};
    if (t == "false") return Value{false};
    // integer?
    bool integral = !t.empty();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const char c = t[i];
        if (i == 0 && (c == '+' || c == '-')) continue;
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '_') {
            integral = false;
            break;
        }
    }
    std::string digits;
    for (char c : t)
        if (c != '_') digits += c;
    try {
        if (integral) return Value{static_cast<std::int64_t>(std::stoll(digits))};
        std::size_t used = 0;
        const double d = std::stod(digits, &used);
        if (used != digits.size()) throw ParseError("");
        return Value{d};
    } catch (const std::exception&) {
        throw ParseError("toml: bad value '" + t + "' at line " + std::to_string(line));
    }
}

Value parse_array(const std::string& raw, int line) {
    const std::string t = strip(raw);
    const std::string inner = strip(t.substr(1, t.size() - 2));
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : inner) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!strip(cur).empty()) items.push_back(cur);
    bool strings = false;
    for (const auto& it : items)
        if (strip(it).size() && strip(it).front() == '"') strings = true;
    if (strings) {
        std::vector<std::string> out;
        for (const auto& it : items) {
            Value v = parse_scalar(it, line);
            if (!v.is_string()) throw ParseError("toml: mixed array at line " + std::to_string(line));
            out.push_back(std::get<std::string>(v.v));
        }
        return Value{out};
    }
    std::vector<double> out;
    for (const auto& it : items) {
        Value v = parse_scalar(it, line);
        if (v.is_int())
            out.push_back(static_cast<double>(std::get<std::int64_t>(v.v)));
        else if (v.is_float())
            out.push_back(std::get<double>(v.v));
        else
            throw ParseError("toml: non-numeric array entry at line " + std::to_string(line));
    }
    return Value{out};
}

}  // namespace

bool Document::has(const std::string& table, const std::string& key) const {
    auto it = tables.find(table);
    return it != tables.end() && it->second.count(key) > 0;
}

const Value& Document::at(const std::string& table, const std::string& key) const {
    auto it = tables.find(table);
    if (it == tables.end() || !it->second.count(key))
        throw ParseError("toml: missing key " + (table.empty() ? key : table + "." + key));
    return it->second.at(key);
}

Document parse(const std::string& text) {
    Document doc;
    std::string table;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = strip(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ParseError("toml: bad table header at line " + std::to_string(lineno));
            table = strip(t.substr(1, t.size() - 2));
            if (table.empty()) throw ParseError("toml: empty table name at line " + std::to_string(lineno));
            doc.tables[table];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("toml: expected key = value at line " + std::to_string(lineno));
        const std::string key = strip(t.substr(0, eq));
        const std::string raw = strip(t.substr(eq + 1));
        if (key.empty()) throw ParseError("toml: empty key at line " + std::to_string(lineno));
        if (!raw.empty() && raw.front() == '[') {
            if (raw.back() != ']') throw ParseError("toml: unterminated array at line " + std::to_string(lineno));
            doc.tables[table][key] = parse_array(raw, lineno);
        } else {
            doc.tables[table][key] = parse_scalar(raw, lineno);
        }
    }
    return doc;
}

Document parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("toml: cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

}  // namespace rssa::toml
