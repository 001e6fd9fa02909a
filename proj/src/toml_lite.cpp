#include "lofscan/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace lofscan::toml {

namespace {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        const char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("scenario line " + std::to_string(line) + ": " + msg);
    }
    void skip_blanks() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
    // Blanks, comments, newlines.
    void skip_void() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos;
            } else if (c == '\n') {
                take();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else {
                break;
            }
        }
    }
    void expect_line_end() {
        skip_blanks();
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n') ++pos;
        if (!eof() && peek() == '\r') ++pos;
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        take();
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& c) {
    // Opening quote already consumed.
    std::string out;
    while (true) {
        if (c.eof()) c.fail("unterminated string");
        const char ch = c.take();
        if (ch == '"') return out;
        if (ch == '\n') c.fail("unterminated string");
        if (ch == '\\') {
            if (c.eof()) c.fail("unterminated escape");
            const char esc = c.take();
            switch (esc) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: c.fail(std::string("unsupported escape '\\") + esc + "'");
            }
        } else {
            out += ch;
        }
    }
}

std::string parse_key(Cursor& c) {
    if (!c.eof() && c.peek() == '"') {
        c.take();
        return parse_basic_string(c);
    }
    std::string key;
    while (!c.eof() && is_bare_key_char(c.peek())) key += c.take();
    if (key.empty()) c.fail("expected a key");
    return key;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    // '[' already consumed; single-line arrays only.
    Array items;
    c.skip_blanks();
    if (!c.eof() && c.peek() == ']') {
        c.take();
        return Value(std::move(items));
    }
    while (true) {
        items.push_back(parse_value(c));
        c.skip_blanks();
        if (c.eof()) c.fail("unterminated array");
        const char ch = c.take();
        if (ch == ']') return Value(std::move(items));
        if (ch != ',') c.fail("expected ',' or ']' in array");
        c.skip_blanks();
        if (!c.eof() && c.peek() == ']') {  // trailing comma
            c.take();
            return Value(std::move(items));
        }
    }
}

Value parse_number(Cursor& c) {
    std::string tok;
    while (!c.eof()) {
        const char ch = c.peek();
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' ||
            ch == '.' || ch == 'e' || ch == 'E' || ch == '_') {
            if (ch != '_') tok += ch;
            ++c.pos;
        } else {
            break;
        }
    }
    if (tok.empty()) c.fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    if (is_float) {
        double v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size() || !std::isfinite(v))
            c.fail("malformed number '" + tok + "'");
        return Value(v);
    }
    std::int64_t v = 0;
    const char* begin = tok.data();
    if (tok.size() > 1 && tok[0] == '+') ++begin;  // from_chars rejects '+'
    auto [p, ec] = std::from_chars(begin, tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        c.fail("malformed integer '" + tok + "'");
    return Value(v);
}

Value parse_value(Cursor& c) {
    c.skip_blanks();
    if (c.eof()) c.fail("expected a value");
    const char ch = c.peek();
    if (ch == '"') {
        c.take();
        return Value(parse_basic_string(c));
    }
    if (ch == '[') {
        c.take();
        return parse_array(c);
    }
    if (c.text.compare(c.pos, 4, "true") == 0 &&
        (c.pos + 4 >= c.text.size() || !is_bare_key_char(c.text[c.pos + 4]))) {
        c.pos += 4;
        return Value(true);
    }
    if (c.text.compare(c.pos, 5, "false") == 0 &&
        (c.pos + 5 >= c.text.size() || !is_bare_key_char(c.text[c.pos + 5]))) {
        c.pos += 5;
        return Value(false);
    }
    return parse_number(c);
}

}  // namespace

Table parse(std::string_view text) {
    Table root;
    Cursor c{text};
    Table* current = &root;

    c.skip_void();
    while (!c.eof()) {
        if (c.peek() == '[') {
            c.take();
            const bool array_of_tables = !c.eof() && c.peek() == '[';
            if (array_of_tables) c.take();
            c.skip_blanks();
            const std::string name = parse_key(c);
            c.skip_blanks();
            if (c.eof() || c.take() != ']') c.fail("expected ']'");
            if (array_of_tables && (c.eof() || c.take() != ']')) c.fail("expected ']]'");
            c.expect_line_end();

            if (array_of_tables) {
                auto it = root.find(name);
                if (it == root.end())
                    it = root.emplace(name, Value(Array{})).first;
                else if (!it->second.is_array())
                    c.fail("'" + name + "' is already a non-array value");
                it->second.as_array().push_back(Value(Table{}));
                current = &it->second.as_array().back().as_table();
            } else {
                auto [it, inserted] = root.emplace(name, Value(Table{}));
                if (!inserted) c.fail("table '" + name + "' defined twice");
                current = &it->second.as_table();
            }
        } else {
            const std::string key = parse_key(c);
            c.skip_blanks();
            if (c.eof() || c.take() != '=') c.fail("expected '=' after key '" + key + "'");
            Value v = parse_value(c);
            c.expect_line_end();
            if (!current->emplace(key, std::move(v)).second)
                c.fail("key '" + key + "' set twice");
        }
        c.skip_void();
    }
    return root;
}

}  // namespace lofscan::toml
