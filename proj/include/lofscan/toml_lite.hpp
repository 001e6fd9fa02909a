#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lofscan/errors.hpp"

namespace lofscan::toml {

// Minimal TOML reader covering what scenario files use: comments, bare or
// quoted keys, strings, integers, floats, booleans, single-line arrays,
// [table] and [[array-of-tables]] headers. No dates, no dotted keys, no
// multi-line strings.
class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
public:
    Value() = default;
    explicit Value(bool b) : data_(b) {}
    explicit Value(std::int64_t i) : data_(i) {}
    explicit Value(double d) : data_(d) {}
    explicit Value(std::string s) : data_(std::move(s)) {}
    explicit Value(Array a) : data_(std::move(a)) {}
    explicit Value(Table t) : data_(std::move(t)) {}

    bool is_bool() const { return std::holds_alternative<bool>(data_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
    bool is_float() const { return std::holds_alternative<double>(data_); }
    bool is_string() const { return std::holds_alternative<std::string>(data_); }
    bool is_array() const { return std::holds_alternative<Array>(data_); }
    bool is_table() const { return std::holds_alternative<Table>(data_); }

    bool as_bool() const { return get<bool>("boolean"); }
    std::int64_t as_int() const { return get<std::int64_t>("integer"); }
    // Integers widen to double on demand.
    double as_float() const {
        return is_int() ? double(std::get<std::int64_t>(data_)) : get<double>("number");
    }
    const std::string& as_string() const { return get<std::string>("string"); }
    const Array& as_array() const { return get<Array>("array"); }
    const Table& as_table() const { return get<Table>("table"); }
    Table& as_table() { return const_cast<Table&>(get<Table>("table")); }
    Array& as_array() { return const_cast<Array&>(get<Array>("array")); }

    const char* type_name() const {
        static constexpr const char* names[] = {"empty",  "boolean", "integer", "number",
                                                "string", "array",   "table"};
        return names[data_.index()];
    }

private:
    template <class T>
    const T& get(const char* wanted) const {
        if (!std::holds_alternative<T>(data_))
            throw ConfigError(std::string("expected a ") + wanted + ", found a " + type_name());
        return std::get<T>(data_);
    }

    std::variant<std::monostate, bool, std::int64_t, double, std::string, Array, Table> data_;
};

// Throws ConfigError with a line reference on any syntax problem.
Table parse(std::string_view text);

}  // namespace lofscan::toml
