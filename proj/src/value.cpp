#include "fbdiag/value.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace fbdiag {

std::string data_type_name(DataType t) {
    switch (t) {
        case DataType::Real: return "REAL";
        case DataType::Int: return "INT";
        case DataType::Bool: return "BOOL";
        case DataType::Str: return "STRING";
    }
    return "?";
}

std::optional<DataType> data_type_from_name(const std::string& name) {
    if (name == "REAL") return DataType::Real;
    if (name == "INT") return DataType::Int;
    if (name == "BOOL") return DataType::Bool;
    if (name == "STRING") return DataType::Str;
    return std::nullopt;
}

std::string value_to_text(const Value& v) {
    switch (data_type_of(v)) {
        case DataType::Real: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", std::get<double>(v));
            return buf;
        }
        case DataType::Int:
            return std::to_string(std::get<std::int64_t>(v));
        case DataType::Bool:
            return std::get<bool>(v) ? "true" : "false";
        case DataType::Str:
            return std::get<std::string>(v);
    }
    return {};
}

std::string value_to_exact_text(const Value& v) {
    if (data_type_of(v) != DataType::Real) return value_to_text(v);
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
    return std::string(buf, end);
}

Value value_from_text(DataType t, const std::string& text) {
    switch (t) {
        case DataType::Real: {
            const char* s = text.c_str();
            char* end = nullptr;
            double d = std::strtod(s, &end);
            if (end == s || *end != '\0')
                throw ParseError("bad REAL literal '" + text + "'");
            return d;
        }
        case DataType::Int: {
            const char* s = text.c_str();
            char* end = nullptr;
            long long n = std::strtoll(s, &end, 10);
            if (end == s || *end != '\0')
                throw ParseError("bad INT literal '" + text + "'");
            return static_cast<std::int64_t>(n);
        }
        case DataType::Bool: {
            if (text == "true" || text == "TRUE" || text == "1") return true;
            if (text == "false" || text == "FALSE" || text == "0") return false;
            throw ParseError("bad BOOL literal '" + text + "'");
        }
        case DataType::Str:
            return text;
    }
    throw ParseError("bad literal '" + text + "'");
}

}  // namespace fbdiag
