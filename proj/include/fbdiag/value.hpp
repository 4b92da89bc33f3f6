#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "fbdiag/errors.hpp"

namespace fbdiag {

enum class DataType { Real, Int, Bool, Str };

// Typed payload carried by data ports. The variant order matches DataType.
using Value = std::variant<double, std::int64_t, bool, std::string>;

inline DataType data_type_of(const Value& v) {
    return static_cast<DataType>(v.index());
}

std::string data_type_name(DataType t);
std::optional<DataType> data_type_from_name(const std::string& name);

// Canonical text form: REAL at 9 significant digits, INT decimal,
// BOOL true/false, STR verbatim. Used by traces, captures and reports.
std::string value_to_text(const Value& v);

// Like value_to_text, but REAL payloads use the shortest digit string
// that parses back to the same bits. Used by file serializers, where
// round-trip fidelity matters more than column width.
std::string value_to_exact_text(const Value& v);

// Parses `text` as a literal of type `t`; throws ParseError on garbage.
Value value_from_text(DataType t, const std::string& text);

inline double as_real(const Value& v) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw OperationError("type-mismatch", "expected REAL payload, got " +
                                              data_type_name(data_type_of(v)));
}

}  // namespace fbdiag
