#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fbdiag {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed document: syntax errors, unknown elements/attributes, values
// that cannot be interpreted. Carries source context when known.
struct ParseError : Error {
    ParseError(std::string msg, int line_ = 0, std::string element_ = {})
        : Error(format(msg, line_, element_)),
          line(line_),
          element(std::move(element_)),
          message(std::move(msg)) {}

    int line = 0;
    std::string element;
    std::string message;

private:
    static std::string format(const std::string& msg, int line, const std::string& element) {
        std::string out = "parse error";
        if (line > 0) out += " at line " + std::to_string(line);
        if (!element.empty()) out += " in <" + element + ">";
        out += ": " + msg;
        return out;
    }
};

// One semantic defect found while validating a model.
struct ValidationIssue {
    std::string code;      // stable identifier, e.g. "dangling-reference"
    std::string instance;  // offending instance name ("" when type-level)
    std::string port;      // offending port name ("" when instance-level)
    std::string detail;

    std::string to_string() const {
        std::string out = code;
        if (!instance.empty()) {
            out += " [" + instance;
            if (!port.empty()) out += "." + port;
            out += "]";
        }
        out += ": " + detail;
        return out;
    }
};

// Thrown when a document is well-formed but semantically invalid.
// Carries the complete issue list, not just the first defect.
struct ValidationFailure : Error {
    explicit ValidationFailure(std::vector<ValidationIssue> issues_)
        : Error(format(issues_)), issues(std::move(issues_)) {}

    std::vector<ValidationIssue> issues;

private:
    static std::string format(const std::vector<ValidationIssue>& issues) {
        std::string out = "validation failed (" + std::to_string(issues.size()) + " issue";
        if (issues.size() != 1) out += "s";
        out += ")";
        for (const auto& i : issues) out += "\n  " + i.to_string();
        return out;
    }
};

// Misuse of a runtime or harness operation (unknown port, time in the
// past, double instrumentation, ...). The `kind` field is a stable
// machine-checkable tag; tests assert on it.
struct OperationError : Error {
    OperationError(std::string kind_, const std::string& detail)
        : Error(kind_ + ": " + detail), kind(std::move(kind_)) {}

    std::string kind;
};

}  // namespace fbdiag
