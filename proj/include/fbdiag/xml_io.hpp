#pragma once

#include <map>
#include <string>

#include "fbdiag/model.hpp"

namespace fbdiag {

// Reads one block-type document (.fbt.xml). Throws ParseError on syntax
// or structural problems (unknown elements/attributes are rejected) and
// ValidationFailure when the declared interface breaks type invariants.
FbType parse_fb_type(const std::string& xml_text);

// Reads one application document (.app.xml) against an already-loaded
// type library. Throws ParseError for syntax and ValidationFailure
// carrying the complete list of semantic defects (dangling references,
// kind/type mismatches, duplicate drivers, ...), never just the first.
Application parse_application(const std::string& xml_text,
                              const std::map<std::string, FbType>& type_library);

// Canonical writers: fixed element order, fixed attribute order, 2-space
// indent, newline at end. parse(serialize(x)) reproduces x structurally.
std::string to_xml(const FbType& type);
std::string to_xml(const Application& app);

}  // namespace fbdiag
