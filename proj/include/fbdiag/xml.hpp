#pragma once

#include <map>
#include <string>
#include <vector>

namespace fbdiag::xml {

// Minimal immutable document tree. Enough structure for the interchange
// formats handled here: elements, attributes, text, line numbers for
// error context. Namespaces and CDATA subtleties are out of scope.
struct Node {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<Node> children;
    std::string text;  // concatenated character data, trimmed
    int line = 0;

    bool has_attribute(const std::string& key) const { return attributes.count(key) != 0; }

    // Returns the attribute value; throws ParseError when absent.
    const std::string& required(const std::string& key) const;

    const std::string* find_attribute(const std::string& key) const {
        auto it = attributes.find(key);
        return it == attributes.end() ? nullptr : &it->second;
    }

    // First child element with this name, or nullptr.
    const Node* child(const std::string& name) const;

    std::vector<const Node*> children_named(const std::string& name) const;

    // Throws ParseError if any attribute key is outside `allowed`.
    void reject_unknown_attributes(std::initializer_list<const char*> allowed) const;

    // Throws ParseError if any child element name is outside `allowed`.
    void reject_unknown_children(std::initializer_list<const char*> allowed) const;
};

// Parses a complete UTF-8 document into its root element.
// Throws ParseError (with line info) on malformed input.
Node parse_document(const std::string& text);

// Escapes &, <, >, " for use in attribute values and text.
std::string escape(const std::string& s);

}  // namespace fbdiag::xml
