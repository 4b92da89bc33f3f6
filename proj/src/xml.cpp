#include "fbdiag/xml.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "fbdiag/errors.hpp"

namespace fbdiag::xml {

namespace {

struct Builder {
    Node root;
    std::vector<Node*> stack;
    bool seen_root = false;
    XML_Parser parser = nullptr;
    std::string error;  // first structural error, reported after parsing stops

    void fail(const std::string& msg) {
        if (error.empty()) {
            error = "parse error at line " +
                    std::to_string(XML_GetCurrentLineNumber(parser)) + ": " + msg;
        }
        XML_StopParser(parser, XML_FALSE);
    }
};

void start_element(void* user, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(user);
    Node node;
    node.name = name;
    node.line = static_cast<int>(XML_GetCurrentLineNumber(b->parser));
    for (int i = 0; attrs[i]; i += 2) {
        if (!node.attributes.emplace(attrs[i], attrs[i + 1]).second) {
            b->fail("duplicate attribute '" + std::string(attrs[i]) + "'");
            return;
        }
    }
    if (b->stack.empty()) {
        if (b->seen_root) {
            b->fail("multiple root elements");
            return;
        }
        b->seen_root = true;
        b->root = std::move(node);
        b->stack.push_back(&b->root);
    } else {
        b->stack.back()->children.push_back(std::move(node));
        b->stack.push_back(&b->stack.back()->children.back());
    }
}

void end_element(void* user, const XML_Char*) {
    auto* b = static_cast<Builder*>(user);
    if (!b->stack.empty()) b->stack.pop_back();
}

void character_data(void* user, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(user);
    if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<size_t>(len));
}

void trim_text(Node& n) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto& t = n.text;
    while (!t.empty() && is_space(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
    while (!t.empty() && is_space(static_cast<unsigned char>(t.back()))) t.pop_back();
    for (auto& c : n.children) trim_text(c);
}

}  // namespace

Node parse_document(const std::string& text) {
    Builder b;
    XML_Parser parser = XML_ParserCreate("UTF-8");
    if (!parser) throw Error("expat parser allocation failed");
    b.parser = parser;
    XML_SetUserData(parser, &b);
    XML_SetElementHandler(parser, start_element, end_element);
    XML_SetCharacterDataHandler(parser, character_data);

    XML_Status st =
        XML_Parse(parser, text.data(), static_cast<int>(text.size()), /*isFinal=*/XML_TRUE);
    std::string expat_msg;
    int line = 0;
    if (st == XML_STATUS_ERROR && b.error.empty()) {
        expat_msg = XML_ErrorString(XML_GetErrorCode(parser));
        line = static_cast<int>(XML_GetCurrentLineNumber(parser));
    }
    XML_ParserFree(parser);

    if (!b.error.empty()) throw ParseError(b.error);
    if (!expat_msg.empty()) throw ParseError(expat_msg, line);
    if (!b.seen_root) throw ParseError("document has no root element");
    trim_text(b.root);
    return std::move(b.root);
}

const std::string& Node::required(const std::string& key) const {
    auto it = attributes.find(key);
    if (it == attributes.end())
        throw ParseError("missing required attribute '" + key + "'", line, name);
    return it->second;
}

const Node* Node::child(const std::string& name_) const {
    for (const auto& c : children)
        if (c.name == name_) return &c;
    return nullptr;
}

std::vector<const Node*> Node::children_named(const std::string& name_) const {
    std::vector<const Node*> out;
    for (const auto& c : children)
        if (c.name == name_) out.push_back(&c);
    return out;
}

void Node::reject_unknown_attributes(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : attributes) {
        if (!ok.count(key))
            throw ParseError("unknown attribute '" + key + "'", line, name);
    }
}

void Node::reject_unknown_children(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& c : children) {
        if (!ok.count(c.name)) throw ParseError("unknown element '" + c.name + "'", c.line, name);
    }
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace fbdiag::xml
