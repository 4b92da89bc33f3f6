#include "fbdiag/xml_io.hpp"

#include <sstream>

#include "fbdiag/xml.hpp"

namespace fbdiag {

namespace {

// "INSTANCE.PORT" -> PortRef; anything else is malformed.
PortRef split_port_ref(const std::string& text, int line) {
    auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size())
        throw ParseError("endpoint '" + text + "' is not of the form INSTANCE.PORT", line,
                         "Connection");
    return {text.substr(0, dot), text.substr(dot + 1)};
}

std::vector<std::string> read_event_list(const xml::Node* section) {
    std::vector<std::string> out;
    if (!section) return out;
    section->reject_unknown_children({"Event"});
    section->reject_unknown_attributes({});
    for (const auto* ev : section->children_named("Event")) {
        ev->reject_unknown_attributes({"Name"});
        ev->reject_unknown_children({});
        out.push_back(ev->required("Name"));
    }
    return out;
}

std::vector<DataPort> read_var_list(const xml::Node* section) {
    std::vector<DataPort> out;
    if (!section) return out;
    section->reject_unknown_children({"VarDeclaration"});
    section->reject_unknown_attributes({});
    for (const auto* var : section->children_named("VarDeclaration")) {
        var->reject_unknown_attributes({"Name", "Type"});
        var->reject_unknown_children({});
        const std::string& type_name = var->required("Type");
        auto type = data_type_from_name(type_name);
        if (!type)
            throw ParseError("unknown data type '" + type_name + "'", var->line, "VarDeclaration");
        out.push_back({var->required("Name"), *type});
    }
    return out;
}

}  // namespace

FbType parse_fb_type(const std::string& xml_text) {
    xml::Node root = xml::parse_document(xml_text);
    if (root.name != "FBType")
        throw ParseError("expected root element <FBType>, got <" + root.name + ">", root.line);
    root.reject_unknown_attributes({"Name", "BehaviorKey", "SourcePeriodMs"});
    root.reject_unknown_children({"InterfaceList"});

    FbType type;
    type.name = root.required("Name");
    type.behavior_key = root.required("BehaviorKey");
    if (const std::string* period = root.find_attribute("SourcePeriodMs")) {
        Value v = value_from_text(DataType::Int, *period);
        type.source_period_ms = std::get<std::int64_t>(v);
    }

    const xml::Node* iface = root.child("InterfaceList");
    if (!iface) throw ParseError("missing <InterfaceList>", root.line, "FBType");
    iface->reject_unknown_attributes({});
    iface->reject_unknown_children({"EventInputs", "EventOutputs", "InputVars", "OutputVars"});
    type.event_inputs = read_event_list(iface->child("EventInputs"));
    type.event_outputs = read_event_list(iface->child("EventOutputs"));
    type.data_inputs = read_var_list(iface->child("InputVars"));
    type.data_outputs = read_var_list(iface->child("OutputVars"));

    // Type-level defects are local to the document, so they surface as
    // parse errors with context rather than as a validation list.
    auto issues = validate(type);
    if (!issues.empty()) throw ParseError(issues.front().to_string(), root.line, "FBType");
    return type;
}

Application parse_application(const std::string& xml_text,
                              const std::map<std::string, FbType>& type_library) {
    xml::Node root = xml::parse_document(xml_text);
    if (root.name != "Application")
        throw ParseError("expected root element <Application>, got <" + root.name + ">", root.line);
    root.reject_unknown_attributes({"Name"});
    root.reject_unknown_children({"FBNetwork"});

    Application app;
    app.name = root.required("Name");
    app.type_library = type_library;

    const xml::Node* net = root.child("FBNetwork");
    if (!net) throw ParseError("missing <FBNetwork>", root.line, "Application");
    net->reject_unknown_attributes({});
    net->reject_unknown_children({"FB", "EventConnections", "DataConnections"});

    for (const auto* fb : net->children_named("FB")) {
        fb->reject_unknown_attributes({"Name", "Type"});
        fb->reject_unknown_children({"Parameter"});
        FbInstance inst;
        inst.name = fb->required("Name");
        inst.type_name = fb->required("Type");
        auto type_it = type_library.find(inst.type_name);
        for (const auto* param : fb->children_named("Parameter")) {
            param->reject_unknown_attributes({"Name", "Value"});
            param->reject_unknown_children({});
            const std::string& pname = param->required("Name");
            const std::string& literal = param->required("Value");
            // Typed against the declared input when resolvable; left as a
            // string otherwise so validation can report the unknown name.
            DataType t = DataType::Str;
            if (type_it != type_library.end()) {
                if (const DataPort* port = type_it->second.data_input(pname)) t = port->type;
            }
            inst.parameters.emplace(pname, value_from_text(t, literal));
        }
        app.instances.push_back(std::move(inst));
    }

    auto read_connections = [&](const char* section_name, ConnectionKind kind) {
        for (const auto* section : net->children_named(section_name)) {
            section->reject_unknown_attributes({});
            section->reject_unknown_children({"Connection"});
            for (const auto* conn : section->children_named("Connection")) {
                conn->reject_unknown_attributes({"Source", "Destination"});
                conn->reject_unknown_children({});
                app.connections.push_back(
                    {kind, split_port_ref(conn->required("Source"), conn->line),
                     split_port_ref(conn->required("Destination"), conn->line)});
            }
        }
    };
    read_connections("EventConnections", ConnectionKind::Event);
    read_connections("DataConnections", ConnectionKind::Data);

    auto issues = validate(app);
    if (!issues.empty()) throw ValidationFailure(std::move(issues));
    return app;
}

std::string to_xml(const FbType& type) {
    std::ostringstream out;
    out << "<FBType Name=\"" << xml::escape(type.name) << "\" BehaviorKey=\""
        << xml::escape(type.behavior_key) << "\"";
    if (type.source_period_ms) out << " SourcePeriodMs=\"" << *type.source_period_ms << "\"";
    out << ">\n  <InterfaceList>\n";
    auto events = [&](const char* tag, const std::vector<std::string>& list) {
        if (list.empty()) return;
        out << "    <" << tag << ">\n";
        for (const auto& name : list)
            out << "      <Event Name=\"" << xml::escape(name) << "\"/>\n";
        out << "    </" << tag << ">\n";
    };
    auto vars = [&](const char* tag, const std::vector<DataPort>& list) {
        if (list.empty()) return;
        out << "    <" << tag << ">\n";
        for (const auto& port : list)
            out << "      <VarDeclaration Name=\"" << xml::escape(port.name) << "\" Type=\""
                << data_type_name(port.type) << "\"/>\n";
        out << "    </" << tag << ">\n";
    };
    events("EventInputs", type.event_inputs);
    events("EventOutputs", type.event_outputs);
    vars("InputVars", type.data_inputs);
    vars("OutputVars", type.data_outputs);
    out << "  </InterfaceList>\n</FBType>\n";
    return out.str();
}

std::string to_xml(const Application& app) {
    std::ostringstream out;
    out << "<Application Name=\"" << xml::escape(app.name) << "\">\n  <FBNetwork>\n";
    for (const auto& inst : app.instances) {
        out << "    <FB Name=\"" << xml::escape(inst.name) << "\" Type=\""
            << xml::escape(inst.type_name) << "\"";
        if (inst.parameters.empty()) {
            out << "/>\n";
        } else {
            out << ">\n";
            for (const auto& [pname, pvalue] : inst.parameters)
                out << "      <Parameter Name=\"" << xml::escape(pname) << "\" Value=\""
                    << xml::escape(value_to_text(pvalue)) << "\"/>\n";
            out << "    </FB>\n";
        }
    }
    auto connections = [&](const char* tag, ConnectionKind kind) {
        bool any = false;
        for (const auto& c : app.connections) any = any || c.kind == kind;
        if (!any) return;
        out << "    <" << tag << ">\n";
        for (const auto& c : app.connections) {
            if (c.kind != kind) continue;
            out << "      <Connection Source=\"" << xml::escape(c.source.to_string())
                << "\" Destination=\"" << xml::escape(c.destination.to_string()) << "\"/>\n";
        }
        out << "    </" << tag << ">\n";
    };
    connections("EventConnections", ConnectionKind::Event);
    connections("DataConnections", ConnectionKind::Data);
    out << "  </FBNetwork>\n</Application>\n";
    return out.str();
}

}  // namespace fbdiag
