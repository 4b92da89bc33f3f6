#include "fbdiag/model.hpp"

#include <algorithm>
#include <set>

namespace fbdiag {

bool is_event(PortKind k) { return k == PortKind::EventInput || k == PortKind::EventOutput; }

bool is_input(PortKind k) { return k == PortKind::EventInput || k == PortKind::DataInput; }

std::string port_kind_name(PortKind k) {
    switch (k) {
        case PortKind::EventInput: return "event input";
        case PortKind::EventOutput: return "event output";
        case PortKind::DataInput: return "data input";
        case PortKind::DataOutput: return "data output";
    }
    return "?";
}

std::optional<PortKind> FbType::port_kind(const std::string& port) const {
    for (const auto& p : event_inputs)
        if (p == port) return PortKind::EventInput;
    for (const auto& p : event_outputs)
        if (p == port) return PortKind::EventOutput;
    for (const auto& p : data_inputs)
        if (p.name == port) return PortKind::DataInput;
    for (const auto& p : data_outputs)
        if (p.name == port) return PortKind::DataOutput;
    return std::nullopt;
}

const DataPort* FbType::data_input(const std::string& port) const {
    for (const auto& p : data_inputs)
        if (p.name == port) return &p;
    return nullptr;
}

const DataPort* FbType::data_output(const std::string& port) const {
    for (const auto& p : data_outputs)
        if (p.name == port) return &p;
    return nullptr;
}

const FbInstance* Application::instance(const std::string& name_) const {
    for (const auto& i : instances)
        if (i.name == name_) return &i;
    return nullptr;
}

const FbType* Application::type_of(const std::string& instance_name) const {
    const FbInstance* inst = instance(instance_name);
    if (!inst) return nullptr;
    auto it = type_library.find(inst->type_name);
    return it == type_library.end() ? nullptr : &it->second;
}

std::optional<std::size_t> Application::connection_index(const PortRef& src,
                                                         const PortRef& dst) const {
    for (std::size_t i = 0; i < connections.size(); ++i)
        if (connections[i].source == src && connections[i].destination == dst) return i;
    return std::nullopt;
}

namespace {

void sort_issues(std::vector<ValidationIssue>& issues) {
    std::sort(issues.begin(), issues.end(), [](const ValidationIssue& a, const ValidationIssue& b) {
        if (a.instance != b.instance) return a.instance < b.instance;
        if (a.port != b.port) return a.port < b.port;
        if (a.code != b.code) return a.code < b.code;
        return a.detail < b.detail;
    });
}

}  // namespace

std::vector<ValidationIssue> validate(const FbType& type) {
    std::vector<ValidationIssue> issues;
    auto add = [&](const std::string& code, const std::string& port, const std::string& detail) {
        issues.push_back({code, "", port, detail});
    };

    if (type.name.empty()) add("empty-name", "", "type has no name");
    if (type.behavior_key.empty())
        add("missing-behavior-key", "", "type '" + type.name + "' declares no behavior key");

    std::set<std::string> seen;
    auto check_port = [&](const std::string& port) {
        if (port.empty()) {
            add("empty-port-name", "", "type '" + type.name + "' has an unnamed port");
            return;
        }
        if (!seen.insert(port).second)
            add("duplicate-port", port, "port '" + port + "' declared more than once");
    };
    for (const auto& p : type.event_inputs) check_port(p);
    for (const auto& p : type.event_outputs) check_port(p);
    for (const auto& p : type.data_inputs) check_port(p.name);
    for (const auto& p : type.data_outputs) check_port(p.name);

    if (type.source_period_ms) {
        if (*type.source_period_ms <= 0)
            add("bad-period", "", "source period must be positive");
        if (!type.event_inputs.empty())
            add("period-with-event-inputs", "",
                "type '" + type.name + "' has a source period but also event inputs");
    }

    sort_issues(issues);
    return issues;
}

std::vector<ValidationIssue> validate(const Application& app) {
    std::vector<ValidationIssue> issues;
    auto add = [&](const std::string& code, const std::string& instance, const std::string& port,
                   const std::string& detail) {
        issues.push_back({code, instance, port, detail});
    };

    for (const auto& [name, type] : app.type_library) {
        for (auto& issue : validate(type)) {
            issue.instance = name;  // anchor type issues on the library key
            issues.push_back(std::move(issue));
        }
    }

    std::set<std::string> instance_names;
    for (const auto& inst : app.instances) {
        if (!instance_names.insert(inst.name).second)
            add("duplicate-instance", inst.name, "", "instance name used more than once");
        auto it = app.type_library.find(inst.type_name);
        if (it == app.type_library.end()) {
            add("unknown-type", inst.name, "",
                "instance references undeclared type '" + inst.type_name + "'");
            continue;
        }
        const FbType& type = it->second;
        for (const auto& [pname, pvalue] : inst.parameters) {
            const DataPort* port = type.data_input(pname);
            if (!port) {
                add("unknown-parameter", inst.name, pname,
                    "parameter does not name a data input of '" + type.name + "'");
            } else if (data_type_of(pvalue) != port->type) {
                add("parameter-type-mismatch", inst.name, pname,
                    "parameter is " + data_type_name(data_type_of(pvalue)) + ", port wants " +
                        data_type_name(port->type));
            }
        }
    }

    // endpoint -> how many connections drive it (data inputs only)
    std::map<PortRef, int> drivers;

    for (const auto& conn : app.connections) {
        auto resolve = [&](const PortRef& ref, bool want_input) -> std::optional<PortKind> {
            const FbType* type = app.type_of(ref.instance);
            if (!app.instance(ref.instance)) {
                add("dangling-reference", ref.instance, ref.port,
                    "connection endpoint names unknown instance");
                return std::nullopt;
            }
            if (!type) return std::nullopt;  // unknown-type already reported
            auto kind = type->port_kind(ref.port);
            if (!kind) {
                add("dangling-reference", ref.instance, ref.port,
                    "connection endpoint names unknown port of '" + type->name + "'");
                return std::nullopt;
            }
            if (is_input(*kind) != want_input) {
                add("wrong-direction", ref.instance, ref.port,
                    std::string("connection ") + (want_input ? "destination" : "source") +
                        " must be an " + (want_input ? "input" : "output") + ", got " +
                        port_kind_name(*kind));
                return std::nullopt;
            }
            return kind;
        };

        auto src_kind = resolve(conn.source, /*want_input=*/false);
        auto dst_kind = resolve(conn.destination, /*want_input=*/true);
        if (!src_kind || !dst_kind) continue;

        bool src_event = is_event(*src_kind);
        bool dst_event = is_event(*dst_kind);
        bool conn_event = conn.kind == ConnectionKind::Event;
        if (src_event != conn_event || dst_event != conn_event) {
            add("kind-mismatch", conn.source.instance, conn.source.port,
                "connection kind does not match endpoints: " + conn.to_string());
            continue;
        }

        if (conn.kind == ConnectionKind::Data) {
            const DataPort* out = app.type_of(conn.source.instance)->data_output(conn.source.port);
            const DataPort* in =
                app.type_of(conn.destination.instance)->data_input(conn.destination.port);
            if (out && in && out->type != in->type) {
                add("type-mismatch", conn.destination.instance, conn.destination.port,
                    "connection joins " + data_type_name(out->type) + " to " +
                        data_type_name(in->type) + ": " + conn.to_string());
            }
            if (++drivers[conn.destination] == 2) {
                add("multiple-drivers", conn.destination.instance, conn.destination.port,
                    "data input has more than one incoming connection");
            }
        }
    }

    sort_issues(issues);
    return issues;
}

}  // namespace fbdiag
