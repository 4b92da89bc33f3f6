#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbdiag/value.hpp"

namespace fbdiag {

using LogicalTime = std::int64_t;  // milliseconds on the logical clock

enum class PortKind { EventInput, EventOutput, DataInput, DataOutput };

bool is_event(PortKind k);
bool is_input(PortKind k);
std::string port_kind_name(PortKind k);

// Reference to one port of one named instance.
struct PortRef {
    std::string instance;
    std::string port;

    std::string to_string() const { return instance + "." + port; }
    bool operator==(const PortRef&) const = default;
    auto operator<=>(const PortRef&) const = default;
};

struct DataPort {
    std::string name;
    DataType type;

    bool operator==(const DataPort&) const = default;
};

// Interface description of a block type. Behavior is attached at runtime
// through `behavior_key`; a type with `source_period_ms` set fires its
// source function on that schedule (only legal without event inputs).
struct FbType {
    std::string name;
    std::vector<std::string> event_inputs;
    std::vector<std::string> event_outputs;
    std::vector<DataPort> data_inputs;
    std::vector<DataPort> data_outputs;
    std::string behavior_key;
    std::optional<LogicalTime> source_period_ms;

    std::optional<PortKind> port_kind(const std::string& port) const;
    const DataPort* data_input(const std::string& port) const;
    const DataPort* data_output(const std::string& port) const;

    bool operator==(const FbType&) const = default;
};

struct FbInstance {
    std::string name;
    std::string type_name;
    // Initial values for data inputs that have no incoming connection.
    std::map<std::string, Value> parameters;

    bool operator==(const FbInstance&) const = default;
};

enum class ConnectionKind { Event, Data };

struct Connection {
    ConnectionKind kind;
    PortRef source;       // an output port
    PortRef destination;  // an input port

    std::string to_string() const {
        return source.to_string() + " -> " + destination.to_string();
    }
    bool operator==(const Connection&) const = default;
};

struct Application {
    std::string name;
    std::map<std::string, FbType> type_library;
    std::vector<FbInstance> instances;  // declaration order is significant
    std::vector<Connection> connections;

    const FbInstance* instance(const std::string& name) const;
    const FbType* type_of(const std::string& instance_name) const;
    // Index into `connections`, matching endpoints exactly; nullopt if absent.
    std::optional<std::size_t> connection_index(const PortRef& src, const PortRef& dst) const;

    bool operator==(const Application&) const = default;
};

// Checks one type in isolation: unique non-empty port names, behavior key
// present, source period only on event-input-free types. Issues are
// ordered deterministically (instance empty, port name, code).
std::vector<ValidationIssue> validate(const FbType& type);

// Checks the whole application: type references, unique instance names,
// connection endpoint resolution and direction, event/data kind agreement,
// matching data types, single driver per data input, parameter names and
// literal types. Issue order: (instance, port, code).
std::vector<ValidationIssue> validate(const Application& app);

}  // namespace fbdiag
