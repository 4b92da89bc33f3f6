#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbdiag/model.hpp"

namespace fbdiag {

enum class Veracity { True, False, Undetermined };

std::string veracity_name(Veracity v);
std::optional<Veracity> veracity_from_name(const std::string& name);

// Closed-world fault vocabulary; reports never reference anything else.
enum class FaultCode {
    F0_NONE,
    F1_ALGORITHM,
    F2_NO_RESPONSE,
    F3_OUT_OF_TOLERANCE,
    F4_SENSOR_SUSPECTED,
    F5_EVENT_PATH_BROKEN,
};

std::string fault_code_name(FaultCode f);
std::optional<FaultCode> fault_code_from_name(const std::string& name);

// A skill the agent can perform, held as a belief that is true by
// construction: the skill set is static for the life of the agent.
struct InteractionBelief {
    std::string agent_name;
    std::string method_signature;
    Veracity veracity = Veracity::True;

    bool operator==(const InteractionBelief&) const = default;
};

// The skills every diagnostic agent is built with.
std::vector<InteractionBelief> default_skills(const std::string& agent_name);

// The condition under which a transition fires: the source output port
// (event or data) plus an optional guard over variable values.
struct TriggerCondition {
    std::string output;
    ConnectionKind kind = ConnectionKind::Event;
    std::optional<std::string> guard;

    bool operator==(const TriggerCondition&) const = default;
};

// One directed edge of the application graph, held as a belief: the agent
// trusts the design until an event-path test proves a transition dead.
struct SystemBelief {
    std::string fb1;
    TriggerCondition trg;
    std::string fb2;
    Veracity veracity = Veracity::True;

    bool operator==(const SystemBelief&) const = default;
};

// Everything the agent knows about one block instance: the full typed
// interface (enables type-safe test values), the declared parameters, and
// which diagnostic points touch its connections.
struct NodeInfo {
    std::string name;
    FbType type;
    std::map<std::string, Value> parameters;
    std::vector<int> installed_dps;  // sorted, unique

    bool operator==(const NodeInfo&) const = default;
};

struct SystemBeliefGraph {
    std::map<std::string, NodeInfo> nodes;
    std::vector<SystemBelief> edges;  // application connection order

    bool operator==(const SystemBeliefGraph&) const = default;
};

// Restructures the application as a directed graph: node per instance,
// edge per connection, edge named by the source output port.
SystemBeliefGraph graph_from_application(const Application& app);

// Records that a DP instruments `connection` (an index into
// app.connections): the id is attached to both endpoint nodes.
void annotate_dp(SystemBeliefGraph& g, const Application& app, int dp_id,
                 std::size_t connection);

// Outgoing edges of `fb` in declaration order. Throws "unknown-node".
std::vector<SystemBelief> downstream(const SystemBeliefGraph& g, const std::string& fb);
// Incoming edges of `fb` in declaration order. Throws "unknown-node".
std::vector<SystemBelief> upstream(const SystemBeliefGraph& g, const std::string& fb);

// Nodes along data edges from `from` to `to` (inclusive), shortest first
// with ties broken by node name; nullopt when unreachable.
// Throws "unknown-node" when either endpoint is missing.
std::optional<std::vector<std::string>> data_path(const SystemBeliefGraph& g,
                                                  const std::string& from, const std::string& to);

// Finds the edge source.instance --source.port--> dst_instance, or null.
SystemBelief* find_edge(SystemBeliefGraph& g, const PortRef& source,
                        const std::string& dst_instance);

enum class Outcome { Pass, Fail };

// The agent's fault opinion about one block: what code it suspects, how
// sure it is, and the test evidence behind that.
struct DynamicBelief {
    std::string subject;
    FaultCode fault_code = FaultCode::F0_NONE;
    Veracity veracity = Veracity::Undetermined;
    int pass_count = 0;
    int fail_count = 0;

    bool operator==(const DynamicBelief&) const = default;
};

struct BeliefTransition {
    LogicalTime time = 0;
    std::string subject;
    Veracity from = Veracity::Undetermined;
    Veracity to = Veracity::Undetermined;
    FaultCode fault_code = FaultCode::F0_NONE;
    std::string reason;
};

// Per-subject dynamic beliefs for one session. Within a session the only
// veracity moves are Undetermined->True, Undetermined->False and
// True->False; False never recovers. Every move is logged.
class BeliefStore {
public:
    // Creates an Undetermined entry for `subject`; idempotent.
    void plan(const std::string& subject);

    bool has(const std::string& subject) const;
    // Throws "unknown-subject" when the subject was never planned.
    const DynamicBelief& belief(const std::string& subject) const;

    // Applies one test outcome. Pass raises Undetermined to True while the
    // subject has no recorded failure; Fail condemns the subject and pins
    // the first failing fault code. Throws "unknown-subject".
    const DynamicBelief& update_veracity(const std::string& subject, FaultCode code,
                                         Outcome outcome, LogicalTime time,
                                         const std::string& reason);

    // Beliefs sorted by subject name (canonical snapshot order).
    std::vector<DynamicBelief> snapshot() const;
    std::vector<std::string> subjects() const;
    const std::vector<BeliefTransition>& transitions() const { return transitions_; }

private:
    std::map<std::string, DynamicBelief> beliefs_;
    std::vector<BeliefTransition> transitions_;
};

}  // namespace fbdiag
