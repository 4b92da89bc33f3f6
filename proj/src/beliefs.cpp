#include "fbdiag/beliefs.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace fbdiag {

std::string veracity_name(Veracity v) {
    switch (v) {
        case Veracity::True: return "True";
        case Veracity::False: return "False";
        case Veracity::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::optional<Veracity> veracity_from_name(const std::string& name) {
    if (name == "True") return Veracity::True;
    if (name == "False") return Veracity::False;
    if (name == "Undetermined") return Veracity::Undetermined;
    return std::nullopt;
}

std::string fault_code_name(FaultCode f) {
    switch (f) {
        case FaultCode::F0_NONE: return "F0_NONE";
        case FaultCode::F1_ALGORITHM: return "F1_ALGORITHM";
        case FaultCode::F2_NO_RESPONSE: return "F2_NO_RESPONSE";
        case FaultCode::F3_OUT_OF_TOLERANCE: return "F3_OUT_OF_TOLERANCE";
        case FaultCode::F4_SENSOR_SUSPECTED: return "F4_SENSOR_SUSPECTED";
        case FaultCode::F5_EVENT_PATH_BROKEN: return "F5_EVENT_PATH_BROKEN";
    }
    return "F0_NONE";
}

std::optional<FaultCode> fault_code_from_name(const std::string& name) {
    for (FaultCode f : {FaultCode::F0_NONE, FaultCode::F1_ALGORITHM, FaultCode::F2_NO_RESPONSE,
                        FaultCode::F3_OUT_OF_TOLERANCE, FaultCode::F4_SENSOR_SUSPECTED,
                        FaultCode::F5_EVENT_PATH_BROKEN}) {
        if (fault_code_name(f) == name) return f;
    }
    return std::nullopt;
}

std::vector<InteractionBelief> default_skills(const std::string& agent_name) {
    std::vector<InteractionBelief> skills;
    for (const char* signature :
         {"say(recipient,message)", "hear()", "rewire(connection,dp_id)", "gate_close(dp_id)",
          "gate_open(dp_id)", "trigger(dp_id,value,fire_event,at)", "read(dp_id)"}) {
        skills.push_back({agent_name, signature, Veracity::True});
    }
    return skills;
}

SystemBeliefGraph graph_from_application(const Application& app) {
    SystemBeliefGraph g;
    for (const auto& inst : app.instances) {
        NodeInfo info;
        info.name = inst.name;
        info.type = app.type_library.at(inst.type_name);
        info.parameters = inst.parameters;
        g.nodes.emplace(inst.name, std::move(info));
    }
    for (const auto& conn : app.connections) {
        SystemBelief edge;
        edge.fb1 = conn.source.instance;
        edge.trg = TriggerCondition{conn.source.port, conn.kind, std::nullopt};
        edge.fb2 = conn.destination.instance;
        g.edges.push_back(std::move(edge));
    }
    return g;
}

void annotate_dp(SystemBeliefGraph& g, const Application& app, int dp_id,
                 std::size_t connection) {
    const Connection& conn = app.connections.at(connection);
    for (const std::string& endpoint : {conn.source.instance, conn.destination.instance}) {
        auto it = g.nodes.find(endpoint);
        if (it == g.nodes.end())
            throw OperationError("unknown-node", endpoint + " is not in the belief graph");
        auto& dps = it->second.installed_dps;
        auto pos = std::lower_bound(dps.begin(), dps.end(), dp_id);
        if (pos == dps.end() || *pos != dp_id) dps.insert(pos, dp_id);
    }
}

namespace {

void require_node(const SystemBeliefGraph& g, const std::string& fb) {
    if (!g.nodes.count(fb))
        throw OperationError("unknown-node", fb + " is not in the belief graph");
}

}  // namespace

std::vector<SystemBelief> downstream(const SystemBeliefGraph& g, const std::string& fb) {
    require_node(g, fb);
    std::vector<SystemBelief> out;
    for (const auto& edge : g.edges)
        if (edge.fb1 == fb) out.push_back(edge);
    return out;
}

std::vector<SystemBelief> upstream(const SystemBeliefGraph& g, const std::string& fb) {
    require_node(g, fb);
    std::vector<SystemBelief> out;
    for (const auto& edge : g.edges)
        if (edge.fb2 == fb) out.push_back(edge);
    return out;
}

std::optional<std::vector<std::string>> data_path(const SystemBeliefGraph& g,
                                                  const std::string& from,
                                                  const std::string& to) {
    require_node(g, from);
    require_node(g, to);
    if (from == to) return std::vector<std::string>{from};

    // Breadth-first along data edges; neighbors visited in name order so
    // equal-length paths resolve the same way everywhere.
    std::map<std::string, std::set<std::string>> next;
    for (const auto& edge : g.edges)
        if (edge.trg.kind == ConnectionKind::Data) next[edge.fb1].insert(edge.fb2);

    std::map<std::string, std::string> parent;
    std::deque<std::string> frontier{from};
    parent[from] = from;
    while (!frontier.empty()) {
        std::string node = frontier.front();
        frontier.pop_front();
        for (const auto& neighbor : next[node]) {
            if (parent.count(neighbor)) continue;
            parent[neighbor] = node;
            if (neighbor == to) {
                std::vector<std::string> path{to};
                for (std::string hop = node; hop != from; hop = parent[hop]) path.push_back(hop);
                path.push_back(from);
                std::reverse(path.begin(), path.end());
                return path;
            }
            frontier.push_back(neighbor);
        }
    }
    return std::nullopt;
}

SystemBelief* find_edge(SystemBeliefGraph& g, const PortRef& source,
                        const std::string& dst_instance) {
    for (auto& edge : g.edges) {
        if (edge.fb1 == source.instance && edge.trg.output == source.port &&
            edge.fb2 == dst_instance)
            return &edge;
    }
    return nullptr;
}

void BeliefStore::plan(const std::string& subject) {
    beliefs_.emplace(subject, DynamicBelief{subject});
}

bool BeliefStore::has(const std::string& subject) const { return beliefs_.count(subject) > 0; }

const DynamicBelief& BeliefStore::belief(const std::string& subject) const {
    auto it = beliefs_.find(subject);
    if (it == beliefs_.end())
        throw OperationError("unknown-subject", "no belief planned for " + subject);
    return it->second;
}

const DynamicBelief& BeliefStore::update_veracity(const std::string& subject, FaultCode code,
                                                  Outcome outcome, LogicalTime time,
                                                  const std::string& reason) {
    auto it = beliefs_.find(subject);
    if (it == beliefs_.end())
        throw OperationError("unknown-subject", "no belief planned for " + subject);
    DynamicBelief& b = it->second;
    Veracity before = b.veracity;

    if (outcome == Outcome::Pass) {
        ++b.pass_count;
        if (b.fail_count == 0 && b.veracity == Veracity::Undetermined)
            b.veracity = Veracity::True;
    } else {
        ++b.fail_count;
        if (b.fail_count == 1) b.fault_code = code;
        b.veracity = Veracity::False;
    }

    if (b.veracity != before)
        transitions_.push_back({time, subject, before, b.veracity, b.fault_code, reason});
    return b;
}

std::vector<DynamicBelief> BeliefStore::snapshot() const {
    std::vector<DynamicBelief> out;
    for (const auto& [_, b] : beliefs_) out.push_back(b);
    return out;  // map iteration is already subject-sorted
}

std::vector<std::string> BeliefStore::subjects() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : beliefs_) out.push_back(name);
    return out;
}

}  // namespace fbdiag
