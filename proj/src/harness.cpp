#include "fbdiag/harness.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fbdiag/xml.hpp"

namespace fbdiag {

Gate DiagnosticPoint::gate() const {
    std::lock_guard lock(mutex_);
    return gate_;
}

void DiagnosticPoint::set_gate(Gate g) {
    std::lock_guard lock(mutex_);
    gate_ = g;
}

std::vector<CaptureRecord> DiagnosticPoint::read() {
    std::lock_guard lock(mutex_);
    std::vector<CaptureRecord> out(log_.begin(), log_.end());
    log_.clear();
    return out;
}

bool DiagnosticPoint::on_cross(const TraceEvent& crossing) {
    std::lock_guard lock(mutex_);
    log_.push_back({crossing, false});
    return gate_ == Gate::Open;
}

bool DiagnosticPoint::forwarding() const {
    std::lock_guard lock(mutex_);
    return gate_ == Gate::Open;
}

void DiagnosticPoint::on_injected(const TraceEvent& crossing) {
    std::lock_guard lock(mutex_);
    log_.push_back({crossing, true});
}

DiagnosticPoint& Harness::rewire(const PortRef& source, const PortRef& destination, int dp_id) {
    auto index = rt_->application().connection_index(source, destination);
    if (!index)
        throw OperationError("unknown-connection", source.to_string() + " -> " +
                                                       destination.to_string() +
                                                       " is not a connection of this application");
    const Connection& conn = rt_->application().connections[*index];
    if (conn.kind == ConnectionKind::Data) return rewire_pathway(*index, std::nullopt, dp_id);
    return rewire_pathway(std::nullopt, *index, dp_id);
}

DiagnosticPoint& Harness::rewire_pathway(std::optional<std::size_t> data_connection,
                                         std::optional<std::size_t> event_connection, int dp_id) {
    if (!data_connection && !event_connection)
        throw OperationError("unknown-connection", "diagnostic point needs a connection");
    if (points_.count(dp_id))
        throw OperationError("already-instrumented",
                             "DP" + std::to_string(dp_id) + " already installed");
    auto dp = std::make_shared<DiagnosticPoint>(dp_id, data_connection, event_connection);
    if (data_connection) rt_->install_tap(*data_connection, dp);
    if (event_connection) rt_->install_tap(*event_connection, dp);
    auto [it, _] = points_.emplace(dp_id, std::move(dp));
    return *it->second;
}

DiagnosticPoint& Harness::dp(int dp_id) {
    auto it = points_.find(dp_id);
    if (it == points_.end())
        throw OperationError("unknown-dp", "no diagnostic point DP" + std::to_string(dp_id));
    return *it->second;
}

const DiagnosticPoint* Harness::find(int dp_id) const {
    auto it = points_.find(dp_id);
    return it == points_.end() ? nullptr : it->second.get();
}

std::vector<int> Harness::dp_ids() const {
    std::vector<int> out;
    for (const auto& [id, _] : points_) out.push_back(id);
    return out;
}

void Harness::gate_close(int dp_id) { dp(dp_id).set_gate(Gate::Closed); }

void Harness::gate_open(int dp_id) { dp(dp_id).set_gate(Gate::Open); }

void Harness::trigger(int dp_id, std::optional<Value> value, bool fire_event, LogicalTime at) {
    auto it = points_.find(dp_id);
    if (it == points_.end())
        throw OperationError("unknown-dp", "no diagnostic point DP" + std::to_string(dp_id));
    DiagnosticPoint& point = *it->second;

    if (value && !point.data_connection())
        throw OperationError("no-data-pathway", "DP" + std::to_string(dp_id) +
                                                    " instruments no data connection");
    if (fire_event && !point.event_connection())
        throw OperationError("no-event-pathway", "DP" + std::to_string(dp_id) +
                                                     " instruments no event connection");
    if (!value && !fire_event)
        throw OperationError("no-data-pathway",
                             "trigger needs a value, an event, or both");
    if (value) {
        const Connection& conn = rt_->application().connections[*point.data_connection()];
        const DataPort* input = rt_->application()
                                    .type_of(conn.destination.instance)
                                    ->data_input(conn.destination.port);
        if (input && data_type_of(*value) != input->type)
            throw OperationError("type-mismatch",
                                 "DP" + std::to_string(dp_id) + " carries " +
                                     data_type_name(input->type) + ", got " +
                                     data_type_name(data_type_of(*value)));
    }

    InjectionSpec spec;
    spec.data_connection = point.data_connection();
    spec.value = std::move(value);
    spec.event_connection = point.event_connection();
    spec.fire_event = fire_event;
    spec.reporter = it->second;
    rt_->schedule_injection(std::move(spec), at);
}

std::vector<CaptureRecord> Harness::read(int dp_id) { return dp(dp_id).read(); }

namespace {

Value parse_test_value(const xml::Node& node, const std::string& literal) {
    DataType t = DataType::Real;
    if (const std::string* type_name = node.find_attribute("ValueType")) {
        auto parsed = data_type_from_name(*type_name);
        if (!parsed)
            throw ParseError("unknown data type '" + *type_name + "'", node.line, node.name);
        t = *parsed;
    }
    return value_from_text(t, literal);
}

}  // namespace

DiagnosticPackage load_package(const std::string& xml_text) {
    xml::Node root = xml::parse_document(xml_text);
    if (root.name != "DiagnosticPackage")
        throw ParseError("expected root element <DiagnosticPackage>, got <" + root.name + ">",
                         root.line);
    root.reject_unknown_attributes({"FbType"});
    root.reject_unknown_children({"DP", "Test"});

    DiagnosticPackage pkg;
    pkg.fb_type_name = root.required("FbType");

    for (const auto* dp : root.children_named("DP")) {
        dp->reject_unknown_attributes({"Id", "DataPort", "EventPort"});
        dp->reject_unknown_children({});
        DiagnosticPackage::Pathway pathway;
        pathway.dp_id = static_cast<int>(
            std::get<std::int64_t>(value_from_text(DataType::Int, dp->required("Id"))));
        if (const std::string* port = dp->find_attribute("DataPort")) pathway.data_port = *port;
        if (const std::string* port = dp->find_attribute("EventPort")) pathway.event_port = *port;
        if (!pathway.data_port && !pathway.event_port)
            throw ParseError("DP declares neither DataPort nor EventPort", dp->line, "DP");
        pkg.dp_plan.push_back(std::move(pathway));
    }

    for (const auto* test : root.children_named("Test")) {
        test->reject_unknown_attributes({"Name", "InjectAt", "Value", "ValueType", "FireEvent",
                                         "ExpectAt", "ExpectValue", "Tolerance", "ExpectEvent",
                                         "ExpectNoOutputMs"});
        test->reject_unknown_children({});
        TestCase tc;
        tc.name = test->required("Name");
        tc.inject_at = static_cast<int>(
            std::get<std::int64_t>(value_from_text(DataType::Int, test->required("InjectAt"))));
        tc.expect_at = static_cast<int>(
            std::get<std::int64_t>(value_from_text(DataType::Int, test->required("ExpectAt"))));
        if (const std::string* literal = test->find_attribute("Value"))
            tc.value = parse_test_value(*test, *literal);
        if (const std::string* fire = test->find_attribute("FireEvent"))
            tc.fire_event = std::get<bool>(value_from_text(DataType::Bool, *fire));

        int expectations = 0;
        if (const std::string* expected = test->find_attribute("ExpectValue")) {
            ++expectations;
            double tolerance = 1e-9;
            if (const std::string* tol = test->find_attribute("Tolerance"))
                tolerance = std::get<double>(value_from_text(DataType::Real, *tol));
            tc.expect_value = TestCase::ValueExpectation{
                std::get<double>(value_from_text(DataType::Real, *expected)), tolerance};
        }
        if (const std::string* port = test->find_attribute("ExpectEvent")) {
            ++expectations;
            tc.expect_event = TestCase::EventExpectation{*port};
        }
        if (const std::string* within = test->find_attribute("ExpectNoOutputMs")) {
            ++expectations;
            tc.expect_no_output = TestCase::NoOutputExpectation{
                std::get<std::int64_t>(value_from_text(DataType::Int, *within))};
        }
        if (expectations != 1)
            throw ParseError("test '" + tc.name +
                                 "' needs exactly one of ExpectValue/ExpectEvent/ExpectNoOutputMs",
                             test->line, "Test");
        pkg.tests.push_back(std::move(tc));
    }

    std::vector<ValidationIssue> issues;
    std::set<int> declared;
    for (const auto& pathway : pkg.dp_plan) {
        if (!declared.insert(pathway.dp_id).second)
            issues.push_back({"duplicate-dp", pkg.fb_type_name, "",
                              "DP" + std::to_string(pathway.dp_id) + " declared twice"});
    }
    if (pkg.tests.empty())
        issues.push_back(
            {"empty-tests", pkg.fb_type_name, "", "at least one pathway test is required"});
    std::set<int> referenced;
    for (const auto& tc : pkg.tests) {
        for (int id : {tc.inject_at, tc.expect_at}) {
            referenced.insert(id);
            if (!declared.count(id))
                issues.push_back({"undeclared-dp", pkg.fb_type_name, tc.name,
                                  "test references DP" + std::to_string(id) +
                                      " which is not in the dp plan"});
        }
    }
    for (const auto& pathway : pkg.dp_plan) {
        if (pathway.data_port && !referenced.count(pathway.dp_id))
            issues.push_back({"untested-pathway", pkg.fb_type_name, *pathway.data_port,
                              "data pathway DP" + std::to_string(pathway.dp_id) +
                                  " has no test referencing it"});
    }
    if (!issues.empty()) throw ValidationFailure(std::move(issues));
    return pkg;
}

std::string to_xml(const DiagnosticPackage& package) {
    std::ostringstream out;
    out << "<DiagnosticPackage FbType=\"" << xml::escape(package.fb_type_name) << "\">\n";
    for (const auto& pathway : package.dp_plan) {
        out << "  <DP Id=\"" << pathway.dp_id << "\"";
        if (pathway.data_port) out << " DataPort=\"" << xml::escape(*pathway.data_port) << "\"";
        if (pathway.event_port) out << " EventPort=\"" << xml::escape(*pathway.event_port) << "\"";
        out << "/>\n";
    }
    for (const auto& tc : package.tests) {
        out << "  <Test Name=\"" << xml::escape(tc.name) << "\" InjectAt=\"" << tc.inject_at
            << "\"";
        if (tc.value) {
            out << " Value=\"" << xml::escape(value_to_exact_text(*tc.value)) << "\"";
            if (data_type_of(*tc.value) != DataType::Real)
                out << " ValueType=\"" << data_type_name(data_type_of(*tc.value)) << "\"";
        }
        if (!tc.fire_event) out << " FireEvent=\"false\"";
        out << " ExpectAt=\"" << tc.expect_at << "\"";
        if (tc.expect_value) {
            out << " ExpectValue=\"" << value_to_exact_text(Value{tc.expect_value->expected}) << "\""
                << " Tolerance=\"" << value_to_exact_text(Value{tc.expect_value->tolerance}) << "\"";
        }
        if (tc.expect_event) out << " ExpectEvent=\"" << xml::escape(tc.expect_event->port) << "\"";
        if (tc.expect_no_output) out << " ExpectNoOutputMs=\"" << tc.expect_no_output->within_ms << "\"";
        out << "/>\n";
    }
    out << "</DiagnosticPackage>\n";
    return out.str();
}

namespace {

struct ResolvedPathway {
    std::optional<std::size_t> data_connection;
    std::optional<std::size_t> event_connection;
};

// Finds the unique connection attached to (instance, port); `port` may
// sit on either side. Throws when absent or ambiguous.
std::size_t resolve_connection(const Application& app, const std::string& instance,
                               const std::string& port, ConnectionKind kind) {
    PortRef ref{instance, port};
    std::vector<std::size_t> matches;
    for (std::size_t i = 0; i < app.connections.size(); ++i) {
        const Connection& conn = app.connections[i];
        if (conn.kind != kind) continue;
        if (conn.source == ref || conn.destination == ref) matches.push_back(i);
    }
    if (matches.empty())
        throw OperationError("unknown-connection", ref.to_string() + " has no " +
                                                       (kind == ConnectionKind::Data ? "data"
                                                                                     : "event") +
                                                       " connection to instrument");
    if (matches.size() > 1)
        throw OperationError("ambiguous-pathway",
                             ref.to_string() + " fans out; instrumentation plan is ambiguous");
    return matches[0];
}

}  // namespace

std::vector<int> install_packages(Harness& harness, const Application& app,
                                  const std::vector<DiagnosticPackage>& packages) {
    std::map<int, ResolvedPathway> plan;

    for (const auto& pkg : packages) {
        for (const auto& inst : app.instances) {
            if (inst.type_name != pkg.fb_type_name) continue;
            const FbType& type = app.type_library.at(inst.type_name);
            for (const auto& pathway : pkg.dp_plan) {
                ResolvedPathway resolved;
                if (pathway.data_port) {
                    auto kind = type.port_kind(*pathway.data_port);
                    if (!kind || is_event(*kind))
                        throw OperationError("kind-mismatch",
                                             inst.name + "." + *pathway.data_port +
                                                 " is not a data port");
                    resolved.data_connection =
                        resolve_connection(app, inst.name, *pathway.data_port,
                                           ConnectionKind::Data);
                }
                if (pathway.event_port) {
                    auto kind = type.port_kind(*pathway.event_port);
                    if (!kind || !is_event(*kind))
                        throw OperationError("kind-mismatch",
                                             inst.name + "." + *pathway.event_port +
                                                 " is not an event port");
                    resolved.event_connection =
                        resolve_connection(app, inst.name, *pathway.event_port,
                                           ConnectionKind::Event);
                }

                auto [it, inserted] = plan.emplace(pathway.dp_id, resolved);
                if (!inserted) {
                    ResolvedPathway& existing = it->second;
                    auto merge = [&](std::optional<std::size_t>& mine,
                                     const std::optional<std::size_t>& theirs) {
                        if (!theirs) return;
                        if (mine && *mine != *theirs)
                            throw OperationError(
                                "dp-conflict",
                                "DP" + std::to_string(pathway.dp_id) +
                                    " resolves to different connections from different plans");
                        mine = theirs;
                    };
                    merge(existing.data_connection, resolved.data_connection);
                    merge(existing.event_connection, resolved.event_connection);
                }
            }
        }
    }

    std::vector<int> installed;
    for (const auto& [id, resolved] : plan) {
        harness.rewire_pathway(resolved.data_connection, resolved.event_connection, id);
        installed.push_back(id);
    }
    return installed;
}

}  // namespace fbdiag
