#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fbdiag/runtime.hpp"

namespace fbdiag {

enum class Gate { Open, Closed };

// One observed or injected crossing at a diagnostic point. Line format is
// the runtime trace format plus a flag column: "I" injected, "-" observed.
struct CaptureRecord {
    TraceEvent event;
    bool injected = false;

    std::string to_line() const { return event.to_line() + "\t" + (injected ? "I" : "-"); }
};

// A lightweight instrument spliced into one connection, or into a data
// connection together with its paired event connection (one pathway).
// While the gate is Closed deliveries are dropped; capture continues
// either way, and injected crossings always reach the destination.
class DiagnosticPoint : public ConnectionTap {
public:
    DiagnosticPoint(int id, std::optional<std::size_t> data_connection,
                    std::optional<std::size_t> event_connection)
        : id_(id), data_connection_(data_connection), event_connection_(event_connection) {}

    int id() const { return id_; }
    std::optional<std::size_t> data_connection() const { return data_connection_; }
    std::optional<std::size_t> event_connection() const { return event_connection_; }

    Gate gate() const;
    void set_gate(Gate g);

    // Drains and returns everything captured since the previous read.
    std::vector<CaptureRecord> read();

    bool on_cross(const TraceEvent& crossing) override;
    bool forwarding() const override;
    void on_injected(const TraceEvent& crossing) override;

private:
    const int id_;
    const std::optional<std::size_t> data_connection_;
    const std::optional<std::size_t> event_connection_;
    mutable std::mutex mutex_;  // capture log: one producer, one consumer
    Gate gate_ = Gate::Open;
    std::deque<CaptureRecord> log_;
};

// Test stimulus/expectation pair: inject a value and/or event downstream
// of one DP, expect a response at another within the time budget.
struct TestCase {
    struct ValueExpectation {
        double expected;
        double tolerance;
    };
    struct EventExpectation {
        std::string port;
    };
    struct NoOutputExpectation {
        LogicalTime within_ms;
    };

    std::string name;
    int inject_at = 0;  // DP id
    std::optional<Value> value;
    bool fire_event = true;
    int expect_at = 0;  // DP id
    std::optional<ValueExpectation> expect_value;
    std::optional<EventExpectation> expect_event;
    std::optional<NoOutputExpectation> expect_no_output;
};

// Per-type instrumentation plan plus the tests that exercise it. Pathway
// ports are the *owning type's* port names; resolution to connections
// happens per instance at install time.
struct DiagnosticPackage {
    struct Pathway {
        int dp_id = 0;
        std::optional<std::string> data_port;   // own data input or output
        std::optional<std::string> event_port;  // own event input or output
    };

    std::string fb_type_name;
    std::vector<Pathway> dp_plan;
    std::vector<TestCase> tests;
};

// Reads one .dpkg.xml document. Throws ParseError on syntax and
// ValidationFailure when tests reference undeclared DPs, a declared data
// pathway has no test, or the test list is empty.
DiagnosticPackage load_package(const std::string& xml_text);
std::string to_xml(const DiagnosticPackage& package);

// Owns the diagnostic points installed into one runtime.
class Harness {
public:
    explicit Harness(Runtime& rt) : rt_(&rt) {}

    // Splices a DP into one connection (identified by endpoints), or into
    // a data connection plus its paired event connection. Throws
    // "unknown-connection" when no such connection exists and
    // "already-instrumented" when the connection already has a DP.
    DiagnosticPoint& rewire(const PortRef& source, const PortRef& destination, int dp_id);
    DiagnosticPoint& rewire_pathway(std::optional<std::size_t> data_connection,
                                    std::optional<std::size_t> event_connection, int dp_id);

    void gate_close(int dp_id);
    void gate_open(int dp_id);

    // Schedules a synthetic crossing downstream of the DP at `at`:
    // the value is written through the data connection, and the paired
    // event (when `fire_event`) fires the destination. Gate-independent.
    void trigger(int dp_id, std::optional<Value> value, bool fire_event, LogicalTime at);

    std::vector<CaptureRecord> read(int dp_id);

    DiagnosticPoint& dp(int dp_id);
    const DiagnosticPoint* find(int dp_id) const;
    std::vector<int> dp_ids() const;
    Runtime& runtime() { return *rt_; }

private:
    Runtime* rt_;
    std::map<int, std::shared_ptr<DiagnosticPoint>> points_;
};

// Resolves every package's dp_plan against the application's instances
// and installs the union of pathways. The same DP id claimed from both
// sides of one connection (producer's output plan, consumer's input plan)
// resolves to a single instrument; conflicting claims throw.
// Returns the installed ids in ascending order.
std::vector<int> install_packages(Harness& harness, const Application& app,
                                  const std::vector<DiagnosticPackage>& packages);

}  // namespace fbdiag
