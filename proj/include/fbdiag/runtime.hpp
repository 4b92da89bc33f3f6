#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fbdiag/model.hpp"

namespace fbdiag {

// One port crossing or emission. Payload present iff the port is a data
// port. Canonical line: time_ms<TAB>instance.port[<TAB>payload].
struct TraceEvent {
    LogicalTime time = 0;
    std::string instance;
    std::string port;
    std::optional<Value> payload;

    std::string to_line() const;
    bool operator==(const TraceEvent&) const = default;
};

struct BehaviorContext {
    const std::string& instance;
    const std::string& event;  // event input that fired ("" for source ticks)
    LogicalTime now;
    const std::map<std::string, Value>& inputs;  // latched data inputs
    std::map<std::string, Value>& state;         // private per-instance scratch
    std::mt19937_64& rng;
};

struct SourceContext {
    const std::string& instance;
    LogicalTime now;
    std::map<std::string, Value>& state;
    std::mt19937_64& rng;
};

// What one invocation emits. Outputs are written (and traced) in list
// order, then events fire in list order; all at the current instant.
struct BehaviorResult {
    std::vector<std::pair<std::string, Value>> outputs;
    std::vector<std::string> events;
};

using BehaviorFn = std::function<BehaviorResult(const BehaviorContext&)>;
using SourceFn = std::function<BehaviorResult(const SourceContext&)>;

// behavior_key -> executable behavior. Types with a source period also
// need a source function under the same key.
class BehaviorRegistry {
public:
    void add_behavior(const std::string& key, BehaviorFn fn) { behaviors_[key] = std::move(fn); }
    void add_source(const std::string& key, SourceFn fn) { sources_[key] = std::move(fn); }

    bool has_behavior(const std::string& key) const { return behaviors_.count(key) != 0; }
    bool has_source(const std::string& key) const { return sources_.count(key) != 0; }
    const BehaviorFn* behavior(const std::string& key) const;
    const SourceFn* source(const std::string& key) const;

    // Wraps the existing entry; used to overlay fault effects.
    void wrap_behavior(const std::string& key,
                       std::function<BehaviorFn(BehaviorFn)> make_wrapper);
    void wrap_source(const std::string& key, std::function<SourceFn(SourceFn)> make_wrapper);

private:
    std::map<std::string, BehaviorFn> behaviors_;
    std::map<std::string, SourceFn> sources_;
};

// Interception point for one instrumented connection. A value enters a
// data connection when its source output is written; it leaves when a
// destination event pulls it. Capture happens on entry, gating on exit.
struct ConnectionTap {
    virtual ~ConnectionTap() = default;
    // Called once per crossing entering the connection: event crossings at
    // fan-out (returning false drops the delivery), data crossings at
    // emission (the return value is ignored; see forwarding()).
    virtual bool on_cross(const TraceEvent& crossing) = 0;
    // Consulted when a data value is about to leave the connection into
    // the destination latch; false blocks the transfer.
    virtual bool forwarding() const = 0;
    // Called when a synthetic crossing is delivered downstream of the tap.
    virtual void on_injected(const TraceEvent& crossing) = 0;
};

// A synthetic delivery downstream of an instrumented connection: a value
// written to the data connection's destination latch, an event fired at
// the event connection's destination, or both as one pathway crossing.
struct InjectionSpec {
    std::optional<std::size_t> data_connection;
    std::optional<Value> value;
    std::optional<std::size_t> event_connection;
    bool fire_event = false;
    std::shared_ptr<ConnectionTap> reporter;
};

// Deterministic discrete-event executor over one application.
//
// Semantics: logical millisecond clock; pending work ordered by
// (time, sequence); zero-delay propagation; event fan-out in connection
// declaration order; data inputs latch when an event input of their
// instance fires (the latch then holds the most recent upstream emission
// at or before that instant); one RNG consumed in processing order.
class Runtime {
public:
    Runtime(Application app, const BehaviorRegistry& registry, std::uint64_t seed);

    LogicalTime now() const { return now_; }
    const Application& application() const { return app_; }

    // Schedules an event at `at` (>= now). EventOutput ports emit and fan
    // out; EventInput ports fire the owning behavior directly.
    void inject_event(const PortRef& port, LogicalTime at);

    // Writes a latch immediately: output latches propagate with the next
    // associated event; input latches feed the next firing directly.
    void set_data(const PortRef& port, Value value);

    // Processes all pending work with time <= t; returns the trace slice
    // appended by this call. The clock never moves backwards.
    std::vector<TraceEvent> run_until(LogicalTime t);

    const std::vector<TraceEvent>& trace() const { return trace_; }
    std::string trace_text() const;  // canonical, one line per record

    std::mt19937_64& rng() { return rng_; }

    // --- instrumentation surface -----------------------------------
    void install_tap(std::size_t connection_index, std::shared_ptr<ConnectionTap> tap);
    bool has_tap(std::size_t connection_index) const;
    void schedule_injection(InjectionSpec spec, LogicalTime at);

    // Reads the current value of a latch (testing/diagnostic aid).
    std::optional<Value> input_latch(const PortRef& port) const;
    std::optional<Value> output_latch(const PortRef& port) const;

private:
    struct Instance {
        const FbInstance* decl = nullptr;
        const FbType* type = nullptr;
        std::map<std::string, Value> input_latch;
        std::map<std::string, Value> output_latch;
        std::map<std::string, Value> state;
    };

    struct Item {
        enum class Kind { SourceTick, EmitEvent, DeliverEvent, DeliverInjection };
        LogicalTime time = 0;
        std::uint64_t seq = 0;
        Kind kind = Kind::SourceTick;
        std::size_t instance = 0;  // SourceTick / EmitEvent / direct DeliverEvent
        std::string port;          // EmitEvent output port or DeliverEvent input port
        InjectionSpec injection;   // DeliverInjection only
    };
    struct ItemAfter {
        bool operator()(const Item& a, const Item& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::size_t instance_index(const std::string& name) const;
    void enqueue(Item item);
    void process(const Item& item);
    void record(TraceEvent ev) { trace_.push_back(std::move(ev)); }
    void emit_event_output(std::size_t inst, const std::string& port);
    void deliver_event_input(std::size_t inst, const std::string& port,
                             const InjectionSpec* override_spec);
    void apply_result(std::size_t inst, const BehaviorResult& result);
    void deliver_injection(const InjectionSpec& spec);

    Application app_;
    const BehaviorRegistry& registry_;
    std::mt19937_64 rng_;
    LogicalTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::vector<Instance> instances_;
    std::map<std::string, std::size_t> instance_by_name_;
    // (instance, event output port) -> event connection indices, in order
    std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> event_fanout_;
    // (instance, data output port) -> outgoing data connection indices
    std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> data_fanout_;
    // (instance, data input port) -> driving data connection index
    std::map<std::pair<std::size_t, std::string>, std::size_t> data_driver_;
    std::map<std::size_t, std::shared_ptr<ConnectionTap>> taps_;
    std::priority_queue<Item, std::vector<Item>, ItemAfter> queue_;
    std::vector<TraceEvent> trace_;
};

}  // namespace fbdiag
