#include "fbdiag/runtime.hpp"

#include <sstream>

namespace fbdiag {

std::string TraceEvent::to_line() const {
    std::string line = std::to_string(time) + "\t" + instance + "." + port;
    if (payload) line += "\t" + value_to_text(*payload);
    return line;
}

const BehaviorFn* BehaviorRegistry::behavior(const std::string& key) const {
    auto it = behaviors_.find(key);
    return it == behaviors_.end() ? nullptr : &it->second;
}

const SourceFn* BehaviorRegistry::source(const std::string& key) const {
    auto it = sources_.find(key);
    return it == sources_.end() ? nullptr : &it->second;
}

void BehaviorRegistry::wrap_behavior(const std::string& key,
                                     std::function<BehaviorFn(BehaviorFn)> make_wrapper) {
    auto it = behaviors_.find(key);
    if (it == behaviors_.end())
        throw OperationError("missing-behavior", "no behavior registered under '" + key + "'");
    it->second = make_wrapper(std::move(it->second));
}

void BehaviorRegistry::wrap_source(const std::string& key,
                                   std::function<SourceFn(SourceFn)> make_wrapper) {
    auto it = sources_.find(key);
    if (it == sources_.end())
        throw OperationError("missing-behavior", "no source registered under '" + key + "'");
    it->second = make_wrapper(std::move(it->second));
}

Runtime::Runtime(Application app, const BehaviorRegistry& registry, std::uint64_t seed)
    : app_(std::move(app)), registry_(registry), rng_(seed) {
    auto issues = validate(app_);
    if (!issues.empty()) throw ValidationFailure(std::move(issues));

    instances_.reserve(app_.instances.size());
    for (const auto& decl : app_.instances) {
        Instance inst;
        inst.decl = &decl;
        inst.type = &app_.type_library.at(decl.type_name);
        inst.input_latch = decl.parameters;
        instance_by_name_[decl.name] = instances_.size();
        instances_.push_back(std::move(inst));

        const FbType& type = *instances_.back().type;
        if (!registry_.has_behavior(type.behavior_key))
            throw OperationError("missing-behavior", "type '" + type.name +
                                                         "' wants behavior key '" +
                                                         type.behavior_key + "'");
        if (type.source_period_ms && !registry_.has_source(type.behavior_key))
            throw OperationError("missing-behavior", "periodic type '" + type.name +
                                                         "' wants a source under key '" +
                                                         type.behavior_key + "'");
    }

    for (std::size_t ci = 0; ci < app_.connections.size(); ++ci) {
        const Connection& conn = app_.connections[ci];
        std::size_t src = instance_by_name_.at(conn.source.instance);
        std::size_t dst = instance_by_name_.at(conn.destination.instance);
        if (conn.kind == ConnectionKind::Event) {
            event_fanout_[{src, conn.source.port}].push_back(ci);
        } else {
            data_fanout_[{src, conn.source.port}].push_back(ci);
            data_driver_[{dst, conn.destination.port}] = ci;
        }
    }

    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (instances_[i].type->source_period_ms) {
            enqueue({*instances_[i].type->source_period_ms, 0, Item::Kind::SourceTick, i, {}, {}});
        }
    }
}

std::size_t Runtime::instance_index(const std::string& name) const {
    auto it = instance_by_name_.find(name);
    if (it == instance_by_name_.end())
        throw OperationError("unknown-port", "no instance named '" + name + "'");
    return it->second;
}

void Runtime::enqueue(Item item) {
    item.seq = next_seq_++;
    queue_.push(std::move(item));
}

void Runtime::inject_event(const PortRef& port, LogicalTime at) {
    if (at < now_)
        throw OperationError("time-in-past", "inject at t=" + std::to_string(at) +
                                                 " but clock is at " + std::to_string(now_));
    std::size_t idx = instance_index(port.instance);
    auto kind = instances_[idx].type->port_kind(port.port);
    if (!kind || !is_event(*kind))
        throw OperationError("unknown-port",
                             "'" + port.to_string() + "' is not an event port");
    Item item;
    item.time = at;
    item.kind = (*kind == PortKind::EventOutput) ? Item::Kind::EmitEvent
                                                 : Item::Kind::DeliverEvent;
    item.instance = idx;
    item.port = port.port;
    enqueue(std::move(item));
}

void Runtime::set_data(const PortRef& port, Value value) {
    std::size_t idx = instance_index(port.instance);
    Instance& inst = instances_[idx];
    auto kind = inst.type->port_kind(port.port);
    if (!kind || is_event(*kind))
        throw OperationError("unknown-port", "'" + port.to_string() + "' is not a data port");
    const DataPort* decl = (*kind == PortKind::DataOutput) ? inst.type->data_output(port.port)
                                                           : inst.type->data_input(port.port);
    if (data_type_of(value) != decl->type)
        throw OperationError("type-mismatch", "'" + port.to_string() + "' wants " +
                                                  data_type_name(decl->type) + ", got " +
                                                  data_type_name(data_type_of(value)));
    auto& latch = (*kind == PortKind::DataOutput) ? inst.output_latch : inst.input_latch;
    latch[port.port] = std::move(value);
}

std::vector<TraceEvent> Runtime::run_until(LogicalTime t) {
    std::size_t before = trace_.size();
    while (!queue_.empty() && queue_.top().time <= t) {
        Item item = queue_.top();
        queue_.pop();
        now_ = item.time;
        process(item);
    }
    if (t > now_) now_ = t;
    return {trace_.begin() + static_cast<std::ptrdiff_t>(before), trace_.end()};
}

std::string Runtime::trace_text() const {
    std::ostringstream out;
    for (const auto& ev : trace_) out << ev.to_line() << "\n";
    return out.str();
}

void Runtime::install_tap(std::size_t connection_index, std::shared_ptr<ConnectionTap> tap) {
    if (connection_index >= app_.connections.size())
        throw OperationError("unknown-connection",
                             "connection index " + std::to_string(connection_index) +
                                 " out of range");
    if (!taps_.emplace(connection_index, std::move(tap)).second)
        throw OperationError("already-instrumented",
                             app_.connections[connection_index].to_string() +
                                 " already has an instrument installed");
}

bool Runtime::has_tap(std::size_t connection_index) const {
    return taps_.count(connection_index) != 0;
}

void Runtime::schedule_injection(InjectionSpec spec, LogicalTime at) {
    if (at < now_)
        throw OperationError("time-in-past", "inject at t=" + std::to_string(at) +
                                                 " but clock is at " + std::to_string(now_));
    Item item;
    item.time = at;
    item.kind = Item::Kind::DeliverInjection;
    item.injection = std::move(spec);
    enqueue(std::move(item));
}

std::optional<Value> Runtime::input_latch(const PortRef& port) const {
    const Instance& inst = instances_[instance_index(port.instance)];
    auto it = inst.input_latch.find(port.port);
    return it == inst.input_latch.end() ? std::nullopt : std::optional<Value>(it->second);
}

std::optional<Value> Runtime::output_latch(const PortRef& port) const {
    const Instance& inst = instances_[instance_index(port.instance)];
    auto it = inst.output_latch.find(port.port);
    return it == inst.output_latch.end() ? std::nullopt : std::optional<Value>(it->second);
}

void Runtime::process(const Item& item) {
    switch (item.kind) {
        case Item::Kind::SourceTick: {
            Instance& inst = instances_[item.instance];
            const SourceFn* fn = registry_.source(inst.type->behavior_key);
            if (fn) {
                SourceContext ctx{inst.decl->name, now_, inst.state, rng_};
                apply_result(item.instance, (*fn)(ctx));
            }
            Item next;
            next.time = now_ + *inst.type->source_period_ms;
            next.kind = Item::Kind::SourceTick;
            next.instance = item.instance;
            enqueue(std::move(next));
            break;
        }
        case Item::Kind::EmitEvent:
            emit_event_output(item.instance, item.port);
            break;
        case Item::Kind::DeliverEvent:
            deliver_event_input(item.instance, item.port, nullptr);
            break;
        case Item::Kind::DeliverInjection:
            deliver_injection(item.injection);
            break;
    }
}

// Records the emission and fans it out: each outgoing connection is
// offered the crossing (tap first); accepted deliveries are queued at the
// same instant in declaration order.
void Runtime::emit_event_output(std::size_t inst_idx, const std::string& port) {
    Instance& inst = instances_[inst_idx];
    record({now_, inst.decl->name, port, std::nullopt});
    auto it = event_fanout_.find({inst_idx, port});
    if (it == event_fanout_.end()) return;
    for (std::size_t ci : it->second) {
        const Connection& conn = app_.connections[ci];
        TraceEvent crossing{now_, conn.source.instance, conn.source.port, std::nullopt};
        auto tap = taps_.find(ci);
        if (tap != taps_.end() && !tap->second->on_cross(crossing)) continue;
        Item item;
        item.time = now_;
        item.kind = Item::Kind::DeliverEvent;
        item.instance = instance_by_name_.at(conn.destination.instance);
        item.port = conn.destination.port;
        enqueue(std::move(item));
    }
}

// Latches every data input (pull across its driving connection, through
// any tap), records the event arrival, then runs the behavior once.
// `override_spec` substitutes an injected value for the pull on the
// instrumented data connection it names.
void Runtime::deliver_event_input(std::size_t inst_idx, const std::string& port,
                                  const InjectionSpec* override_spec) {
    Instance& inst = instances_[inst_idx];

    for (const DataPort& input : inst.type->data_inputs) {
        auto drv = data_driver_.find({inst_idx, input.name});
        if (drv == data_driver_.end()) continue;
        std::size_t ci = drv->second;
        const Connection& conn = app_.connections[ci];

        if (override_spec && override_spec->data_connection &&
            *override_spec->data_connection == ci) {
            TraceEvent crossing{now_, conn.source.instance, conn.source.port,
                                *override_spec->value};
            if (override_spec->reporter) override_spec->reporter->on_injected(crossing);
            record({now_, conn.destination.instance, conn.destination.port,
                    *override_spec->value});
            inst.input_latch[input.name] = *override_spec->value;
            continue;
        }

        const Instance& src = instances_[instance_by_name_.at(conn.source.instance)];
        auto latched = src.output_latch.find(conn.source.port);
        if (latched == src.output_latch.end()) continue;  // nothing emitted yet
        auto tap = taps_.find(ci);
        if (tap != taps_.end() && !tap->second->forwarding()) continue;
        record({now_, conn.destination.instance, conn.destination.port, latched->second});
        inst.input_latch[input.name] = latched->second;
    }

    record({now_, inst.decl->name, port, std::nullopt});

    const BehaviorFn* fn = registry_.behavior(inst.type->behavior_key);
    BehaviorContext ctx{inst.decl->name, port, now_, inst.input_latch, inst.state, rng_};
    apply_result(inst_idx, (*fn)(ctx));
}

void Runtime::apply_result(std::size_t inst_idx, const BehaviorResult& result) {
    Instance& inst = instances_[inst_idx];
    for (const auto& [port, value] : result.outputs) {
        const DataPort* decl = inst.type->data_output(port);
        if (!decl)
            throw OperationError("unknown-port", "behavior of '" + inst.decl->name +
                                                     "' emitted unknown data output '" + port +
                                                     "'");
        if (data_type_of(value) != decl->type)
            throw OperationError("type-mismatch", "behavior of '" + inst.decl->name +
                                                      "' emitted " +
                                                      data_type_name(data_type_of(value)) +
                                                      " on " + data_type_name(decl->type) +
                                                      " port '" + port + "'");
        TraceEvent emission{now_, inst.decl->name, port, value};
        record(emission);
        inst.output_latch[port] = value;
        auto fanout = data_fanout_.find({inst_idx, port});
        if (fanout != data_fanout_.end()) {
            for (std::size_t ci : fanout->second) {
                auto tap = taps_.find(ci);
                if (tap != taps_.end()) tap->second->on_cross(emission);
            }
        }
    }
    for (const auto& event : result.events) {
        auto kind = inst.type->port_kind(event);
        if (!kind || *kind != PortKind::EventOutput)
            throw OperationError("unknown-port", "behavior of '" + inst.decl->name +
                                                     "' emitted unknown event '" + event + "'");
        emit_event_output(inst_idx, event);
    }
}

void Runtime::deliver_injection(const InjectionSpec& spec) {
    if (spec.event_connection && spec.fire_event) {
        const Connection& conn = app_.connections[*spec.event_connection];
        TraceEvent crossing{now_, conn.source.instance, conn.source.port, std::nullopt};
        if (spec.reporter) spec.reporter->on_injected(crossing);
        deliver_event_input(instance_by_name_.at(conn.destination.instance),
                            conn.destination.port, &spec);
        return;
    }
    if (spec.data_connection && spec.value) {
        const Connection& conn = app_.connections[*spec.data_connection];
        TraceEvent crossing{now_, conn.source.instance, conn.source.port, *spec.value};
        if (spec.reporter) spec.reporter->on_injected(crossing);
        record({now_, conn.destination.instance, conn.destination.port, *spec.value});
        Instance& dst = instances_[instance_by_name_.at(conn.destination.instance)];
        dst.input_latch[conn.destination.port] = *spec.value;
    }
}

}  // namespace fbdiag
