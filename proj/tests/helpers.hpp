#pragma once

#include <random>
#include <string>
#include <vector>

#include "fbdiag/model.hpp"

namespace testutil {

// Generates a structurally valid application: a handful of generated
// types, instances of them, and connections that respect port kinds,
// data types and the one-driver-per-input rule.
inline fbdiag::Application make_random_app(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    fbdiag::Application app;
    app.name = "GEN_" + std::to_string(seed);

    int type_count = pick(2, 4);
    for (int t = 0; t < type_count; ++t) {
        fbdiag::FbType type;
        type.name = "T" + std::to_string(t);
        type.behavior_key = "noop_v1";
        int ei = pick(1, 3), eo = pick(1, 3), di = pick(0, 3), dd = pick(0, 3);
        for (int i = 0; i < ei; ++i) type.event_inputs.push_back("EI" + std::to_string(i));
        for (int i = 0; i < eo; ++i) type.event_outputs.push_back("EO" + std::to_string(i));
        for (int i = 0; i < di; ++i)
            type.data_inputs.push_back({"DI" + std::to_string(i),
                                        i % 2 == 0 ? fbdiag::DataType::Real : fbdiag::DataType::Int});
        for (int i = 0; i < dd; ++i)
            type.data_outputs.push_back({"DO" + std::to_string(i),
                                         i % 2 == 0 ? fbdiag::DataType::Real : fbdiag::DataType::Int});
        app.type_library[type.name] = std::move(type);
    }

    int instance_count = pick(2, 6);
    for (int i = 0; i < instance_count; ++i) {
        fbdiag::FbInstance inst;
        inst.name = "FB" + std::to_string(i);
        inst.type_name = "T" + std::to_string(pick(0, type_count - 1));
        app.instances.push_back(std::move(inst));
    }

    auto type_of = [&](const fbdiag::FbInstance& inst) -> const fbdiag::FbType& {
        return app.type_library.at(inst.type_name);
    };

    // Event connections: any output to any input, duplicates filtered.
    int event_edges = pick(1, 2 * instance_count);
    for (int e = 0; e < event_edges; ++e) {
        const auto& src = app.instances[static_cast<std::size_t>(pick(0, instance_count - 1))];
        const auto& dst = app.instances[static_cast<std::size_t>(pick(0, instance_count - 1))];
        const auto& so = type_of(src).event_outputs;
        const auto& di = type_of(dst).event_inputs;
        if (so.empty() || di.empty()) continue;
        fbdiag::Connection conn;
        conn.kind = fbdiag::ConnectionKind::Event;
        conn.source = {src.name, so[static_cast<std::size_t>(pick(0, int(so.size()) - 1))]};
        conn.destination = {dst.name, di[static_cast<std::size_t>(pick(0, int(di.size()) - 1))]};
        bool dup = false;
        for (const auto& existing : app.connections)
            if (existing.source == conn.source && existing.destination == conn.destination)
                dup = true;
        if (!dup) app.connections.push_back(conn);
    }

    // Data connections: matching types, one driver per input.
    std::vector<fbdiag::PortRef> driven;
    int data_edges = pick(1, 2 * instance_count);
    for (int e = 0; e < data_edges; ++e) {
        const auto& src = app.instances[static_cast<std::size_t>(pick(0, instance_count - 1))];
        const auto& dst = app.instances[static_cast<std::size_t>(pick(0, instance_count - 1))];
        const auto& so = type_of(src).data_outputs;
        const auto& di = type_of(dst).data_inputs;
        if (so.empty() || di.empty()) continue;
        const auto& out = so[static_cast<std::size_t>(pick(0, int(so.size()) - 1))];
        const auto& in = di[static_cast<std::size_t>(pick(0, int(di.size()) - 1))];
        if (out.type != in.type) continue;
        fbdiag::PortRef input_ref{dst.name, in.name};
        bool taken = false;
        for (const auto& d : driven)
            if (d == input_ref) taken = true;
        if (taken) continue;
        fbdiag::Connection conn;
        conn.kind = fbdiag::ConnectionKind::Data;
        conn.source = {src.name, out.name};
        conn.destination = input_ref;
        app.connections.push_back(conn);
        driven.push_back(input_ref);
    }
    return app;
}

}  // namespace testutil
