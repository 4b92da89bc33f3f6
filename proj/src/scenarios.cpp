#include "fbdiag/scenarios.hpp"

#include <algorithm>
#include <sstream>

#include "fbdiag/xml.hpp"

namespace fbdiag {

TempProfile::TempProfile(double constant_deg_f) : anchors_{{0, constant_deg_f}} {}

TempProfile::TempProfile(std::vector<std::pair<LogicalTime, double>> anchors)
    : anchors_(std::move(anchors)) {
    if (anchors_.empty())
        throw OperationError("bad-profile", "a temperature profile needs at least one anchor");
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        if (anchors_[i].first <= anchors_[i - 1].first)
            throw OperationError("bad-profile", "profile anchors must be strictly increasing");
    }
}

TempProfile TempProfile::ramp(LogicalTime start, double start_deg_f, LogicalTime end,
                              double end_deg_f) {
    return TempProfile({{start, start_deg_f}, {end, end_deg_f}});
}

double TempProfile::at(LogicalTime t) const {
    if (t <= anchors_.front().first) return anchors_.front().second;
    if (t >= anchors_.back().first) return anchors_.back().second;
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        if (t <= anchors_[i].first) {
            const auto& [t0, v0] = anchors_[i - 1];
            const auto& [t1, v1] = anchors_[i];
            double f = static_cast<double>(t - t0) / static_cast<double>(t1 - t0);
            return v0 + f * (v1 - v0);
        }
    }
    return anchors_.back().second;
}

std::string kind_name(const FaultScenario::Kind& kind) {
    struct Namer {
        std::string operator()(const FaultScenario::AlgorithmRandomInRange&) const {
            return "AlgorithmRandomInRange";
        }
        std::string operator()(const FaultScenario::StuckSensor&) const { return "StuckSensor"; }
        std::string operator()(const FaultScenario::DeadSource&) const { return "DeadSource"; }
        std::string operator()(const FaultScenario::OutputOffset&) const {
            return "OutputOffset";
        }
    };
    return std::visit(Namer{}, kind);
}

std::vector<ValidationIssue> validate(const FaultScenario& scenario) {
    std::vector<ValidationIssue> issues;
    if (scenario.name.empty())
        issues.push_back({"empty-name", "", "", "scenario name must not be empty"});
    if (scenario.target.empty())
        issues.push_back({"empty-target", "", "", "scenario target must not be empty"});
    if (const auto* r = std::get_if<FaultScenario::AlgorithmRandomInRange>(&scenario.kind)) {
        if (!(r->lo < r->hi))
            issues.push_back({"bad-range", scenario.target, "",
                              "input range requires lo < hi, got [" + value_to_text(Value{r->lo}) +
                                  ", " + value_to_text(Value{r->hi}) + "]"});
        if (r->probability < 0.0 || r->probability > 1.0)
            issues.push_back({"bad-probability", scenario.target, "",
                              "probability must lie in [0, 1], got " +
                                  value_to_text(Value{r->probability})});
    }
    return issues;
}

namespace {

double real_attribute(const xml::Node& node, const std::string& name) {
    return std::get<double>(value_from_text(DataType::Real, node.required(name)));
}

}  // namespace

FaultScenario parse_scenario(const std::string& xml_text) {
    xml::Node root = xml::parse_document(xml_text);
    if (root.name != "FaultScenario")
        throw ParseError("expected root element <FaultScenario>, got <" + root.name + ">",
                         root.line);
    root.reject_unknown_children({});

    FaultScenario scenario;
    std::string kind = root.required("Kind");
    if (kind == "AlgorithmRandomInRange") {
        root.reject_unknown_attributes({"Name", "Target", "Kind", "Lo", "Hi", "Probability"});
        FaultScenario::AlgorithmRandomInRange r;
        r.lo = real_attribute(root, "Lo");
        r.hi = real_attribute(root, "Hi");
        r.probability = real_attribute(root, "Probability");
        scenario.kind = r;
    } else if (kind == "StuckSensor") {
        root.reject_unknown_attributes({"Name", "Target", "Kind", "Value"});
        scenario.kind = FaultScenario::StuckSensor{real_attribute(root, "Value")};
    } else if (kind == "DeadSource") {
        root.reject_unknown_attributes({"Name", "Target", "Kind"});
        scenario.kind = FaultScenario::DeadSource{};
    } else if (kind == "OutputOffset") {
        root.reject_unknown_attributes({"Name", "Target", "Kind", "Delta"});
        scenario.kind = FaultScenario::OutputOffset{real_attribute(root, "Delta")};
    } else {
        throw ParseError("unknown fault kind '" + kind + "'", root.line, root.name);
    }
    scenario.name = root.required("Name");
    scenario.target = root.required("Target");

    auto issues = validate(scenario);
    if (!issues.empty()) throw ValidationFailure(std::move(issues));
    return scenario;
}

std::string to_xml(const FaultScenario& scenario) {
    std::ostringstream out;
    out << "<FaultScenario Name=\"" << xml::escape(scenario.name) << "\" Target=\""
        << xml::escape(scenario.target) << "\" Kind=\"" << kind_name(scenario.kind) << "\"";
    if (const auto* r = std::get_if<FaultScenario::AlgorithmRandomInRange>(&scenario.kind)) {
        out << " Lo=\"" << value_to_exact_text(Value{r->lo}) << "\" Hi=\""
            << value_to_exact_text(Value{r->hi}) << "\" Probability=\""
            << value_to_exact_text(Value{r->probability}) << "\"";
    } else if (const auto* s = std::get_if<FaultScenario::StuckSensor>(&scenario.kind)) {
        out << " Value=\"" << value_to_exact_text(Value{s->value}) << "\"";
    } else if (const auto* o = std::get_if<FaultScenario::OutputOffset>(&scenario.kind)) {
        out << " Delta=\"" << value_to_exact_text(Value{o->delta}) << "\"";
    }
    out << "/>\n";
    return out.str();
}

const std::vector<FaultScenario>& builtin_scenarios() {
    static const std::vector<FaultScenario> table = {
        {"conv_random", "F_TO_C_CONV", FaultScenario::AlgorithmRandomInRange{70.0, 80.0, 0.5}},
        {"conv_random_always", "F_TO_C_CONV",
         FaultScenario::AlgorithmRandomInRange{70.0, 80.0, 1.0}},
        {"controller_random_always", "Z_CONTROLLER",
         FaultScenario::AlgorithmRandomInRange{-100.0, 100.0, 1.0}},
        {"controller_offset", "Z_CONTROLLER", FaultScenario::OutputOffset{5.0}},
        {"sensor_dead", "Z_TEMPERATURE", FaultScenario::DeadSource{}},
        {"sensor_stuck", "Z_TEMPERATURE", FaultScenario::StuckSensor{72.0}},
    };
    return table;
}

std::optional<FaultScenario> find_builtin_scenario(const std::string& name) {
    for (const auto& scenario : builtin_scenarios())
        if (scenario.name == name) return scenario;
    return std::nullopt;
}

namespace {

// Value drawn for a corrupted REAL output: uniform over [-50, 150).
double corrupted_output(std::mt19937_64& rng) { return uniform_unit(rng) * 200.0 - 50.0; }

}  // namespace

void apply_fault(BehaviorRegistry& registry, const Application& app,
                 const FaultScenario& scenario) {
    const FbInstance* target = app.instance(scenario.target);
    if (!target)
        throw OperationError("unknown-target",
                             "scenario targets unknown instance '" + scenario.target + "'");
    const FbType& type = app.type_library.at(target->type_name);
    const std::string key = type.behavior_key;
    const std::string instance = target->name;

    if (const auto* r = std::get_if<FaultScenario::AlgorithmRandomInRange>(&scenario.kind)) {
        if (type.data_inputs.empty())
            throw OperationError("unknown-target", "'" + instance +
                                                       "' has no data inputs to gate the fault on");
        const std::string gate_input = type.data_inputs.front().name;
        auto params = *r;
        registry.wrap_behavior(key, [=](BehaviorFn inner) -> BehaviorFn {
            return [=](const BehaviorContext& ctx) {
                BehaviorResult result = inner(ctx);
                if (ctx.instance != instance || params.probability <= 0.0) return result;
                auto latched = ctx.inputs.find(gate_input);
                if (latched == ctx.inputs.end()) return result;
                const double* in = std::get_if<double>(&latched->second);
                if (!in || *in < params.lo || *in > params.hi) return result;
                if (uniform_unit(ctx.rng) >= params.probability) return result;
                for (auto& [port, value] : result.outputs) {
                    if (std::holds_alternative<double>(value))
                        value = corrupted_output(ctx.rng);
                }
                return result;
            };
        });
        return;
    }

    if (const auto* s = std::get_if<FaultScenario::StuckSensor>(&scenario.kind)) {
        if (!registry.has_source(key))
            throw OperationError("unknown-target",
                                 "'" + instance + "' has no periodic source to pin");
        double pinned = s->value;
        registry.wrap_source(key, [=](SourceFn inner) -> SourceFn {
            return [=](const SourceContext& ctx) {
                BehaviorResult result = inner(ctx);
                if (ctx.instance != instance) return result;
                for (auto& [port, value] : result.outputs) {
                    if (std::holds_alternative<double>(value)) value = pinned;
                }
                return result;
            };
        });
        return;
    }

    if (std::holds_alternative<FaultScenario::DeadSource>(scenario.kind)) {
        if (!registry.has_source(key))
            throw OperationError("unknown-target",
                                 "'" + instance + "' has no periodic source to silence");
        registry.wrap_source(key, [=](SourceFn inner) -> SourceFn {
            return [=](const SourceContext& ctx) {
                if (ctx.instance != instance) return inner(ctx);
                return BehaviorResult{};
            };
        });
        return;
    }

    const auto& offset = std::get<FaultScenario::OutputOffset>(scenario.kind);
    double delta = offset.delta;
    auto shift = [=](BehaviorResult result, const std::string& firing_instance) {
        if (firing_instance == instance) {
            for (auto& [port, value] : result.outputs) {
                if (const double* d = std::get_if<double>(&value)) value = *d + delta;
            }
        }
        return result;
    };
    registry.wrap_behavior(key, [=](BehaviorFn inner) -> BehaviorFn {
        return
            [=](const BehaviorContext& ctx) { return shift(inner(ctx), ctx.instance); };
    });
    if (registry.has_source(key)) {
        registry.wrap_source(key, [=](SourceFn inner) -> SourceFn {
            return [=](const SourceContext& ctx) { return shift(inner(ctx), ctx.instance); };
        });
    }
}

namespace {

FbType zone_switches_type() {
    FbType t;
    t.name = "Z_SWITCHES";
    t.event_outputs = {"CMD_UP", "CMD_DOWN"};
    t.behavior_key = "zone_switches_v1";
    return t;
}

FbType zone_temperature_type() {
    FbType t;
    t.name = "Z_TEMPERATURE";
    t.event_outputs = {"TEMP_CHANGED"};
    t.data_outputs = {{"TEMP", DataType::Real}};
    t.behavior_key = "zone_temperature_v1";
    t.source_period_ms = 500;
    return t;
}

FbType f_to_c_type() {
    FbType t;
    t.name = "F_TO_C_CONV";
    t.event_inputs = {"CONV"};
    t.event_outputs = {"CONV_DONE", "ERROR"};
    t.data_inputs = {{"F", DataType::Real}};
    t.data_outputs = {{"C", DataType::Real}};
    t.behavior_key = "f_to_c_conv_v1";
    return t;
}

FbType zone_controller_type() {
    FbType t;
    t.name = "Z_CONTROLLER";
    t.event_inputs = {"TEMP_CHANGED", "CMD_UP", "CMD_DOWN", "ACK"};
    t.event_outputs = {"ZONE_UPDATE"};
    t.data_inputs = {{"TEMP", DataType::Real}};
    t.data_outputs = {{"ZONE_TEMP", DataType::Real}};
    t.behavior_key = "zone_controller_v1";
    return t;
}

FbType hvac_main_type() {
    FbType t;
    t.name = "HVAC_MAIN_STUB";
    t.event_inputs = {"ZONE_UPDATE", "ERR"};
    t.event_outputs = {"ACK"};
    t.data_inputs = {{"ZONE_TEMP", DataType::Real}};
    t.behavior_key = "hvac_main_v1";
    return t;
}

constexpr double kAbsoluteZeroF = -459.67;
constexpr double kSetpointInitC = 21.0;
constexpr double kSetpointStepC = 0.5;

BehaviorResult noop(const BehaviorContext&) { return {}; }

BehaviorRegistry fixture_registry(TempProfile profile) {
    BehaviorRegistry registry;

    registry.add_behavior("zone_switches_v1", noop);

    registry.add_behavior("zone_temperature_v1", noop);
    registry.add_source("zone_temperature_v1", [profile](const SourceContext& ctx) {
        BehaviorResult result;
        result.outputs.emplace_back("TEMP", Value{profile.at(ctx.now)});
        result.events.push_back("TEMP_CHANGED");
        return result;
    });

    registry.add_behavior("f_to_c_conv_v1", [](const BehaviorContext& ctx) {
        BehaviorResult result;
        auto latched = ctx.inputs.find("F");
        if (latched == ctx.inputs.end() ||
            std::get<double>(latched->second) <= kAbsoluteZeroF) {
            result.events.push_back("ERROR");
            return result;
        }
        double f = std::get<double>(latched->second);
        result.outputs.emplace_back("C", Value{(f - 32.0) * 5.0 / 9.0});
        result.events.push_back("CONV_DONE");
        return result;
    });

    registry.add_behavior("zone_controller_v1", [](const BehaviorContext& ctx) {
        BehaviorResult result;
        if (!ctx.state.count("SETPOINT_C")) ctx.state["SETPOINT_C"] = Value{kSetpointInitC};
        if (ctx.event == "TEMP_CHANGED") {
            auto latched = ctx.inputs.find("TEMP");
            if (latched != ctx.inputs.end()) {
                result.outputs.emplace_back("ZONE_TEMP", latched->second);
                result.events.push_back("ZONE_UPDATE");
            }
        } else if (ctx.event == "CMD_UP" || ctx.event == "CMD_DOWN") {
            double step = (ctx.event == "CMD_UP") ? kSetpointStepC : -kSetpointStepC;
            double setpoint = std::get<double>(ctx.state["SETPOINT_C"]) + step;
            ctx.state["SETPOINT_C"] = Value{setpoint};
            result.events.push_back("ZONE_UPDATE");
        }
        // ACK is consumed silently: the loop back from the main controller
        // only confirms delivery.
        return result;
    });

    registry.add_behavior("hvac_main_v1", [](const BehaviorContext& ctx) {
        BehaviorResult result;
        if (ctx.event == "ZONE_UPDATE") result.events.push_back("ACK");
        return result;
    });

    return registry;
}

std::vector<DiagnosticPackage> fixture_packages() {
    DiagnosticPackage conv;
    conv.fb_type_name = "F_TO_C_CONV";
    conv.dp_plan = {
        {1, "F", "CONV"},
        {2, "C", "CONV_DONE"},
        {3, std::nullopt, "ERROR"},
    };
    auto value_test = [](std::string name, double fahrenheit, double celsius) {
        TestCase tc;
        tc.name = std::move(name);
        tc.inject_at = 1;
        tc.value = Value{fahrenheit};
        tc.expect_at = 2;
        tc.expect_value = TestCase::ValueExpectation{celsius, 1e-9};
        return tc;
    };
    conv.tests.push_back(value_test("nominal_freezing", 32.0, 0.0));
    conv.tests.push_back(value_test("nominal_boiling", 212.0, 100.0));
    conv.tests.push_back(value_test("nominal_body", 98.6, 37.0));
    conv.tests.push_back(value_test("midrange_comfort", 75.0, 215.0 / 9.0));
    {
        TestCase tc;
        tc.name = "absolute_zero_error";
        tc.inject_at = 1;
        tc.value = Value{kAbsoluteZeroF};
        tc.expect_at = 3;
        tc.expect_event = TestCase::EventExpectation{"ERROR"};
        conv.tests.push_back(std::move(tc));
    }
    {
        TestCase tc;
        tc.name = "absolute_zero_silent";
        tc.inject_at = 1;
        tc.value = Value{kAbsoluteZeroF};
        tc.expect_at = 2;
        tc.expect_no_output = TestCase::NoOutputExpectation{1000};
        conv.tests.push_back(std::move(tc));
    }

    DiagnosticPackage controller;
    controller.fb_type_name = "Z_CONTROLLER";
    controller.dp_plan = {
        {2, "TEMP", "TEMP_CHANGED"},
        {4, std::nullopt, "CMD_UP"},
        {5, std::nullopt, "CMD_DOWN"},
        {6, std::nullopt, "ZONE_UPDATE"},
        {7, "ZONE_TEMP", std::nullopt},
    };
    {
        TestCase tc;
        tc.name = "temp_passthrough";
        tc.inject_at = 2;
        tc.value = Value{25.0};
        tc.expect_at = 7;
        tc.expect_value = TestCase::ValueExpectation{25.0, 1e-9};
        controller.tests.push_back(std::move(tc));
    }
    {
        TestCase tc;
        tc.name = "temp_update_event";
        tc.inject_at = 2;
        tc.value = Value{22.0};
        tc.expect_at = 6;
        tc.expect_event = TestCase::EventExpectation{"ZONE_UPDATE"};
        controller.tests.push_back(std::move(tc));
    }
    {
        TestCase tc;
        tc.name = "cmd_up_response";
        tc.inject_at = 4;
        tc.expect_at = 6;
        tc.expect_event = TestCase::EventExpectation{"ZONE_UPDATE"};
        controller.tests.push_back(std::move(tc));
    }
    {
        TestCase tc;
        tc.name = "cmd_down_response";
        tc.inject_at = 5;
        tc.expect_at = 6;
        tc.expect_event = TestCase::EventExpectation{"ZONE_UPDATE"};
        controller.tests.push_back(std::move(tc));
    }

    return {std::move(conv), std::move(controller)};
}

}  // namespace

RoomControllerFixture build_room_controller(const TempProfile& profile) {
    RoomControllerFixture fixture;

    Application& app = fixture.app;
    app.name = "ROOM_CONTROLLER";
    for (FbType t : {zone_switches_type(), zone_temperature_type(), f_to_c_type(),
                     zone_controller_type(), hvac_main_type()}) {
        app.type_library.emplace(t.name, std::move(t));
    }
    for (const char* name :
         {"Z_SWITCHES", "Z_TEMPERATURE", "Z_CONTROLLER", "F_TO_C_CONV", "HVAC_MAIN_STUB"}) {
        app.instances.push_back({name, name, {}});
    }

    auto event = [](const char* si, const char* sp, const char* di, const char* dp) {
        return Connection{ConnectionKind::Event, {si, sp}, {di, dp}};
    };
    auto data = [](const char* si, const char* sp, const char* di, const char* dp) {
        return Connection{ConnectionKind::Data, {si, sp}, {di, dp}};
    };
    app.connections = {
        event("Z_TEMPERATURE", "TEMP_CHANGED", "F_TO_C_CONV", "CONV"),
        event("F_TO_C_CONV", "CONV_DONE", "Z_CONTROLLER", "TEMP_CHANGED"),
        event("F_TO_C_CONV", "ERROR", "HVAC_MAIN_STUB", "ERR"),
        event("Z_SWITCHES", "CMD_UP", "Z_CONTROLLER", "CMD_UP"),
        event("Z_SWITCHES", "CMD_DOWN", "Z_CONTROLLER", "CMD_DOWN"),
        event("Z_CONTROLLER", "ZONE_UPDATE", "HVAC_MAIN_STUB", "ZONE_UPDATE"),
        event("HVAC_MAIN_STUB", "ACK", "Z_CONTROLLER", "ACK"),
        data("Z_TEMPERATURE", "TEMP", "F_TO_C_CONV", "F"),
        data("F_TO_C_CONV", "C", "Z_CONTROLLER", "TEMP"),
        data("Z_CONTROLLER", "ZONE_TEMP", "HVAC_MAIN_STUB", "ZONE_TEMP"),
    };

    fixture.registry = fixture_registry(profile);
    fixture.packages = fixture_packages();
    return fixture;
}

std::vector<Stimulus> default_stimulus_schedule() {
    return {
        {{"Z_SWITCHES", "CMD_UP"}, 150000},
        {{"Z_SWITCHES", "CMD_DOWN"}, 450000},
    };
}

}  // namespace fbdiag
