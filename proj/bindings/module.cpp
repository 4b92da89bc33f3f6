#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fbdiag/session.hpp"
#include "fbdiag/xml_io.hpp"

namespace py = pybind11;

namespace {

fbdiag::SessionConfig make_config(const std::string& scenario, int sessions,
                                  std::int64_t horizon_ms, std::uint64_t seed,
                                  const py::object& fault_probability, bool loop_after_report,
                                  const std::string& out_dir) {
    fbdiag::SessionConfig config;
    if (!scenario.empty()) {
        if (scenario.find('/') != std::string::npos)
            throw fbdiag::OperationError("bad-config",
                                         "pass a shipped scenario name, not a path");
        auto builtin = fbdiag::find_builtin_scenario(scenario);
        if (!builtin)
            throw fbdiag::OperationError("bad-config", "unknown scenario '" + scenario + "'");
        config.scenario = *builtin;
    }
    if (!fault_probability.is_none())
        config.fault_probability = fault_probability.cast<double>();
    config.sessions = sessions;
    config.horizon_ms = horizon_ms;
    config.seed = seed;
    config.loop_after_report = loop_after_report;
    if (!out_dir.empty()) config.out_dir = out_dir;
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Deterministic function-block runtime with an online diagnostic agent";

    py::register_exception<fbdiag::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<fbdiag::ValidationFailure>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<fbdiag::OperationError>(m, "OperationError", PyExc_RuntimeError);

    m.def(
        "canonical_fb_type",
        [](const std::string& xml_text) { return to_xml(fbdiag::parse_fb_type(xml_text)); },
        py::arg("xml_text"),
        "Parse one block-type document and return its canonical serialization.");

    m.def(
        "canonical_application",
        [](const std::string& xml_text, const std::vector<std::string>& type_xml_texts) {
            std::map<std::string, fbdiag::FbType> library;
            for (const auto& text : type_xml_texts) {
                fbdiag::FbType type = fbdiag::parse_fb_type(text);
                library[type.name] = std::move(type);
            }
            return to_xml(fbdiag::parse_application(xml_text, library));
        },
        py::arg("xml_text"), py::arg("type_xml_texts"),
        "Parse one application document against the given type documents and return its "
        "canonical serialization.");

    m.def(
        "fixture_files",
        []() {
            fbdiag::RoomControllerFixture fixture = fbdiag::build_room_controller();
            py::dict out;
            py::list types;
            for (const auto& [name, type] : fixture.app.type_library) types.append(to_xml(type));
            out["types"] = types;
            out["application"] = to_xml(fixture.app);
            py::list packages;
            for (const auto& package : fixture.packages) packages.append(to_xml(package));
            out["packages"] = packages;
            return out;
        },
        "Canonical documents of the shipped room-controller fixture.");

    m.def(
        "run_batch",
        [](const std::string& scenario, int sessions, std::int64_t horizon_ms,
           std::uint64_t seed, const py::object& fault_probability, bool loop_after_report,
           const std::string& out_dir) {
            fbdiag::BatchResult result = fbdiag::run_sessions(make_config(
                scenario, sessions, horizon_ms, seed, fault_probability, loop_after_report,
                out_dir));
            py::dict out;
            out["exit_code"] = fbdiag::exit_code_for(result.consolidated);
            out["consolidated_json"] = fbdiag::to_json(result.consolidated);
            out["explain"] = fbdiag::explain_text(result.consolidated);
            py::list reports;
            py::list goal_logs;
            for (const auto& run : result.sessions) {
                reports.append(fbdiag::to_json(run.report));
                std::string lines;
                for (const auto& entry : run.goal_log) lines += entry.to_line() + "\n";
                goal_logs.append(lines);
            }
            out["reports"] = reports;
            out["goal_logs"] = goal_logs;
            return out;
        },
        py::arg("scenario") = "", py::arg("sessions") = 1, py::arg("horizon_ms") = 600000,
        py::arg("seed") = 42, py::arg("fault_probability") = py::none(),
        py::arg("loop_after_report") = false, py::arg("out_dir") = "",
        "Run monitored sessions of the shipped fixture and return reports plus the "
        "consolidated verdict.");

    m.def(
        "explain",
        [](const std::string& consolidated_json) {
            return fbdiag::explain_text(fbdiag::consolidated_from_json(consolidated_json));
        },
        py::arg("consolidated_json"),
        "Pretty-print a consolidated report produced by run_batch or the CLI.");

    m.def(
        "builtin_scenario_names",
        []() {
            std::vector<std::string> names;
            for (const auto& scenario : fbdiag::builtin_scenarios()) names.push_back(scenario.name);
            return names;
        },
        "Names accepted by run_batch(scenario=...).");

    m.attr("__version__") = "0.1.0";
}
