#include "fbdiag/session.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fbdiag/xml_io.hpp"

namespace fbdiag {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OperationError("unreadable-file", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OperationError("unwritable-file", "cannot write '" + path.string() + "'");
    out << text;
}

json beliefs_to_json(const std::vector<DynamicBelief>& beliefs) {
    json arr = json::array();
    for (const auto& b : beliefs) {
        arr.push_back({{"subject", b.subject},
                       {"veracity", veracity_name(b.veracity)},
                       {"fault_code", fault_code_name(b.fault_code)},
                       {"pass_count", b.pass_count},
                       {"fail_count", b.fail_count}});
    }
    return arr;
}

json transitions_to_json(const std::vector<BeliefTransition>& transitions) {
    json arr = json::array();
    for (const auto& t : transitions) {
        arr.push_back({{"time_ms", t.time},
                       {"subject", t.subject},
                       {"from", veracity_name(t.from)},
                       {"to", veracity_name(t.to)},
                       {"fault_code", fault_code_name(t.fault_code)},
                       {"reason", t.reason}});
    }
    return arr;
}

Classification classification_from_name(const std::string& name) {
    if (name == "Hard") return Classification::Hard;
    if (name == "Intermittent") return Classification::Intermittent;
    if (name == "Possible") return Classification::Possible;
    if (name == "Clear") return Classification::Clear;
    throw ParseError("unknown classification '" + name + "'");
}

}  // namespace

SessionRun run_one_session(const Application& app, const BehaviorRegistry& registry,
                           const std::vector<DiagnosticPackage>& packages,
                           const SessionConfig& config, int session_id, std::uint64_t seed) {
    Runtime rt(app, registry, seed);
    Harness harness(rt);
    install_packages(harness, rt.application(), packages);

    Team team;
    DiagnosticAgent agent("diag-1", team, "coordinator", rt, harness, config.profile);

    for (const auto& stimulus : config.stimuli) rt.inject_event(stimulus.port, stimulus.at);

    agent.start();
    std::optional<SessionReport> report;
    while (rt.now() < config.horizon_ms) {
        agent.monitor_step();
        if (agent.escalation_pending()) {
            agent.escalate();
            agent.diagnose(packages);
            agent.analyse();
            report = agent.report(session_id, seed, config.horizon_ms);
            if (!config.loop_after_report) break;
            agent.reset_monitor();
        }
    }

    if (report && config.loop_after_report && !agent.goal_log().empty() &&
        agent.goal_log().back().goal == GoalKind::Monitor &&
        agent.goal_log().back().status == GoalStatus::Active) {
        agent.finish_monitor();  // the re-armed watch ran out the horizon cleanly
    }
    if (!report) {
        // Healthy horizon: the driver assembles the report so the goal
        // log stays a pure Monitor run.
        agent.finish_monitor();
        SessionReport healthy;
        healthy.session_id = session_id;
        healthy.seed = seed;
        healthy.horizon_ms = config.horizon_ms;
        healthy.end_time_ms = rt.now();
        healthy.beliefs = agent.block_beliefs().snapshot();
        healthy.clause_beliefs = agent.clause_beliefs().snapshot();
        healthy.transitions = agent.block_beliefs().transitions();
        healthy.clause_transitions = agent.clause_beliefs().transitions();
        healthy.violations = agent.violations();
        healthy.test_outcomes = agent.test_outcomes();
        report = std::move(healthy);
    }

    SessionRun run;
    run.report = std::move(*report);
    run.goal_log = agent.goal_log();
    run.trace_text = rt.trace_text();
    return run;
}

BatchResult run_sessions(const SessionConfig& config) {
    if (config.sessions < 1)
        throw OperationError("bad-config", "session count must be at least 1");

    RoomControllerFixture fixture = build_room_controller(config.temperature);

    Application app;
    if (config.app_path) {
        std::map<std::string, FbType> library;
        for (const auto& path : config.type_paths) {
            FbType type = parse_fb_type(read_file(path));
            library[type.name] = std::move(type);
        }
        app = parse_application(read_file(*config.app_path), library);
    } else {
        app = fixture.app;
    }

    std::vector<DiagnosticPackage> packages;
    if (config.packages_dir) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(*config.packages_dir))
            if (entry.is_regular_file() && entry.path().string().ends_with(".dpkg.xml"))
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw OperationError("bad-config",
                                 "no .dpkg.xml files under '" + *config.packages_dir + "'");
        for (const auto& path : files) packages.push_back(load_package(read_file(path.string())));
    } else {
        packages = fixture.packages;
    }

    if (config.scenario) {
        FaultScenario scenario = *config.scenario;
        if (config.fault_probability) {
            auto* random = std::get_if<FaultScenario::AlgorithmRandomInRange>(&scenario.kind);
            if (!random)
                throw OperationError("bad-config",
                                     "--fault-prob only applies to a random-fault scenario");
            random->probability = *config.fault_probability;
        }
        auto issues = validate(scenario);
        if (!issues.empty()) throw ValidationFailure(std::move(issues));
        apply_fault(fixture.registry, app, scenario);
    } else if (config.fault_probability) {
        throw OperationError("bad-config", "--fault-prob needs a scenario");
    }

    BatchResult result;
    std::vector<SessionReport> reports;
    for (int i = 0; i < config.sessions; ++i) {
        SessionRun run = run_one_session(app, fixture.registry, packages, config, i + 1,
                                         config.seed + static_cast<std::uint64_t>(i));
        reports.push_back(run.report);
        result.sessions.push_back(std::move(run));
    }
    result.consolidated = correlate(reports);

    if (config.out_dir) {
        std::filesystem::path dir(*config.out_dir);
        std::filesystem::create_directories(dir);
        for (int i = 0; i < config.sessions; ++i) {
            const SessionRun& run = result.sessions[static_cast<std::size_t>(i)];
            std::string n = std::to_string(i + 1);
            write_file(dir / ("report_" + n + ".json"), to_json(run.report));
            std::string goals;
            for (const auto& entry : run.goal_log) goals += entry.to_line() + "\n";
            write_file(dir / ("goal_log_" + n + ".tsv"), goals);
            write_file(dir / ("trace_" + n + ".tsv"), run.trace_text);
        }
        write_file(dir / "consolidated.json", to_json(result.consolidated));
    }
    return result;
}

std::string to_json(const SessionReport& report) {
    json j;
    j["format_version"] = 1;
    j["session"] = report.session_id;
    j["seed"] = report.seed;
    j["horizon_ms"] = report.horizon_ms;
    j["end_time_ms"] = report.end_time_ms;
    j["diagnose_target"] = report.diagnose_target;
    j["beliefs"] = beliefs_to_json(report.beliefs);
    j["clause_beliefs"] = beliefs_to_json(report.clause_beliefs);
    j["transitions"] = transitions_to_json(report.transitions);
    j["clause_transitions"] = transitions_to_json(report.clause_transitions);

    json violations = json::array();
    for (const auto& v : report.violations) {
        violations.push_back({{"time_ms", v.time},
                              {"clause", v.clause},
                              {"dp", v.dp_id},
                              {"fault_code", fault_code_name(v.code)},
                              {"detail", v.detail}});
    }
    j["violations"] = violations;

    json tests = json::array();
    for (const auto& t : report.test_outcomes) {
        tests.push_back({{"time_ms", t.time},
                         {"subject", t.subject},
                         {"test", t.test},
                         {"outcome", t.outcome == Outcome::Pass ? "Pass" : "Fail"},
                         {"fault_code", fault_code_name(t.code)},
                         {"detail", t.detail}});
    }
    j["tests"] = tests;

    json diagnosis = json::array();
    for (const auto& d : report.diagnosis) {
        diagnosis.push_back({{"subject", d.subject},
                             {"fault_code", fault_code_name(d.code)},
                             {"classification", classification_name(d.classification)}});
    }
    j["diagnosis"] = diagnosis;

    return j.dump(2) + "\n";
}

std::string to_json(const ConsolidatedDiagnosis& consolidated) {
    json j;
    j["format_version"] = 1;
    j["sessions_run"] = consolidated.sessions_run;
    json subjects = json::object();
    for (const auto& entry : consolidated.entries) {
        subjects[entry.subject] = {{"classification", classification_name(entry.classification)},
                                   {"fault_code", fault_code_name(entry.code)},
                                   {"sessions_failed", entry.sessions_failed},
                                   {"sessions_run", entry.sessions_run},
                                   {"pass_total", entry.pass_total},
                                   {"fail_total", entry.fail_total}};
    }
    j["subjects"] = subjects;
    return j.dump(2) + "\n";
}

ConsolidatedDiagnosis consolidated_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid json: ") + e.what());
    }
    try {
        if (!j.is_object() || j.at("format_version").get<int>() != 1)
            throw ParseError("unsupported report format");
        ConsolidatedDiagnosis out;
        out.sessions_run = j.at("sessions_run").get<int>();
        for (const auto& [subject, body] : j.at("subjects").items()) {
            ConsolidatedEntry entry;
            entry.subject = subject;
            entry.classification =
                classification_from_name(body.at("classification").get<std::string>());
            auto code = fault_code_from_name(body.at("fault_code").get<std::string>());
            if (!code)
                throw ParseError("unknown fault code '" +
                                 body.at("fault_code").get<std::string>() + "'");
            entry.code = *code;
            entry.sessions_failed = body.at("sessions_failed").get<int>();
            entry.sessions_run = body.at("sessions_run").get<int>();
            entry.pass_total = body.at("pass_total").get<int>();
            entry.fail_total = body.at("fail_total").get<int>();
            out.entries.push_back(std::move(entry));
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

std::string explain_text(const ConsolidatedDiagnosis& consolidated) {
    std::ostringstream out;
    out << "diagnosis over " << consolidated.sessions_run << " session(s)\n";

    auto section = [&](Classification cls, const std::string& header) {
        bool any = false;
        for (const auto& entry : consolidated.entries) {
            if (entry.classification != cls) continue;
            if (!any) {
                out << "\n" << header << "\n";
                any = true;
            }
            out << "  " << entry.subject;
            if (cls == Classification::Hard || cls == Classification::Intermittent) {
                out << ": " << fault_code_name(entry.code) << " (failed "
                    << entry.sessions_failed << "/" << entry.sessions_run << " sessions, "
                    << entry.pass_total << " pass / " << entry.fail_total << " fail)";
            } else if (cls == Classification::Possible) {
                out << ": " << fault_code_name(entry.code) << " (never exercised)";
            } else {
                out << " (" << entry.pass_total << " pass)";
            }
            out << "\n";
        }
    };

    section(Classification::Hard, "hard faults:");
    section(Classification::Intermittent, "intermittent faults:");
    section(Classification::Possible, "possible suspects:");
    section(Classification::Clear, "clear:");

    if (exit_code_for(consolidated) == 0) out << "\nall monitored blocks clear\n";
    return out.str();
}

int exit_code_for(const ConsolidatedDiagnosis& consolidated) {
    for (const auto& entry : consolidated.entries)
        if (entry.classification != Classification::Clear) return 1;
    return 0;
}

}  // namespace fbdiag
