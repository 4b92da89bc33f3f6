#pragma once

#include "fbdiag/agent.hpp"
#include "fbdiag/scenarios.hpp"

namespace fbdiag {

// Everything one batch run needs. Paths are optional: without them the
// shipped room-controller fixture supplies the application, behaviors
// and diagnostic packages.
struct SessionConfig {
    std::optional<std::string> app_path;      // .app.xml
    std::vector<std::string> type_paths;      // .fbt.xml, one per block type
    std::optional<std::string> packages_dir;  // directory of *.dpkg.xml
    std::optional<FaultScenario> scenario;
    std::optional<double> fault_probability;  // overrides a random-fault scenario
    int sessions = 1;
    LogicalTime horizon_ms = 600000;
    std::uint64_t seed = 42;                  // session i runs with seed + i
    std::optional<std::string> out_dir;
    bool loop_after_report = false;           // re-arm monitoring after a report
    std::vector<Stimulus> stimuli = default_stimulus_schedule();
    NormalBehaviorProfile profile = default_room_profile();
    TempProfile temperature;                  // ambient input for the fixture sensor
};

struct SessionRun {
    SessionReport report;
    std::vector<GoalLogEntry> goal_log;
    std::string trace_text;
};

struct BatchResult {
    std::vector<SessionRun> sessions;
    ConsolidatedDiagnosis consolidated;
};

// Drives one monitored session to the horizon: fresh runtime seeded with
// `seed`, instrumented per `packages`, stimuli injected up front, one
// agent watching. A violation triggers diagnose/analyse/report; a clean
// horizon yields a report assembled here with an empty diagnosis.
SessionRun run_one_session(const Application& app, const BehaviorRegistry& registry,
                           const std::vector<DiagnosticPackage>& packages,
                           const SessionConfig& config, int session_id, std::uint64_t seed);

// Runs config.sessions independent sessions (seed, seed+1, ...), writes
// per-session artifacts plus consolidated.json under out_dir when set,
// and correlates the reports.
BatchResult run_sessions(const SessionConfig& config);

// Byte-deterministic JSON (sorted keys, 2-space indent, trailing newline).
std::string to_json(const SessionReport& report);
std::string to_json(const ConsolidatedDiagnosis& consolidated);

// Reads consolidated.json back; throws ParseError on malformed input.
ConsolidatedDiagnosis consolidated_from_json(const std::string& json_text);

// Human-readable verdict, grouped by classification severity.
std::string explain_text(const ConsolidatedDiagnosis& consolidated);

// 0 when every subject is Clear, 1 otherwise.
int exit_code_for(const ConsolidatedDiagnosis& consolidated);

}  // namespace fbdiag
