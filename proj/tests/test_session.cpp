#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fbdiag/errors.hpp"
#include "fbdiag/session.hpp"

using namespace fbdiag;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("fbdiag-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

}  // namespace

TEST_CASE("a healthy short session reports all clear") {
    auto fixture = build_room_controller();
    SessionConfig config;
    config.horizon_ms = 61000;
    config.stimuli = {{{"Z_SWITCHES", "CMD_UP"}, 10000}};

    SessionRun run = run_one_session(fixture.app, fixture.registry, fixture.packages, config,
                                     1, 42);
    const SessionReport& report = run.report;
    CHECK(report.session_id == 1);
    CHECK(report.seed == 42);
    CHECK(report.horizon_ms == 61000);
    CHECK(report.end_time_ms >= 61000);
    CHECK(report.diagnose_target.empty());
    CHECK(report.violations.empty());
    CHECK(report.test_outcomes.empty());
    CHECK(report.diagnosis.empty());
    REQUIRE(report.beliefs.size() == 4);
    for (const auto& belief : report.beliefs) {
        if (belief.subject == "Z_TEMPERATURE" || belief.subject == "F_TO_C_CONV")
            CHECK(belief.veracity == Veracity::True);
    }

    // Healthy sessions carry a pure Monitor goal history.
    REQUIRE(run.goal_log.size() == 3);
    CHECK(run.goal_log[0].to_line() == "0\tdiag-1\tMonitor\tPending");
    CHECK(run.goal_log[1].to_line() == "0\tdiag-1\tMonitor\tActive");
    CHECK(run.goal_log[2].goal == GoalKind::Monitor);
    CHECK(run.goal_log[2].status == GoalStatus::Achieved);

    CHECK_FALSE(run.trace_text.empty());
    CHECK(run.trace_text.find("Z_SWITCHES.CMD_UP") != std::string::npos);
}

TEST_CASE("session reports serialize to stable json and back") {
    auto fixture = build_room_controller();
    SessionConfig config;
    config.horizon_ms = 5000;
    config.scenario = find_builtin_scenario("sensor_dead");
    config.stimuli.clear();

    apply_fault(fixture.registry, fixture.app, *config.scenario);
    SessionRun run = run_one_session(fixture.app, fixture.registry, fixture.packages, config,
                                     3, 99);
    std::string json = to_json(run.report);
    CHECK(json.front() == '{');
    CHECK(json.back() == '\n');
    CHECK(json.find("\"format_version\": 1") != std::string::npos);
    CHECK(json.find("\"session\": 3") != std::string::npos);
    CHECK(json.find("\"seed\": 99") != std::string::npos);
    CHECK(json.find("\"F2_NO_RESPONSE\"") != std::string::npos);
    CHECK(json.find("\"Z_TEMPERATURE>F_TO_C_CONV>Z_CONTROLLER\"") != std::string::npos);
    // Serialization is deterministic byte for byte.
    CHECK(json == to_json(run.report));
}

TEST_CASE("consolidated json round-trips through its reader") {
    SessionReport a;
    DynamicBelief belief;
    belief.subject = "BLOCK";
    belief.veracity = Veracity::False;
    belief.fault_code = FaultCode::F1_ALGORITHM;
    belief.pass_count = 2;
    belief.fail_count = 1;
    a.beliefs.push_back(belief);

    ConsolidatedDiagnosis consolidated = correlate({a});
    std::string json = to_json(consolidated);
    ConsolidatedDiagnosis back = consolidated_from_json(json);
    CHECK(back.sessions_run == consolidated.sessions_run);
    REQUIRE(back.entries.size() == 1);
    CHECK(back.entries[0].subject == "BLOCK");
    CHECK(back.entries[0].classification == Classification::Hard);
    CHECK(back.entries[0].code == FaultCode::F1_ALGORITHM);
    CHECK(back.entries[0].pass_total == 2);
    CHECK(back.entries[0].fail_total == 1);
    CHECK(to_json(back) == json);

    SUBCASE("malformed input is a parse error") {
        CHECK_THROWS_AS(consolidated_from_json("not json"), ParseError);
        CHECK_THROWS_AS(consolidated_from_json("{}"), ParseError);
        CHECK_THROWS_AS(consolidated_from_json("{\"format_version\": 99}"), ParseError);
        CHECK_THROWS_AS(
            consolidated_from_json("{\"format_version\": 1, \"sessions_run\": 1}"),
            ParseError);
    }
}

TEST_CASE("run_sessions validates its configuration") {
    auto bad_kind = [](SessionConfig config) {
        try {
            run_sessions(config);
        } catch (const OperationError& e) {
            return e.kind;
        }
        return std::string{};
    };

    SessionConfig config;
    config.sessions = 0;
    CHECK(bad_kind(config) == "bad-config");

    config = SessionConfig{};
    config.fault_probability = 0.5;  // no scenario to override
    CHECK(bad_kind(config) == "bad-config");

    config = SessionConfig{};
    config.scenario = find_builtin_scenario("sensor_dead");
    config.fault_probability = 0.5;  // DeadSource has no probability knob
    CHECK(bad_kind(config) == "bad-config");

    config = SessionConfig{};
    config.scenario = FaultScenario{"bad", "F_TO_C_CONV",
                                    AlgorithmRandomInRange{80.0, 70.0, 0.5}};
    CHECK_THROWS_AS(run_sessions(config), ValidationFailure);
}

TEST_CASE("a batch writes per-session artifacts and a consolidated verdict") {
    TempDir out;
    SessionConfig config;
    config.scenario = find_builtin_scenario("conv_random");
    config.fault_probability = 1.0;
    config.sessions = 2;
    config.horizon_ms = 20000;
    config.seed = 42;
    config.out_dir = out.path.string();
    config.stimuli.clear();

    BatchResult batch = run_sessions(config);
    REQUIRE(batch.sessions.size() == 2);
    CHECK(batch.sessions[0].report.session_id == 1);
    CHECK(batch.sessions[0].report.seed == 42);
    CHECK(batch.sessions[1].report.session_id == 2);
    CHECK(batch.sessions[1].report.seed == 43);

    for (int i = 1; i <= 2; ++i) {
        auto n = std::to_string(i);
        CHECK(std::filesystem::exists(out.path / ("report_" + n + ".json")));
        CHECK(std::filesystem::exists(out.path / ("goal_log_" + n + ".tsv")));
        CHECK(std::filesystem::exists(out.path / ("trace_" + n + ".tsv")));
    }
    REQUIRE(std::filesystem::exists(out.path / "consolidated.json"));

    // The files are exactly the in-memory artifacts.
    CHECK(slurp(out.path / "report_1.json") == to_json(batch.sessions[0].report));
    CHECK(slurp(out.path / "consolidated.json") == to_json(batch.consolidated));
    CHECK(slurp(out.path / "trace_2.tsv") == batch.sessions[1].trace_text);
    std::string goal_log = slurp(out.path / "goal_log_1.tsv");
    CHECK(goal_log.find("Monitor\tAbandoned") != std::string::npos);
    CHECK(goal_log.find("Report\tAchieved") != std::string::npos);

    // Certain corruption at 72 degF ambient condemns the converter in
    // every session.
    bool found = false;
    for (const auto& entry : batch.consolidated.entries) {
        if (entry.subject != "F_TO_C_CONV") continue;
        found = true;
        CHECK(entry.classification == Classification::Hard);
        CHECK(entry.code == FaultCode::F1_ALGORITHM);
        CHECK(entry.sessions_failed == 2);
    }
    CHECK(found);
    CHECK(exit_code_for(batch.consolidated) == 1);

    // Byte-identical on a rerun.
    BatchResult again = run_sessions(config);
    CHECK(to_json(again.consolidated) == to_json(batch.consolidated));
    CHECK(again.sessions[0].trace_text == batch.sessions[0].trace_text);
}

TEST_CASE("loop mode re-arms monitoring and keeps reporting") {
    SessionConfig config;
    config.scenario = find_builtin_scenario("conv_random_always");
    config.horizon_ms = 30000;
    config.loop_after_report = true;
    config.stimuli.clear();

    BatchResult batch = run_sessions(config);
    REQUIRE(batch.sessions.size() == 1);
    const auto& goal_log = batch.sessions[0].goal_log;

    int reports = 0;
    for (const auto& entry : goal_log)
        if (entry.goal == GoalKind::Report && entry.status == GoalStatus::Achieved) ++reports;
    CHECK(reports > 1);
    // The final watch is closed out at the horizon, not left hanging.
    CHECK(goal_log.back().goal == GoalKind::Monitor);
    CHECK(goal_log.back().status == GoalStatus::Achieved);
}

TEST_CASE("explain renders one line per subject grouped by severity") {
    SessionConfig config;
    config.scenario = find_builtin_scenario("sensor_dead");
    config.horizon_ms = 5000;
    config.stimuli.clear();

    BatchResult batch = run_sessions(config);
    std::string text = explain_text(batch.consolidated);
    CHECK(text.find("diagnosis over 1 session(s)") == 0);
    CHECK(text.find("hard faults:") != std::string::npos);
    CHECK(text.find("Z_TEMPERATURE: F2_NO_RESPONSE (failed 1/1 sessions") !=
          std::string::npos);
    CHECK(text.find("possible suspects:") != std::string::npos);
    CHECK(text.find("Z_SWITCHES") != std::string::npos);
    CHECK(text.find("never exercised") != std::string::npos);
    CHECK(text.find("clear:") != std::string::npos);
    CHECK(exit_code_for(batch.consolidated) == 1);

    SUBCASE("an all-clear verdict says so") {
        SessionConfig healthy;
        healthy.horizon_ms = 61000;
        healthy.stimuli = {{{"Z_SWITCHES", "CMD_UP"}, 10000}};
        BatchResult clean = run_sessions(healthy);
        CHECK(exit_code_for(clean.consolidated) == 0);
        std::string verdict = explain_text(clean.consolidated);
        CHECK(verdict.find("all monitored blocks clear") != std::string::npos);
        CHECK(verdict.find("hard faults:") == std::string::npos);
    }
}
