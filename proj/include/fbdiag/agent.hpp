#pragma once

#include <deque>
#include <set>

#include "fbdiag/beliefs.hpp"
#include "fbdiag/harness.hpp"

namespace fbdiag {

enum class GoalKind { Monitor, Diagnose, Analyse, Report };
enum class GoalStatus { Pending, Active, Achieved, Abandoned };

std::string goal_kind_name(GoalKind k);
std::string goal_status_name(GoalStatus s);

struct GoalLogEntry {
    LogicalTime time = 0;
    std::string agent;
    GoalKind goal = GoalKind::Monitor;
    GoalStatus status = GoalStatus::Pending;

    // time_ms<TAB>agent<TAB>goal<TAB>status
    std::string to_line() const;
};

struct Message {
    std::string from;
    std::string body;
};

// Buffered point-to-point messaging between named members. Delivery is
// FIFO per inbox; nothing is lost or reordered.
class Team {
public:
    void add_member(const std::string& name);
    bool has_member(const std::string& name) const;
    std::vector<std::string> members() const;

    // Throws "unknown-agent" when either end is not a member.
    void say(const std::string& from, const std::string& to, std::string body);
    // Oldest pending message, or nullopt when the inbox is empty.
    std::optional<Message> hear(const std::string& member);

private:
    std::map<std::string, std::deque<Message>> inboxes_;
};

// What "healthy" means for one application, phrased over its installed
// diagnostic points.
struct PeriodicSignalClause {
    int dp_id = 0;
    LogicalTime period_ms = 0;
    LogicalTime tolerance_ms = 0;
};

struct RateLimitClause {
    int dp_id = 0;
    double max_delta_per_minute = 0;  // same unit as the observed value
};

struct StimulusResponseClause {
    PortRef stimulus;      // event output whose instrumented path is watched
    int response_dp = 0;   // DP expected to see an event in time
    LogicalTime deadline_ms = 0;
};

struct NormalBehaviorProfile {
    std::vector<PeriodicSignalClause> periodic_signals;
    std::vector<RateLimitClause> rate_limits;
    std::vector<StimulusResponseClause> stimulus_response;
};

// The shipped room-controller profile: 500 ms telemetry on the sensor and
// converter pathways, a 0.3 degree/min drift ceiling on the zone output,
// and button presses answered within a second.
NormalBehaviorProfile default_room_profile();

struct Violation {
    LogicalTime time = 0;
    std::string clause;  // clause id, e.g. "periodic:DP1"
    int dp_id = 0;
    FaultCode code = FaultCode::F0_NONE;
    std::string detail;
};

struct TestOutcome {
    LogicalTime time = 0;
    std::string subject;
    std::string test;
    Outcome outcome = Outcome::Pass;
    FaultCode code = FaultCode::F0_NONE;
    std::string detail;
};

enum class Classification { Hard, Intermittent, Possible, Clear };

std::string classification_name(Classification c);

struct DiagnosisEntry {
    std::string subject;
    FaultCode code = FaultCode::F0_NONE;
    Classification classification = Classification::Clear;
};

struct SessionReport {
    int session_id = 0;
    std::uint64_t seed = 0;
    LogicalTime horizon_ms = 0;
    LogicalTime end_time_ms = 0;
    std::string diagnose_target;  // empty when the session stayed healthy
    std::vector<DynamicBelief> beliefs;         // per-block fault opinions
    std::vector<DynamicBelief> clause_beliefs;  // per-profile-clause health
    std::vector<BeliefTransition> transitions;
    std::vector<BeliefTransition> clause_transitions;
    std::vector<Violation> violations;
    std::vector<TestOutcome> test_outcomes;
    std::vector<DiagnosisEntry> diagnosis;
};

struct ConsolidatedEntry {
    std::string subject;
    Classification classification = Classification::Clear;
    FaultCode code = FaultCode::F0_NONE;
    int sessions_failed = 0;
    int sessions_run = 0;
    int pass_total = 0;
    int fail_total = 0;
};

struct ConsolidatedDiagnosis {
    int sessions_run = 0;
    std::vector<ConsolidatedEntry> entries;  // sorted by subject
};

// Cross-session classification: a subject condemned everywhere is a hard
// fault, condemned somewhere an intermittent one, affirmed-only subjects
// are clear, and never-exercised subjects stay possible suspects.
// Throws "empty-report-list" on an empty input.
ConsolidatedDiagnosis correlate(const std::vector<SessionReport>& reports);

// Sequential goal executor driving one diagnostic session: watch the
// application against its normal-behavior profile, and on a violation
// isolate the suspect pathway, exercise each testable block, and report.
class DiagnosticAgent {
public:
    DiagnosticAgent(std::string name, Team& team, std::string coordinator, Runtime& rt,
                    Harness& harness, NormalBehaviorProfile profile);

    const std::string& name() const { return name_; }
    const std::vector<InteractionBelief>& skills() const { return skills_; }
    const SystemBeliefGraph& graph() const { return graph_; }
    const BeliefStore& block_beliefs() const { return block_store_; }
    const BeliefStore& clause_beliefs() const { return clause_store_; }
    const std::vector<GoalLogEntry>& goal_log() const { return goal_log_; }
    const std::vector<Violation>& violations() const { return violations_; }
    const std::vector<TestOutcome>& test_outcomes() const { return test_outcomes_; }
    const std::string& diagnose_target() const { return diagnose_target_; }

    // Activates the Monitor goal.
    void start();

    // Advances the runtime one monitoring interval (100 ms), drains the
    // diagnostic points, and checks every profile clause. Violations mark
    // the clause belief False and are returned.
    std::vector<Violation> monitor_step();

    bool escalation_pending() const;

    // Abandons Monitor in favor of Diagnose targeted at the pathway
    // containing the first violated DP; notifies the coordinator.
    // Throws "no-violation" when every clause belief still stands.
    void escalate();

    // Isolates the target pathway, runs every package test against each
    // testable block on it (in path order, continuing past failures),
    // updates beliefs, reopens the gates. Throws "missing-package".
    std::vector<TestOutcome> diagnose(const std::vector<DiagnosticPackage>& packages);

    // Turns the belief store into fault candidates: condemned blocks are
    // hard findings, untested blocks stay possible ones.
    std::vector<DiagnosisEntry> analyse();

    // Assembles the session report and tells the coordinator.
    SessionReport report(int session_id, std::uint64_t seed, LogicalTime horizon_ms);

    // Healthy horizon end: Monitor goal Achieved.
    void finish_monitor();

    // Re-arms monitoring after a report (fresh clause beliefs and
    // telemetry state); block beliefs keep their session history.
    void reset_monitor();

private:
    struct PeriodicState {
        PeriodicSignalClause clause;
        std::string subject;
        std::string upstream_fb;
        std::optional<LogicalTime> last_capture;
        LogicalTime clean_since = 0;
    };
    struct RateState {
        RateLimitClause clause;
        std::string subject;
        std::string upstream_fb;
        std::deque<std::pair<LogicalTime, double>> samples;
        LogicalTime clean_since = 0;
    };
    struct StimulusState {
        StimulusResponseClause clause;
        std::string subject;
        int stimulus_dp = 0;
        std::string emitter_fb;
        std::string responder_fb;
        std::deque<LogicalTime> pending;
        std::vector<LogicalTime> responses;
    };

    void log_goal(GoalKind goal, GoalStatus status);
    void require_goal(GoalKind goal, GoalStatus status, const std::string& op) const;
    std::set<std::size_t> instrumented_connections() const;
    std::string dp_upstream_instance(int dp_id) const;
    std::vector<std::string> target_path_for(int dp_id) const;
    bool is_testable(const std::string& fb) const;
    TestOutcome run_test(const std::string& fb, const TestCase& tc);

    std::string name_;
    Team* team_;
    std::string coordinator_;
    Runtime* rt_;
    Harness* harness_;
    NormalBehaviorProfile profile_;

    std::vector<InteractionBelief> skills_;
    SystemBeliefGraph graph_;
    BeliefStore block_store_;
    BeliefStore clause_store_;

    std::vector<PeriodicState> periodic_;
    std::vector<RateState> rates_;
    std::vector<StimulusState> stimuli_;
    std::deque<LogicalTime> command_times_;  // stimulus events seen (rate context)
    LogicalTime watch_start_ = 0;

    GoalKind current_goal_ = GoalKind::Monitor;
    GoalStatus current_status_ = GoalStatus::Pending;
    std::vector<GoalLogEntry> goal_log_;

    std::vector<Violation> violations_;
    std::size_t monitor_epoch_start_ = 0;  // first violation index of this watch
    std::vector<TestOutcome> test_outcomes_;
    std::vector<DiagnosisEntry> diagnosis_;
    std::vector<std::string> target_path_;
    std::string diagnose_target_;
};

}  // namespace fbdiag
