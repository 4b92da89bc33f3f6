#include "fbdiag/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fbdiag {

namespace {

constexpr LogicalTime kMonitorIntervalMs = 100;
constexpr LogicalTime kSlidingWindowMs = 60000;
constexpr LogicalTime kAffirmIntervalMs = 60000;
constexpr LogicalTime kTestBudgetMs = 1000;
// Drift below this is attributed to sensor noise, not a real rate change.
constexpr double kNoiseBoundDeg = 0.05;
constexpr double kRateEpsilon = 1e-9;

}  // namespace

std::string goal_kind_name(GoalKind k) {
    switch (k) {
        case GoalKind::Monitor: return "Monitor";
        case GoalKind::Diagnose: return "Diagnose";
        case GoalKind::Analyse: return "Analyse";
        case GoalKind::Report: return "Report";
    }
    return "Monitor";
}

std::string goal_status_name(GoalStatus s) {
    switch (s) {
        case GoalStatus::Pending: return "Pending";
        case GoalStatus::Active: return "Active";
        case GoalStatus::Achieved: return "Achieved";
        case GoalStatus::Abandoned: return "Abandoned";
    }
    return "Pending";
}

std::string GoalLogEntry::to_line() const {
    return std::to_string(time) + "\t" + agent + "\t" + goal_kind_name(goal) + "\t" +
           goal_status_name(status);
}

std::string classification_name(Classification c) {
    switch (c) {
        case Classification::Hard: return "Hard";
        case Classification::Intermittent: return "Intermittent";
        case Classification::Possible: return "Possible";
        case Classification::Clear: return "Clear";
    }
    return "Clear";
}

void Team::add_member(const std::string& name) { inboxes_.try_emplace(name); }

bool Team::has_member(const std::string& name) const { return inboxes_.count(name) != 0; }

std::vector<std::string> Team::members() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : inboxes_) out.push_back(name);
    return out;
}

void Team::say(const std::string& from, const std::string& to, std::string body) {
    if (!has_member(from))
        throw OperationError("unknown-agent", "'" + from + "' is not a team member");
    auto it = inboxes_.find(to);
    if (it == inboxes_.end())
        throw OperationError("unknown-agent", "'" + to + "' is not a team member");
    it->second.push_back({from, std::move(body)});
}

std::optional<Message> Team::hear(const std::string& member) {
    auto it = inboxes_.find(member);
    if (it == inboxes_.end())
        throw OperationError("unknown-agent", "'" + member + "' is not a team member");
    if (it->second.empty()) return std::nullopt;
    Message msg = std::move(it->second.front());
    it->second.pop_front();
    return msg;
}

NormalBehaviorProfile default_room_profile() {
    NormalBehaviorProfile profile;
    profile.periodic_signals = {{1, 500, 100}, {2, 500, 100}};
    profile.rate_limits = {{7, 0.3}};
    profile.stimulus_response = {
        {{"Z_SWITCHES", "CMD_UP"}, 6, 1000},
        {{"Z_SWITCHES", "CMD_DOWN"}, 6, 1000},
    };
    return profile;
}

DiagnosticAgent::DiagnosticAgent(std::string name, Team& team, std::string coordinator,
                                 Runtime& rt, Harness& harness, NormalBehaviorProfile profile)
    : name_(std::move(name)),
      team_(&team),
      coordinator_(std::move(coordinator)),
      rt_(&rt),
      harness_(&harness),
      profile_(std::move(profile)) {
    team_->add_member(name_);
    team_->add_member(coordinator_);
    skills_ = default_skills(name_);

    const Application& app = rt_->application();
    graph_ = graph_from_application(app);
    for (int id : harness_->dp_ids()) {
        const DiagnosticPoint* dp = harness_->find(id);
        if (dp->data_connection()) annotate_dp(graph_, app, id, *dp->data_connection());
        if (dp->event_connection()) annotate_dp(graph_, app, id, *dp->event_connection());
    }

    // One fault opinion per block that drives an instrumented connection:
    // those are the blocks whose output behavior the harness can witness.
    std::set<std::string> subjects;
    for (std::size_t ci : instrumented_connections())
        subjects.insert(app.connections[ci].source.instance);
    for (const auto& subject : subjects) block_store_.plan(subject);

    for (const auto& clause : profile_.periodic_signals) {
        if (!harness_->find(clause.dp_id))
            throw OperationError("unknown-dp", "periodic clause names uninstalled DP" +
                                                   std::to_string(clause.dp_id));
        PeriodicState state;
        state.clause = clause;
        state.subject = "periodic:DP" + std::to_string(clause.dp_id);
        state.upstream_fb = dp_upstream_instance(clause.dp_id);
        periodic_.push_back(std::move(state));
    }
    for (const auto& clause : profile_.rate_limits) {
        if (!harness_->find(clause.dp_id))
            throw OperationError("unknown-dp", "rate clause names uninstalled DP" +
                                                   std::to_string(clause.dp_id));
        RateState state;
        state.clause = clause;
        state.subject = "rate:DP" + std::to_string(clause.dp_id);
        state.upstream_fb = dp_upstream_instance(clause.dp_id);
        rates_.push_back(std::move(state));
    }
    for (const auto& clause : profile_.stimulus_response) {
        StimulusState state;
        state.clause = clause;
        bool found = false;
        for (int id : harness_->dp_ids()) {
            const DiagnosticPoint* dp = harness_->find(id);
            if (!dp->event_connection()) continue;
            if (app.connections[*dp->event_connection()].source == clause.stimulus) {
                state.stimulus_dp = id;
                found = true;
                break;
            }
        }
        if (!found)
            throw OperationError("unknown-dp", "no instrumented connection leaves " +
                                                   clause.stimulus.to_string());
        const DiagnosticPoint* response = harness_->find(clause.response_dp);
        if (!response || !response->event_connection())
            throw OperationError("unknown-dp", "stimulus clause expects events at DP" +
                                                   std::to_string(clause.response_dp));
        state.subject = "stimulus:DP" + std::to_string(state.stimulus_dp) + "->DP" +
                        std::to_string(clause.response_dp);
        state.emitter_fb = clause.stimulus.instance;
        state.responder_fb =
            app.connections[*response->event_connection()].source.instance;
        stimuli_.push_back(std::move(state));
    }
    for (const auto& p : periodic_) clause_store_.plan(p.subject);
    for (const auto& r : rates_) clause_store_.plan(r.subject);
    for (const auto& s : stimuli_) clause_store_.plan(s.subject);
}

void DiagnosticAgent::log_goal(GoalKind goal, GoalStatus status) {
    current_goal_ = goal;
    current_status_ = status;
    goal_log_.push_back({rt_->now(), name_, goal, status});
}

void DiagnosticAgent::require_goal(GoalKind goal, GoalStatus status,
                                   const std::string& op) const {
    if (current_goal_ != goal || current_status_ != status)
        throw OperationError("goal-order", op + " requires goal " + goal_kind_name(goal) + "/" +
                                               goal_status_name(status) + ", but the agent is " +
                                               "at " + goal_kind_name(current_goal_) + "/" +
                                               goal_status_name(current_status_));
}

std::set<std::size_t> DiagnosticAgent::instrumented_connections() const {
    std::set<std::size_t> out;
    for (int id : harness_->dp_ids()) {
        const DiagnosticPoint* dp = harness_->find(id);
        if (dp->data_connection()) out.insert(*dp->data_connection());
        if (dp->event_connection()) out.insert(*dp->event_connection());
    }
    return out;
}

std::string DiagnosticAgent::dp_upstream_instance(int dp_id) const {
    const DiagnosticPoint* dp = harness_->find(dp_id);
    std::size_t ci = dp->data_connection() ? *dp->data_connection() : *dp->event_connection();
    return rt_->application().connections[ci].source.instance;
}

void DiagnosticAgent::start() {
    require_goal(GoalKind::Monitor, GoalStatus::Pending, "start");
    log_goal(GoalKind::Monitor, GoalStatus::Pending);
    log_goal(GoalKind::Monitor, GoalStatus::Active);
    watch_start_ = rt_->now();
    for (auto& p : periodic_) p.clean_since = watch_start_;
    for (auto& r : rates_) r.clean_since = watch_start_;
}

std::vector<Violation> DiagnosticAgent::monitor_step() {
    require_goal(GoalKind::Monitor, GoalStatus::Active, "monitor_step");
    rt_->run_until(rt_->now() + kMonitorIntervalMs);
    LogicalTime now = rt_->now();

    for (int id : harness_->dp_ids()) {
        std::vector<CaptureRecord> records = harness_->read(id);
        for (const auto& rec : records) {
            if (rec.injected) continue;
            bool is_data = rec.event.payload.has_value();
            for (auto& p : periodic_) {
                if (p.clause.dp_id == id && is_data) {
                    if (!p.last_capture || rec.event.time > *p.last_capture)
                        p.last_capture = rec.event.time;
                }
            }
            for (auto& r : rates_) {
                if (r.clause.dp_id == id && is_data) {
                    if (const double* v = std::get_if<double>(&*rec.event.payload))
                        r.samples.emplace_back(rec.event.time, *v);
                }
            }
            for (auto& s : stimuli_) {
                if (s.stimulus_dp == id && !is_data) {
                    s.pending.push_back(rec.event.time);
                    command_times_.push_back(rec.event.time);
                }
                if (s.clause.response_dp == id && !is_data)
                    s.responses.push_back(rec.event.time);
            }
        }
    }

    std::vector<Violation> fresh;
    auto violate = [&](const std::string& subject, int dp, FaultCode code, std::string detail) {
        fresh.push_back({now, subject, dp, code, detail});
        clause_store_.update_veracity(subject, code, Outcome::Fail, now, std::move(detail));
    };

    // Periodic liveness. All clauses violated at the same step are judged
    // together afterwards: only the most upstream silent block is blamed,
    // everything after it is starved rather than broken.
    std::vector<std::string> silent_upstream;
    for (auto& p : periodic_) {
        if (clause_store_.belief(p.subject).veracity == Veracity::False) continue;
        LogicalTime base = p.last_capture.value_or(watch_start_);
        LogicalTime deadline = base + p.clause.period_ms + p.clause.tolerance_ms;
        if (now >= deadline) {
            violate(p.subject, p.clause.dp_id, FaultCode::F2_NO_RESPONSE,
                    p.last_capture
                        ? "no capture since t=" + std::to_string(*p.last_capture)
                        : "no capture since watch start");
            silent_upstream.push_back(p.upstream_fb);
        }
    }
    for (const auto& fb : silent_upstream) {
        bool starved = false;
        for (const auto& other : silent_upstream) {
            if (other == fb) continue;
            auto path = data_path(graph_, other, fb);
            if (path && path->size() > 1) {
                starved = true;
                break;
            }
        }
        if (!starved)
            block_store_.update_veracity(fb, FaultCode::F2_NO_RESPONSE, Outcome::Fail, now,
                                         "periodic telemetry lost");
    }

    while (!command_times_.empty() && command_times_.front() < now - kSlidingWindowMs)
        command_times_.pop_front();

    for (auto& r : rates_) {
        while (!r.samples.empty() && r.samples.front().first < now - kSlidingWindowMs)
            r.samples.pop_front();
        if (clause_store_.belief(r.subject).veracity == Veracity::False) continue;
        if (r.samples.size() < 2) continue;
        double drift = std::fabs(r.samples.back().second - r.samples.front().second);
        bool command_in_flight = !command_times_.empty();
        double limit =
            command_in_flight ? r.clause.max_delta_per_minute + kRateEpsilon : kNoiseBoundDeg;
        if (drift > limit) {
            violate(r.subject, r.clause.dp_id, FaultCode::F3_OUT_OF_TOLERANCE,
                    "drift " + value_to_text(Value{drift}) + " over " +
                        std::to_string(kSlidingWindowMs) + "ms window" +
                        (command_in_flight ? " (setpoint change in flight)" : ""));
            // A rate breach localizes poorly: any block on the pathway can
            // distort the value, so no single block is condemned here.
        }
    }

    for (auto& s : stimuli_) {
        while (!s.pending.empty()) {
            LogicalTime sent = s.pending.front();
            // The runtime propagates events in zero logical time, so a commanded
            // response is observable at the command instant itself. Traffic at
            // the same port at other instants is periodic telemetry, not an
            // answer; accepting it would mask a broken command path. The
            // deadline still sets how long the monitor waits before declaring
            // the miss.
            bool answered = false;
            for (LogicalTime r : s.responses) {
                if (r == sent) {
                    answered = true;
                    break;
                }
            }
            if (answered) {
                clause_store_.update_veracity(s.subject, FaultCode::F0_NONE, Outcome::Pass, now,
                                              "stimulus answered");
                block_store_.update_veracity(s.emitter_fb, FaultCode::F0_NONE, Outcome::Pass,
                                             now, s.subject + " emitted");
                block_store_.update_veracity(s.responder_fb, FaultCode::F0_NONE, Outcome::Pass,
                                             now, s.subject + " answered");
                s.pending.pop_front();
                continue;
            }
            if (now > sent + s.clause.deadline_ms) {
                violate(s.subject, s.clause.response_dp, FaultCode::F2_NO_RESPONSE,
                        "stimulus at t=" + std::to_string(sent) + " unanswered");
                block_store_.update_veracity(s.responder_fb, FaultCode::F2_NO_RESPONSE,
                                             Outcome::Fail, now, s.subject + " unanswered");
                s.pending.pop_front();
                continue;
            }
            break;  // still inside the deadline; check again next step
        }
        while (!s.responses.empty() && s.responses.front() < now - kSlidingWindowMs)
            s.responses.erase(s.responses.begin());
    }

    // A clause that stayed clean for a full window quietly reinforces the
    // belief in the block feeding it.
    for (auto& p : periodic_) {
        if (clause_store_.belief(p.subject).veracity == Veracity::False) continue;
        bool alive = p.last_capture &&
                     now - *p.last_capture <= p.clause.period_ms + p.clause.tolerance_ms;
        if (alive && now - p.clean_since >= kAffirmIntervalMs) {
            clause_store_.update_veracity(p.subject, FaultCode::F0_NONE, Outcome::Pass, now,
                                          "clean window");
            block_store_.update_veracity(p.upstream_fb, FaultCode::F0_NONE, Outcome::Pass, now,
                                         p.subject + " clean window");
            p.clean_since = now;
        }
    }
    for (auto& r : rates_) {
        if (clause_store_.belief(r.subject).veracity == Veracity::False) continue;
        if (r.samples.size() >= 2 && now - r.clean_since >= kAffirmIntervalMs) {
            clause_store_.update_veracity(r.subject, FaultCode::F0_NONE, Outcome::Pass, now,
                                          "clean window");
            block_store_.update_veracity(r.upstream_fb, FaultCode::F0_NONE, Outcome::Pass, now,
                                         r.subject + " clean window");
            r.clean_since = now;
        }
    }

    violations_.insert(violations_.end(), fresh.begin(), fresh.end());
    return fresh;
}

bool DiagnosticAgent::escalation_pending() const {
    for (const auto& b : clause_store_.snapshot())
        if (b.veracity == Veracity::False) return true;
    return false;
}

std::vector<std::string> DiagnosticAgent::target_path_for(int dp_id) const {
    std::string current = dp_upstream_instance(dp_id);

    std::set<std::string> visited{current};
    for (;;) {
        auto incoming = upstream(graph_, current);
        std::vector<std::string> feeders;
        for (const auto& edge : incoming)
            if (edge.trg.kind == ConnectionKind::Data) feeders.push_back(edge.fb1);
        std::sort(feeders.begin(), feeders.end());
        if (feeders.empty() || visited.count(feeders.front())) break;
        current = feeders.front();
        visited.insert(current);
    }

    auto instrumented = instrumented_connections();
    const Application& app = rt_->application();
    auto has_instrumented_output = [&](const std::string& fb) {
        for (std::size_t ci : instrumented)
            if (app.connections[ci].source.instance == fb) return true;
        return false;
    };

    std::vector<std::string> path{current};
    std::set<std::string> on_path{current};
    for (;;) {
        auto outgoing = downstream(graph_, current);
        std::vector<std::string> consumers;
        for (const auto& edge : outgoing)
            if (edge.trg.kind == ConnectionKind::Data && !on_path.count(edge.fb2))
                consumers.push_back(edge.fb2);
        std::sort(consumers.begin(), consumers.end());
        if (consumers.empty() || !has_instrumented_output(consumers.front())) break;
        current = consumers.front();
        path.push_back(current);
        on_path.insert(current);
    }
    return path;
}

void DiagnosticAgent::escalate() {
    require_goal(GoalKind::Monitor, GoalStatus::Active, "escalate");
    if (!escalation_pending() || monitor_epoch_start_ >= violations_.size())
        throw OperationError("no-violation", "every profile clause still stands");

    const Violation& first = violations_[monitor_epoch_start_];
    target_path_ = target_path_for(first.dp_id);
    std::string target;
    for (const auto& fb : target_path_) {
        if (!target.empty()) target += ">";
        target += fb;
    }
    diagnose_target_ = target;

    log_goal(GoalKind::Monitor, GoalStatus::Abandoned);
    log_goal(GoalKind::Diagnose, GoalStatus::Pending);
    log_goal(GoalKind::Diagnose, GoalStatus::Active);
    team_->say(name_, coordinator_,
               "abandoning Monitor: " + first.clause + " violated at t=" +
                   std::to_string(first.time) + "; diagnosing " + diagnose_target_);
}

bool DiagnosticAgent::is_testable(const std::string& fb) const {
    const Application& app = rt_->application();
    bool event_in = false;
    bool output = false;
    for (std::size_t ci : instrumented_connections()) {
        const Connection& conn = app.connections[ci];
        if (conn.kind == ConnectionKind::Event && conn.destination.instance == fb)
            event_in = true;
        if (conn.source.instance == fb) output = true;
    }
    return event_in && output;
}

TestOutcome DiagnosticAgent::run_test(const std::string& fb, const TestCase& tc) {
    harness_->read(tc.inject_at);
    harness_->read(tc.expect_at);

    LogicalTime t0 = rt_->now();
    harness_->trigger(tc.inject_at, tc.value, tc.fire_event, t0);
    LogicalTime window = tc.expect_no_output ? tc.expect_no_output->within_ms : kTestBudgetMs;
    rt_->run_until(t0 + window);

    std::vector<CaptureRecord> observed;
    for (auto& rec : harness_->read(tc.expect_at))
        if (!rec.injected) observed.push_back(std::move(rec));

    TestOutcome result;
    result.time = rt_->now();
    result.subject = fb;
    result.test = tc.name;

    if (tc.expect_value) {
        const double expected = tc.expect_value->expected;
        const double tolerance = tc.expect_value->tolerance;
        std::optional<double> first_seen;
        for (const auto& rec : observed) {
            if (!rec.event.payload) continue;
            const double* v = std::get_if<double>(&*rec.event.payload);
            if (!v) continue;
            if (!first_seen) first_seen = *v;
            if (std::fabs(*v - expected) <= tolerance) {
                result.outcome = Outcome::Pass;
                result.detail = "observed " + value_to_text(*rec.event.payload);
                return result;
            }
        }
        result.outcome = Outcome::Fail;
        if (first_seen) {
            result.code = FaultCode::F1_ALGORITHM;
            result.detail = "expected " + value_to_text(Value{expected}) + ", observed " +
                            value_to_text(Value{*first_seen});
        } else {
            result.code = FaultCode::F2_NO_RESPONSE;
            result.detail = "no data response within " + std::to_string(window) + "ms";
        }
        return result;
    }

    if (tc.expect_event) {
        bool data_flowed = false;
        for (const auto& rec : observed) {
            if (rec.event.payload) {
                data_flowed = true;
                continue;
            }
            if (rec.event.port == tc.expect_event->port) {
                result.outcome = Outcome::Pass;
                result.detail = "event " + tc.expect_event->port + " at t=" +
                                std::to_string(rec.event.time);
                return result;
            }
        }
        result.outcome = Outcome::Fail;
        if (data_flowed) {
            result.code = FaultCode::F5_EVENT_PATH_BROKEN;
            result.detail = "no " + tc.expect_event->port + " event though data flowed";
        } else {
            result.code = FaultCode::F2_NO_RESPONSE;
            result.detail =
                "no " + tc.expect_event->port + " event within " + std::to_string(window) + "ms";
        }
        return result;
    }

    if (observed.empty()) {
        result.outcome = Outcome::Pass;
        result.detail = "silent for " + std::to_string(window) + "ms";
    } else {
        result.outcome = Outcome::Fail;
        result.code = FaultCode::F1_ALGORITHM;
        result.detail = "unexpected output " + (observed.front().event.payload
                                                    ? value_to_text(*observed.front().event.payload)
                                                    : observed.front().event.port);
    }
    return result;
}

std::vector<TestOutcome> DiagnosticAgent::diagnose(
    const std::vector<DiagnosticPackage>& packages) {
    require_goal(GoalKind::Diagnose, GoalStatus::Active, "diagnose");
    const Application& app = rt_->application();

    std::set<std::string> on_path(target_path_.begin(), target_path_.end());
    std::vector<int> closed;
    for (int id : harness_->dp_ids()) {
        const DiagnosticPoint* dp = harness_->find(id);
        bool touches = false;
        for (auto ci : {dp->data_connection(), dp->event_connection()}) {
            if (!ci) continue;
            const Connection& conn = app.connections[*ci];
            if (on_path.count(conn.source.instance) || on_path.count(conn.destination.instance))
                touches = true;
        }
        if (touches) {
            harness_->gate_close(id);
            closed.push_back(id);
        }
    }

    std::vector<TestOutcome> outcomes;
    try {
        for (const auto& fb : target_path_) {
            if (!is_testable(fb)) continue;  // e.g. a bare periodic source

            const FbType* type = app.type_of(fb);
            const DiagnosticPackage* package = nullptr;
            for (const auto& p : packages)
                if (p.fb_type_name == type->name) package = &p;
            if (!package)
                throw OperationError("missing-package",
                                     "no diagnostic package for type '" + type->name + "'");

            for (const auto& tc : package->tests) {
                TestOutcome outcome = run_test(fb, tc);
                block_store_.update_veracity(fb, outcome.code, outcome.outcome, outcome.time,
                                             tc.name);
                if (outcome.outcome == Outcome::Fail &&
                    outcome.code == FaultCode::F5_EVENT_PATH_BROKEN) {
                    const DiagnosticPoint* expect_dp = harness_->find(tc.expect_at);
                    if (expect_dp && expect_dp->event_connection()) {
                        const Connection& conn =
                            app.connections[*expect_dp->event_connection()];
                        if (SystemBelief* edge =
                                find_edge(graph_, conn.source, conn.destination.instance))
                            edge->veracity = Veracity::False;
                    }
                }
                outcomes.push_back(std::move(outcome));
            }
        }
    } catch (...) {
        for (int id : closed) harness_->gate_open(id);
        throw;
    }
    for (int id : closed) harness_->gate_open(id);

    log_goal(GoalKind::Diagnose, GoalStatus::Achieved);
    test_outcomes_.insert(test_outcomes_.end(), outcomes.begin(), outcomes.end());
    return outcomes;
}

std::vector<DiagnosisEntry> DiagnosticAgent::analyse() {
    require_goal(GoalKind::Diagnose, GoalStatus::Achieved, "analyse");
    log_goal(GoalKind::Analyse, GoalStatus::Pending);
    log_goal(GoalKind::Analyse, GoalStatus::Active);

    diagnosis_.clear();
    for (const auto& b : block_store_.snapshot()) {
        if (b.veracity == Veracity::False) {
            diagnosis_.push_back({b.subject, b.fault_code, Classification::Hard});
        } else if (b.veracity == Veracity::Undetermined) {
            // Never exercised. A bare periodic source points at the sensor
            // behind it; anything else is merely unproven.
            bool sensor = graph_.nodes.at(b.subject).type.source_period_ms.has_value();
            diagnosis_.push_back({b.subject,
                                  sensor ? FaultCode::F4_SENSOR_SUSPECTED : FaultCode::F0_NONE,
                                  Classification::Possible});
        }
    }

    log_goal(GoalKind::Analyse, GoalStatus::Achieved);
    return diagnosis_;
}

SessionReport DiagnosticAgent::report(int session_id, std::uint64_t seed,
                                      LogicalTime horizon_ms) {
    require_goal(GoalKind::Analyse, GoalStatus::Achieved, "report");
    log_goal(GoalKind::Report, GoalStatus::Pending);
    log_goal(GoalKind::Report, GoalStatus::Active);

    SessionReport out;
    out.session_id = session_id;
    out.seed = seed;
    out.horizon_ms = horizon_ms;
    out.end_time_ms = rt_->now();
    out.diagnose_target = diagnose_target_;
    out.beliefs = block_store_.snapshot();
    out.clause_beliefs = clause_store_.snapshot();
    out.transitions = block_store_.transitions();
    out.clause_transitions = clause_store_.transitions();
    out.violations = violations_;
    out.test_outcomes = test_outcomes_;
    out.diagnosis = diagnosis_;

    int findings = 0;
    for (const auto& entry : diagnosis_)
        if (entry.classification != Classification::Clear) ++findings;
    team_->say(name_, coordinator_,
               "session " + std::to_string(session_id) + " report: " +
                   std::to_string(findings) + " finding(s)");

    log_goal(GoalKind::Report, GoalStatus::Achieved);
    return out;
}

void DiagnosticAgent::finish_monitor() {
    require_goal(GoalKind::Monitor, GoalStatus::Active, "finish_monitor");
    log_goal(GoalKind::Monitor, GoalStatus::Achieved);
}

void DiagnosticAgent::reset_monitor() {
    require_goal(GoalKind::Report, GoalStatus::Achieved, "reset_monitor");

    clause_store_ = BeliefStore{};
    for (const auto& p : periodic_) clause_store_.plan(p.subject);
    for (const auto& r : rates_) clause_store_.plan(r.subject);
    for (const auto& s : stimuli_) clause_store_.plan(s.subject);

    watch_start_ = rt_->now();
    for (auto& p : periodic_) {
        p.last_capture.reset();
        p.clean_since = watch_start_;
    }
    for (auto& r : rates_) {
        r.samples.clear();
        r.clean_since = watch_start_;
    }
    for (auto& s : stimuli_) {
        s.pending.clear();
        s.responses.clear();
    }
    command_times_.clear();
    monitor_epoch_start_ = violations_.size();

    log_goal(GoalKind::Monitor, GoalStatus::Pending);
    log_goal(GoalKind::Monitor, GoalStatus::Active);
}

ConsolidatedDiagnosis correlate(const std::vector<SessionReport>& reports) {
    if (reports.empty())
        throw OperationError("empty-report-list", "correlation needs at least one report");

    std::set<std::string> subjects;
    for (const auto& report : reports)
        for (const auto& b : report.beliefs) subjects.insert(b.subject);

    ConsolidatedDiagnosis out;
    out.sessions_run = static_cast<int>(reports.size());

    for (const auto& subject : subjects) {
        ConsolidatedEntry entry;
        entry.subject = subject;
        entry.sessions_run = out.sessions_run;

        FaultCode first_fail_code = FaultCode::F0_NONE;
        for (const auto& report : reports) {
            for (const auto& b : report.beliefs) {
                if (b.subject != subject) continue;
                entry.pass_total += b.pass_count;
                entry.fail_total += b.fail_count;
                if (b.veracity == Veracity::False) {
                    if (entry.sessions_failed == 0) first_fail_code = b.fault_code;
                    ++entry.sessions_failed;
                }
            }
        }

        if (entry.sessions_failed == entry.sessions_run) {
            entry.classification = Classification::Hard;
            entry.code = first_fail_code;
        } else if (entry.sessions_failed > 0) {
            entry.classification = Classification::Intermittent;
            entry.code = first_fail_code;
        } else if (entry.pass_total > 0) {
            entry.classification = Classification::Clear;
        } else {
            entry.classification = Classification::Possible;
            for (const auto& report : reports) {
                for (const auto& d : report.diagnosis) {
                    if (d.subject == subject && d.classification == Classification::Possible) {
                        entry.code = d.code;
                        break;
                    }
                }
                if (entry.code != FaultCode::F0_NONE) break;
            }
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

}  // namespace fbdiag
