#pragma once

#include <random>
#include <variant>

#include "fbdiag/harness.hpp"
#include "fbdiag/runtime.hpp"

namespace fbdiag {

// One uniform double in [0, 1): top 53 bits of one engine draw. Hand-rolled
// so traces stay byte-identical across standard library implementations.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Ambient temperature (degrees Fahrenheit) over logical time, piecewise
// linear between anchor points and clamped outside them.
class TempProfile {
public:
    TempProfile() : TempProfile(72.0) {}
    explicit TempProfile(double constant_deg_f);
    // Anchors must be strictly increasing in time; at least one required.
    explicit TempProfile(std::vector<std::pair<LogicalTime, double>> anchors);

    static TempProfile ramp(LogicalTime start, double start_deg_f, LogicalTime end,
                            double end_deg_f);

    double at(LogicalTime t) const;

private:
    std::vector<std::pair<LogicalTime, double>> anchors_;
};

struct AlgorithmRandomInRange {
    double lo = 0;   // input range (first data input, declaration order)
    double hi = 0;
    double probability = 1.0;
};
struct StuckSensor {
    double value = 0;
};
struct DeadSource {};
struct OutputOffset {
    double delta = 0;
};

// Seeded, behavior-local fault effects. Application topology is never
// touched; all randomness flows through the runtime's engine.
struct FaultScenario {
    using AlgorithmRandomInRange = fbdiag::AlgorithmRandomInRange;
    using StuckSensor = fbdiag::StuckSensor;
    using DeadSource = fbdiag::DeadSource;
    using OutputOffset = fbdiag::OutputOffset;
    using Kind = std::variant<AlgorithmRandomInRange, StuckSensor, DeadSource, OutputOffset>;

    std::string name;
    std::string target;  // fb instance name
    Kind kind;
};

std::string kind_name(const FaultScenario::Kind& kind);

std::vector<ValidationIssue> validate(const FaultScenario& scenario);

// Reads one .scn.xml document; throws ParseError / ValidationFailure.
FaultScenario parse_scenario(const std::string& xml_text);
std::string to_xml(const FaultScenario& scenario);

// Named scenarios selectable without a file, keyed by FaultScenario.name.
const std::vector<FaultScenario>& builtin_scenarios();
std::optional<FaultScenario> find_builtin_scenario(const std::string& name);

// Overlays the scenario's effect onto the target instance's behavior
// and/or source. Throws "unknown-target" when the target instance is
// missing or lacks the hook the fault kind needs.
void apply_fault(BehaviorRegistry& registry, const Application& app,
                 const FaultScenario& scenario);

// The shipped fixture: a five-block room controller whose sensor reads
// `profile`, plus its behavior registry and instrumentation packages.
struct RoomControllerFixture {
    Application app;
    BehaviorRegistry registry;
    std::vector<DiagnosticPackage> packages;
};

RoomControllerFixture build_room_controller(const TempProfile& profile = TempProfile());

// Occupant button presses injected into every session by default.
struct Stimulus {
    PortRef port;
    LogicalTime at = 0;
};

std::vector<Stimulus> default_stimulus_schedule();

}  // namespace fbdiag
