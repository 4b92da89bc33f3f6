#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fbdiag/session.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fbdiag::OperationError("unreadable-file", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// A scenario argument is a file when it looks like a path, otherwise the
// name of a shipped scenario.
fbdiag::FaultScenario resolve_scenario(const std::string& arg) {
    if (arg.find('/') != std::string::npos || arg.ends_with(".xml"))
        return fbdiag::parse_scenario(read_file(arg));
    if (auto builtin = fbdiag::find_builtin_scenario(arg)) return *builtin;
    std::string names;
    for (const auto& s : fbdiag::builtin_scenarios()) {
        if (!names.empty()) names += ", ";
        names += s.name;
    }
    throw fbdiag::OperationError("bad-config",
                                 "unknown scenario '" + arg + "' (shipped: " + names + ")");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"function-block runtime with an online diagnostic agent"};
    cli.require_subcommand(1);

    auto* run = cli.add_subcommand("run", "run monitored sessions and print the verdict");
    std::string app_path;
    std::vector<std::string> type_paths;
    std::string packages_dir;
    std::string scenario_arg;
    double fault_prob = 0;
    int sessions = 1;
    std::int64_t horizon_ms = 600000;
    std::uint64_t seed = 42;
    std::string out_dir;
    bool loop_after_report = false;

    run->add_option("--app", app_path,
                    "application document (.app.xml); shipped fixture when omitted")
        ->check(CLI::ExistingFile);
    run->add_option("--types", type_paths, "block type documents (.fbt.xml), repeatable")
        ->check(CLI::ExistingFile);
    run->add_option("--packages", packages_dir, "directory holding *.dpkg.xml")
        ->check(CLI::ExistingDirectory);
    run->add_option("--scenario", scenario_arg, "shipped scenario name, or a .scn.xml path");
    auto* prob_opt =
        run->add_option("--fault-prob", fault_prob, "probability override for a random fault")
            ->check(CLI::Range(0.0, 1.0));
    run->add_option("--sessions", sessions, "independent sessions to run")
        ->check(CLI::PositiveNumber);
    run->add_option("--horizon-ms", horizon_ms, "logical session length")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "seed of the first session; later ones add 1 each");
    run->add_option("--out", out_dir, "directory for reports, goal logs and traces");
    run->add_flag("--loop-after-report", loop_after_report,
                  "re-arm monitoring after a report instead of ending the session");

    auto* explain = cli.add_subcommand("explain", "pretty-print a consolidated report");
    std::string report_path;
    explain->add_option("report", report_path, "consolidated.json to read")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(cli, argc, argv);

    try {
        if (cli.got_subcommand(run)) {
            fbdiag::SessionConfig config;
            if (!app_path.empty()) config.app_path = app_path;
            config.type_paths = type_paths;
            if (!packages_dir.empty()) config.packages_dir = packages_dir;
            if (!scenario_arg.empty()) config.scenario = resolve_scenario(scenario_arg);
            if (prob_opt->count() > 0) config.fault_probability = fault_prob;
            config.sessions = sessions;
            config.horizon_ms = horizon_ms;
            config.seed = seed;
            if (!out_dir.empty()) config.out_dir = out_dir;
            config.loop_after_report = loop_after_report;

            fbdiag::BatchResult result = fbdiag::run_sessions(config);
            std::cout << fbdiag::explain_text(result.consolidated);
            return fbdiag::exit_code_for(result.consolidated);
        }

        fbdiag::ConsolidatedDiagnosis consolidated =
            fbdiag::consolidated_from_json(read_file(report_path));
        std::cout << fbdiag::explain_text(consolidated);
        return fbdiag::exit_code_for(consolidated);
    } catch (const fbdiag::ValidationFailure& e) {
        std::cerr << "validation failed:\n";
        for (const auto& issue : e.issues) std::cerr << "  " << issue.to_string() << "\n";
        return 2;
    } catch (const fbdiag::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
