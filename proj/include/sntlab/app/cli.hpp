#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sntlab/scenario.hpp"

namespace sntlab::app {

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitUsage = 2, kExitInfeasible = 3 };

enum class Verb { solve, truth, simulate, summarize, describe, plot_data };

struct Command {
    Verb verb = Verb::simulate;
    std::vector<ScenarioId> scenarios;  // empty selects all four
    std::optional<double> pi;
    std::optional<std::uint64_t> reps;
    std::optional<std::uint64_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> superpop;
    std::optional<CalWeightMode> cal_weights;
    std::optional<double> truth_override;
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> in;
};

struct ParseResult {
    std::optional<Command> command;  // empty when the process should exit
    int exit_code = kExitOk;
    std::string message;  // usage error or help text
};

/// Parses arguments after the program name, e.g. {"simulate", "--reps", "10"}.
ParseResult parse_args(std::span<const std::string> args);

/// Runs a parsed command. Progress and errors go to `log`.
int execute(const Command& cmd, std::ostream& log);

/// parse_args followed by execute; help goes to `out`, diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sntlab::app
