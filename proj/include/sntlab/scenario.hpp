#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sntlab {

enum class Severity : std::uint8_t { low = 0, high = 1 };

inline constexpr int to_index(Severity s) { return static_cast<int>(s); }

enum class ScenarioId : std::uint8_t { S1 = 0, S2 = 1, S3 = 2, S4 = 3 };

std::string_view to_string(ScenarioId id);
std::optional<ScenarioId> parse_scenario_id(std::string_view text);
inline constexpr int ordinal(ScenarioId id) { return static_cast<int>(id); }

/// A probability (or ratio) indexed by severity: element 0 is low, 1 is high.
struct SeverityPair {
    double low = 0.0;
    double high = 0.0;

    double operator[](Severity s) const { return s == Severity::high ? high : low; }
    friend bool operator==(const SeverityPair&, const SeverityPair&) = default;
};

/// Generative parameters of one scenario.
struct ScenarioSpec {
    ScenarioId scenario_id = ScenarioId::S1;
    double baseline_high_prob = 0.25;
    double progression_prob = 0.60;
    SeverityPair decision_prob{0.3, 0.3};
    SeverityPair treat_prob{0.25, 0.75};
    double spt_treat_prob = 0.375;
    SeverityPair risk_untreated{0.15, 0.25};
    SeverityPair delta{0.7, 0.7};
    int horizon_tau = 2;
    int n_visits = 3;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

enum class CalWeightMode : std::uint8_t { initiation, paper_simplified };

std::string_view to_string(CalWeightMode mode);
std::optional<CalWeightMode> parse_cal_weight_mode(std::string_view text);

struct RunConfig {
    std::uint64_t n_individuals = 5000;
    std::uint64_t n_replicates = 5000;
    std::uint64_t master_seed = 20240501;
    unsigned parallelism = 1;
    std::filesystem::path output_dir = "runs";
    CalWeightMode cal_weight_mode = CalWeightMode::initiation;
    /// Size of a materialized superpopulation pool; 0 draws i.i.d. from the generative law.
    std::uint64_t superpop_size = 0;
    /// Replaces the enumerated truth as the bias reference when set.
    std::optional<double> truth_override;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr double kDefaultProgressionProb = 0.60;
/// Progression probability that best reproduces the index severity mix of the
/// homogeneous-effect scenarios. Infeasible for S2/S4.
inline constexpr double kCalibrationProgressionProb = 0.78;

/// The four built-in scenarios S1-S4.
std::vector<ScenarioSpec> builtin_scenarios(double progression_prob = kDefaultProgressionProb);
ScenarioSpec builtin_scenario(ScenarioId id, double progression_prob = kDefaultProgressionProb);

/// Empty iff every invariant holds.
std::vector<std::string> validate(const ScenarioSpec& spec);
std::vector<std::string> validate(const RunConfig& config);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadedConfig {
    std::vector<ScenarioSpec> scenarios;
    RunConfig run;
};

/// Parses the JSON config document. An empty document yields the defaults.
/// Throws ConfigError on parse or validation failure.
LoadedConfig parse_config(std::string_view text);
LoadedConfig load_config(const std::filesystem::path& path);

}  // namespace sntlab
