#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "sntlab/analysis_result.hpp"
#include "sntlab/designs.hpp"
#include "sntlab/hazard.hpp"
#include "sntlab/population.hpp"
#include "sntlab/scenario.hpp"

namespace sntlab {

struct ReplicateResult {
    ScenarioId scenario = ScenarioId::S1;
    std::uint64_t replicate = 0;  // 1-based
    std::vector<AnalysisResult> analyses;
    std::vector<DescribeRow> descriptives;
};

class ReplicateFailure : public std::runtime_error {
public:
    ReplicateFailure(std::uint64_t replicate, const std::string& what)
        : std::runtime_error("replicate " + std::to_string(replicate) + " failed: " + what), replicate_(replicate) {}
    std::uint64_t replicate() const { return replicate_; }

private:
    std::uint64_t replicate_;
};

/// Materialised superpopulation shared read-only by all replicates of a scenario.
using Pool = std::vector<Individual>;

/// Pool drawn from the scenario-level stream of `master_seed`.
Pool build_pool(const ScenarioSpec& spec, const HazardSet& h, std::uint64_t master_seed, std::size_t size);

/// One replicate: draw cohort, assign treatments, build the three designs,
/// analyse and describe. Fully determined by (master_seed, scenario, replicate).
ReplicateResult run_replicate(const ScenarioSpec& spec, const HazardSet& h, std::uint64_t replicate,
                              std::uint64_t master_seed, const RunConfig& config, const Pool* pool = nullptr);

/// Runs replicates 1..n_replicates across `config.parallelism` workers. The
/// result order and content do not depend on the worker count.
std::vector<ReplicateResult> run_scenario(const ScenarioSpec& spec, const HazardSet& h, const RunConfig& config,
                                          const Pool* pool = nullptr);

}  // namespace sntlab
