#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sntlab/analysis_result.hpp"
#include "sntlab/designs.hpp"
#include "sntlab/population.hpp"
#include "sntlab/scenario.hpp"

namespace sntlab {

/// Inverse probability of artificial censoring weights for follow-up years 1 and 2.
struct WeightSchedule {
    double w1 = 1.0;
    double w2 = 1.0;
};

class DegenerateWeight : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pr(remaining uncensored at the next visit | severity there) for an
/// untreated Visit-1 index. In `initiation` mode this is
/// 1 - Pr(decision point | L) * Pr(initiate | L) for both emulations;
/// `paper_simplified` drops the decision-point term for the calendar design.
double uncensored_probability(Severity next, const ScenarioSpec& spec, Design design, CalWeightMode mode);

/// Throws DegenerateWeight when censoring is certain.
WeightSchedule censoring_weights(const IndexRecord& rec, const ScenarioSpec& spec, Design design,
                                 CalWeightMode mode);

/// Weights for every index of a dataset. Records that leave the risk set
/// before year 2 get w2 = 1 since their year-2 weight is never applied.
std::vector<WeightSchedule> dataset_weights(const StudyDataset& ds, const ScenarioSpec& spec, CalWeightMode mode);

/// Weighted discrete product-limit risk by `tau` years for one arm, optionally
/// within one stratum of severity at index. Empty when no record is at risk
/// in year 1. An empty risk set in year 2 contributes a zero hazard.
std::optional<double> ipcw_km_risk(std::span<const IndexRecord> records, std::span<const WeightSchedule> weights,
                                   Arm arm, int tau, std::optional<Severity> stratum = std::nullopt);

struct TargetDistribution {
    double w_low = 0.0;
    double w_high = 0.0;

    double operator[](Severity s) const { return s == Severity::high ? w_high : w_low; }
};

enum class IndexSubset : std::uint8_t { all, treated };

/// Empirical severity-at-index shares; empty for an empty subset.
std::optional<TargetDistribution> severity_distribution(const StudyDataset& ds, IndexSubset subset);

/// Direct standardisation of stratum-specific weighted risks to `target`.
/// Strata with zero target weight are not required to be populated.
AnalysisResult standardized_rr(std::span<const IndexRecord> records, std::span<const WeightSchedule> weights,
                               const TargetDistribution& target);

/// Unstratified weighted risks in each arm.
AnalysisResult crude_rr(std::span<const IndexRecord> records, std::span<const WeightSchedule> weights);

/// Index counts by (arm, stratum, visit, next severity, outcome path). The
/// analysis battery works from this table; it is built with the count kernel.
class CellTable {
public:
    static constexpr std::size_t kCells = 64;

    enum class Path : std::uint8_t { event_year1 = 0, censored_year1 = 1, event_year2 = 2, event_free = 3 };

    static std::uint8_t code(const IndexRecord& rec);
    static std::uint8_t code(Arm arm, Severity stratum, int visit, Severity next, Path path);

    explicit CellTable(std::span<const IndexRecord> records);
    CellTable() = default;

    std::uint32_t count(std::uint8_t code) const { return counts_[code]; }
    std::uint64_t arm_total(Arm arm) const;

    /// Same estimator as ipcw_km_risk, evaluated from counts.
    std::optional<double> km_risk(const ScenarioSpec& spec, Design design, CalWeightMode mode, Arm arm,
                                  std::optional<Severity> stratum) const;

private:
    std::array<std::uint32_t, kCells> counts_{};
};

/// The 14-result battery for one replicate: SPT (true, crude, ATE/ATT to the
/// SPT) followed by each emulation (crude, ATE/ATT to its own indexes,
/// ATE/ATT to the SPT).
std::vector<AnalysisResult> analyze_replicate(std::span<const Individual> cohort, const StudyDataset& spt,
                                              const StudyDataset& cal, const StudyDataset& td,
                                              const ScenarioSpec& spec, CalWeightMode mode);

}  // namespace sntlab
