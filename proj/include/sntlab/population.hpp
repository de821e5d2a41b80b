#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sntlab/analysis_result.hpp"
#include "sntlab/hazard.hpp"
#include "sntlab/random.hpp"
#include "sntlab/scenario.hpp"

namespace sntlab {

/// Treatment patterns over the two decision visits: never (0,0), late (0,1)
/// and always (1,1). The late pattern initiates at Visit 2.
enum class Pattern : std::uint8_t { never = 0, late = 1, always = 2 };

inline constexpr std::array<Pattern, 3> kPatterns{Pattern::never, Pattern::late, Pattern::always};

/// Arm a pattern applies at visit 1..3. Visit-2 treatment carries to Visit 3.
inline constexpr Arm arm_at(Pattern p, int visit) {
    if (p == Pattern::always) return Arm::treated;
    if (p == Pattern::late && visit >= 2) return Arm::treated;
    return Arm::untreated;
}

inline constexpr int kVisits = 3;
/// Random words consumed per individual (four Philox blocks).
inline constexpr std::size_t kWordsPerIndividual = 16;

struct Individual {
    std::uint32_t person_id = 0;
    std::array<Severity, kVisits> severity{};
    bool decision2 = false;
    /// po[visit - 1][arm]: outcome in the year following that visit.
    std::array<std::array<bool, 2>, kVisits> po{};
    /// Years from Visit 1 to the first outcome under each pattern (indexed by
    /// Pattern); empty if none occurs within the three observed years.
    std::array<std::optional<std::uint8_t>, 3> event_time{};

    Severity severity_at(int visit) const { return severity[static_cast<std::size_t>(visit - 1)]; }
    bool outcome(int visit, Arm a) const { return po[static_cast<std::size_t>(visit - 1)][static_cast<std::size_t>(a)]; }
    std::optional<int> time_under(Pattern p) const {
        const auto& t = event_time[static_cast<std::size_t>(p)];
        return t ? std::optional<int>(*t) : std::nullopt;
    }
};

/// Walks visits 1..3 under the pattern and returns the first year with an outcome.
std::optional<int> event_time_under_pattern(const Individual& ind, Pattern pattern);

/// Recomputes every pattern's event time from the potential outcomes.
void derive_event_times(Individual& ind);

/// Bernoulli thresholds for one (spec, hazards) pair.
struct DrawThresholds {
    std::uint64_t baseline_high = 0;
    std::uint64_t progression = 0;
    std::array<std::uint64_t, 2> decision{};
    std::array<std::array<std::uint64_t, 2>, 2> outcome{};  // [arm][severity]

    DrawThresholds(const ScenarioSpec& spec, const HazardSet& h);
};

/// Builds one individual from its 16 random words. Slot layout: 0 baseline
/// severity, 1-2 progression into Visits 2 and 3, 3 decision point at Visit 2,
/// 4-9 potential outcomes (visit-major, arm-minor), 10-15 unused.
Individual individual_from_words(std::span<const std::uint32_t, kWordsPerIndividual> words,
                                 const DrawThresholds& thresholds, std::uint32_t person_id);

Individual draw_individual(RandomStream& stream, const ScenarioSpec& spec, const HazardSet& h,
                           std::uint32_t person_id);

std::vector<Individual> draw_cohort(RandomStream& stream, const ScenarioSpec& spec, const HazardSet& h,
                                    std::size_t n);

/// Samples n members with replacement from a materialised pool; person ids
/// are renumbered 0..n-1.
std::vector<Individual> sample_from_pool(RandomStream& stream, std::span<const Individual> pool, std::size_t n);

struct TruthRow {
    double risk_treated = 0.0;    // two-year risk under the always pattern
    double risk_untreated = 0.0;  // under the never pattern
    double rr = 0.0;
    double log_rr = 0.0;
};

/// Exact truths. The randomised single point trial is severity-balanced, so
/// both standardised estimands coincide with the marginal contrast.
struct TruthTable {
    TruthRow marginal;
    TruthRow std_spt_all;
    TruthRow std_spt_treated;
};

/// Two-year risk under a sustained arm, summed over the discrete state space.
double enumerated_risk(const ScenarioSpec& spec, const HazardSet& h, Arm arm);
TruthTable enumerate_truth(const ScenarioSpec& spec, const HazardSet& h);

/// Within-cohort finite-sample truth: share with an always-pattern event by
/// year 2 over the share with a never-pattern event by year 2.
AnalysisResult cohort_true_rr(std::span<const Individual> cohort);

}  // namespace sntlab
