#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sntlab/analysis_result.hpp"
#include "sntlab/population.hpp"
#include "sntlab/random.hpp"
#include "sntlab/scenario.hpp"

namespace sntlab {

struct PersonAssignment {
    Arm spt_arm = Arm::untreated;
    bool a1 = false;          // initiates at Visit 1 (emulated-trial world)
    bool a2 = false;          // initiates at Visit 2
    bool a2_defined = false;  // untreated at Visit 1 and event-free through Visit 2
    Pattern observed = Pattern::never;

    bool ever_initiated() const { return a1 || a2; }
};

using TreatmentAssignment = std::vector<PersonAssignment>;

/// Words consumed per person: 0 SPT arm, 1 Visit-1 initiation, 2 Visit-2 initiation, 3 unused.
inline constexpr std::size_t kAssignmentWords = 4;

TreatmentAssignment assign_treatments(RandomStream& stream, std::span<const Individual> cohort,
                                      const ScenarioSpec& spec);

/// One analysed time origin.
struct IndexRecord {
    std::uint32_t person_id = 0;
    std::uint8_t index_visit = 1;  // 1 or 2
    Severity severity_at_index = Severity::low;
    bool treated = false;
    std::uint8_t futime = 2;  // years, 1 or 2
    bool event = false;
    bool censored = false;  // artificially censored at the next visit
    Severity severity_next = Severity::low;

    friend bool operator==(const IndexRecord&, const IndexRecord&) = default;
};

struct StudyDataset {
    Design design = Design::spt;
    std::vector<IndexRecord> indexes;
};

inline constexpr int kHorizonYears = 2;

StudyDataset build_spt(std::span<const Individual> cohort, const TreatmentAssignment& assignment);
StudyDataset build_esnt_cal(std::span<const Individual> cohort, const TreatmentAssignment& assignment);
StudyDataset build_esnt_td(std::span<const Individual> cohort, const TreatmentAssignment& assignment);

enum class DescribeGroup : std::uint8_t { all, treated, initiator_person, noninitiator_person };

std::string_view to_string(DescribeGroup g);
std::optional<DescribeGroup> parse_describe_group(std::string_view text);

struct DescribeRow {
    Design design = Design::spt;
    DescribeGroup group = DescribeGroup::all;
    Severity severity = Severity::low;
    std::uint64_t n_people = 0;
    std::uint64_t n_indexes = 0;
    std::optional<double> pct_high;                // of the group's indexes, 0-100
    std::optional<double> avg_indexes_per_person;  // n_indexes / n_people
};

/// Person and index counts for each design x group x severity (24 rows).
/// "all"/"treated" group indexes; the person-level groups split indexes by
/// whether their person ever initiated in that design.
std::vector<DescribeRow> describe(std::span<const StudyDataset> datasets, const TreatmentAssignment& assignment);

}  // namespace sntlab
