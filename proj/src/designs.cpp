#include "sntlab/designs.hpp"

#include <algorithm>
#include <array>

namespace sntlab {

namespace {

/// Follow-up of an index that starts at `visit` under `pattern`, using the
/// pattern's event time measured from Visit 1.
void follow(IndexRecord& rec, const Individual& ind, Pattern pattern, int visit) {
    const auto t = ind.time_under(pattern);
    const int offset = visit - 1;
    if (t && *t > offset && *t - offset <= kHorizonYears) {
        rec.event = true;
        rec.futime = static_cast<std::uint8_t>(*t - offset);
    } else {
        rec.event = false;
        rec.futime = kHorizonYears;
    }
}

IndexRecord make_index(const Individual& ind, int visit, bool treated) {
    IndexRecord rec;
    rec.person_id = ind.person_id;
    rec.index_visit = static_cast<std::uint8_t>(visit);
    rec.severity_at_index = ind.severity_at(visit);
    rec.severity_next = ind.severity_at(visit + 1);
    rec.treated = treated;
    return rec;
}

StudyDataset build_esnt(std::span<const Individual> cohort, const TreatmentAssignment& assignment,
                        bool require_decision_point, Design design) {
    StudyDataset ds;
    ds.design = design;
    ds.indexes.reserve(cohort.size() * 2);
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const Individual& ind = cohort[i];
        const PersonAssignment& pa = assignment[i];

        if (pa.a1) {
            IndexRecord v1 = make_index(ind, 1, true);
            follow(v1, ind, Pattern::always, 1);
            ds.indexes.push_back(v1);
            continue;
        }

        IndexRecord v1 = make_index(ind, 1, false);
        const bool event_year1 = ind.outcome(1, Arm::untreated);
        if (event_year1) {
            // The outcome at Visit 2 precedes any initiation there.
            v1.event = true;
            v1.futime = 1;
            ds.indexes.push_back(v1);
            continue;
        }

        if (pa.a2) {
            v1.censored = true;
            v1.futime = 1;
            ds.indexes.push_back(v1);
            IndexRecord v2 = make_index(ind, 2, true);
            follow(v2, ind, Pattern::late, 2);
            ds.indexes.push_back(v2);
            continue;
        }

        follow(v1, ind, Pattern::never, 1);
        ds.indexes.push_back(v1);
        if (!require_decision_point || ind.decision2) {
            IndexRecord v2 = make_index(ind, 2, false);
            follow(v2, ind, Pattern::never, 2);
            ds.indexes.push_back(v2);
        }
    }
    return ds;
}

}  // namespace

TreatmentAssignment assign_treatments(RandomStream& stream, std::span<const Individual> cohort,
                                      const ScenarioSpec& spec) {
    TreatmentAssignment out(cohort.size());
    if (cohort.empty()) return out;
    std::vector<std::uint32_t> words(cohort.size() * kAssignmentWords);
    stream.fill(words);

    const std::uint64_t spt = bernoulli_threshold(spec.spt_treat_prob);
    const std::array<std::uint64_t, 2> treat{bernoulli_threshold(spec.treat_prob.low),
                                             bernoulli_threshold(spec.treat_prob.high)};
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const Individual& ind = cohort[i];
        const std::uint32_t* w = words.data() + i * kAssignmentWords;
        PersonAssignment& pa = out[i];
        pa.spt_arm = bernoulli(w[0], spt) ? Arm::treated : Arm::untreated;
        pa.a1 = bernoulli(w[1], treat[static_cast<std::size_t>(to_index(ind.severity_at(1)))]);
        pa.a2_defined = !pa.a1 && !ind.outcome(1, Arm::untreated);
        if (pa.a2_defined) {
            pa.a2 = ind.decision2 && bernoulli(w[2], treat[static_cast<std::size_t>(to_index(ind.severity_at(2)))]);
        }
        pa.observed = pa.a1 ? Pattern::always : (pa.a2 ? Pattern::late : Pattern::never);
    }
    return out;
}

StudyDataset build_spt(std::span<const Individual> cohort, const TreatmentAssignment& assignment) {
    StudyDataset ds;
    ds.design = Design::spt;
    ds.indexes.reserve(cohort.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const bool treated = assignment[i].spt_arm == Arm::treated;
        IndexRecord rec = make_index(cohort[i], 1, treated);
        follow(rec, cohort[i], treated ? Pattern::always : Pattern::never, 1);
        ds.indexes.push_back(rec);
    }
    return ds;
}

StudyDataset build_esnt_cal(std::span<const Individual> cohort, const TreatmentAssignment& assignment) {
    return build_esnt(cohort, assignment, false, Design::esnt_cal);
}

StudyDataset build_esnt_td(std::span<const Individual> cohort, const TreatmentAssignment& assignment) {
    return build_esnt(cohort, assignment, true, Design::esnt_td);
}

std::string_view to_string(DescribeGroup g) {
    switch (g) {
        case DescribeGroup::all: return "all";
        case DescribeGroup::treated: return "treated";
        case DescribeGroup::initiator_person: return "initiator-person";
        case DescribeGroup::noninitiator_person: return "noninitiator-person";
    }
    return "?";
}

std::optional<DescribeGroup> parse_describe_group(std::string_view text) {
    for (auto g : {DescribeGroup::all, DescribeGroup::treated, DescribeGroup::initiator_person,
                   DescribeGroup::noninitiator_person}) {
        if (to_string(g) == text) return g;
    }
    return std::nullopt;
}

std::vector<DescribeRow> describe(std::span<const StudyDataset> datasets, const TreatmentAssignment& assignment) {
    constexpr std::array<DescribeGroup, 4> groups{DescribeGroup::all, DescribeGroup::treated,
                                                  DescribeGroup::initiator_person,
                                                  DescribeGroup::noninitiator_person};
    std::vector<DescribeRow> rows;
    rows.reserve(datasets.size() * groups.size() * 2);
    std::vector<std::uint8_t> seen(assignment.size());

    for (const StudyDataset& ds : datasets) {
        auto initiator = [&](std::uint32_t person) {
            const PersonAssignment& pa = assignment[person];
            return ds.design == Design::spt ? pa.spt_arm == Arm::treated : pa.ever_initiated();
        };
        auto member = [&](DescribeGroup g, const IndexRecord& rec) {
            switch (g) {
                case DescribeGroup::all: return true;
                case DescribeGroup::treated: return rec.treated;
                case DescribeGroup::initiator_person: return initiator(rec.person_id);
                case DescribeGroup::noninitiator_person: return !initiator(rec.person_id);
            }
            return false;
        };

        for (DescribeGroup g : groups) {
            std::array<std::uint64_t, 2> n_idx{};
            std::uint64_t n_people = 0;
            std::fill(seen.begin(), seen.end(), 0);
            for (const IndexRecord& rec : ds.indexes) {
                if (!member(g, rec)) continue;
                ++n_idx[static_cast<std::size_t>(to_index(rec.severity_at_index))];
                if (!seen[rec.person_id]) {
                    seen[rec.person_id] = 1;
                    ++n_people;
                }
            }
            const std::uint64_t total = n_idx[0] + n_idx[1];
            for (Severity s : {Severity::low, Severity::high}) {
                DescribeRow row;
                row.design = ds.design;
                row.group = g;
                row.severity = s;
                row.n_people = n_people;
                row.n_indexes = n_idx[static_cast<std::size_t>(to_index(s))];
                if (total > 0) row.pct_high = 100.0 * static_cast<double>(n_idx[1]) / static_cast<double>(total);
                if (n_people > 0) {
                    row.avg_indexes_per_person = static_cast<double>(row.n_indexes) / static_cast<double>(n_people);
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

}  // namespace sntlab
