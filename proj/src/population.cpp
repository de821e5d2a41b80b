#include "sntlab/population.hpp"

#include <cmath>

namespace sntlab {

std::optional<int> event_time_under_pattern(const Individual& ind, Pattern pattern) {
    for (int visit = 1; visit <= kVisits; ++visit) {
        if (ind.outcome(visit, arm_at(pattern, visit))) return visit;
    }
    return std::nullopt;
}

void derive_event_times(Individual& ind) {
    for (Pattern p : kPatterns) {
        auto t = event_time_under_pattern(ind, p);
        ind.event_time[static_cast<std::size_t>(p)] =
            t ? std::optional<std::uint8_t>(static_cast<std::uint8_t>(*t)) : std::nullopt;
    }
}

DrawThresholds::DrawThresholds(const ScenarioSpec& spec, const HazardSet& h)
    : baseline_high(bernoulli_threshold(spec.baseline_high_prob)),
      progression(bernoulli_threshold(spec.progression_prob)),
      decision{bernoulli_threshold(spec.decision_prob.low), bernoulli_threshold(spec.decision_prob.high)},
      outcome{{{bernoulli_threshold(h.p00), bernoulli_threshold(h.p01)},
               {bernoulli_threshold(h.p10), bernoulli_threshold(h.p11)}}} {}

Individual individual_from_words(std::span<const std::uint32_t, kWordsPerIndividual> words,
                                 const DrawThresholds& t, std::uint32_t person_id) {
    Individual ind;
    ind.person_id = person_id;
    Severity s = bernoulli(words[0], t.baseline_high) ? Severity::high : Severity::low;
    ind.severity[0] = s;
    for (int k = 1; k < kVisits; ++k) {
        if (s == Severity::low && bernoulli(words[static_cast<std::size_t>(k)], t.progression)) s = Severity::high;
        ind.severity[static_cast<std::size_t>(k)] = s;
    }
    ind.decision2 = bernoulli(words[3], t.decision[static_cast<std::size_t>(to_index(ind.severity[1]))]);
    for (std::size_t v = 0; v < kVisits; ++v) {
        const auto sev = static_cast<std::size_t>(to_index(ind.severity[v]));
        for (std::size_t a = 0; a < 2; ++a) {
            ind.po[v][a] = bernoulli(words[4 + 2 * v + a], t.outcome[a][sev]);
        }
    }
    derive_event_times(ind);
    return ind;
}

Individual draw_individual(RandomStream& stream, const ScenarioSpec& spec, const HazardSet& h,
                           std::uint32_t person_id) {
    std::array<std::uint32_t, kWordsPerIndividual> words;
    stream.fill(words);
    return individual_from_words(words, DrawThresholds(spec, h), person_id);
}

std::vector<Individual> draw_cohort(RandomStream& stream, const ScenarioSpec& spec, const HazardSet& h,
                                    std::size_t n) {
    std::vector<Individual> cohort;
    if (n == 0) return cohort;
    const DrawThresholds thresholds(spec, h);
    std::vector<std::uint32_t> words(n * kWordsPerIndividual);
    stream.fill(words);
    cohort.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const std::uint32_t, kWordsPerIndividual> slot(words.data() + i * kWordsPerIndividual,
                                                                 kWordsPerIndividual);
        cohort.push_back(individual_from_words(slot, thresholds, static_cast<std::uint32_t>(i)));
    }
    return cohort;
}

std::vector<Individual> sample_from_pool(RandomStream& stream, std::span<const Individual> pool, std::size_t n) {
    std::vector<Individual> cohort;
    if (n == 0 || pool.empty()) return cohort;
    cohort.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Individual ind = pool[static_cast<std::size_t>(stream.next_below(pool.size()))];
        ind.person_id = static_cast<std::uint32_t>(i);
        cohort.push_back(ind);
    }
    return cohort;
}

double enumerated_risk(const ScenarioSpec& spec, const HazardSet& h, Arm arm) {
    const double pi = spec.progression_prob;
    double risk = 0.0;
    for (Severity s1 : {Severity::low, Severity::high}) {
        const double prior = s1 == Severity::high ? spec.baseline_high_prob : 1.0 - spec.baseline_high_prob;
        const double first = h.at(arm, s1);
        double second = 0.0;
        if (s1 == Severity::high) {
            second = h.at(arm, Severity::high);
        } else {
            second = (1.0 - pi) * h.at(arm, Severity::low) + pi * h.at(arm, Severity::high);
        }
        risk += prior * (first + (1.0 - first) * second);
    }
    return risk;
}

TruthTable enumerate_truth(const ScenarioSpec& spec, const HazardSet& h) {
    TruthRow row;
    row.risk_treated = enumerated_risk(spec, h, Arm::treated);
    row.risk_untreated = enumerated_risk(spec, h, Arm::untreated);
    row.rr = row.risk_treated / row.risk_untreated;
    row.log_rr = std::log(row.rr);
    return {row, row, row};
}

AnalysisResult cohort_true_rr(std::span<const Individual> cohort) {
    AnalysisResult r;
    r.design = Design::spt;
    r.analysis = Analysis::true_rr;
    r.n_indexes_treated = cohort.size();
    r.n_indexes_untreated = cohort.size();
    if (cohort.empty()) {
        r.degenerate |= kEmptyCell;
        return r;
    }
    std::uint64_t treated_events = 0, untreated_events = 0;
    for (const auto& ind : cohort) {
        auto ta = ind.time_under(Pattern::always);
        auto tn = ind.time_under(Pattern::never);
        treated_events += ta && *ta <= 2;
        untreated_events += tn && *tn <= 2;
    }
    const double n = static_cast<double>(cohort.size());
    r.risk_treated = static_cast<double>(treated_events) / n;
    r.risk_untreated = static_cast<double>(untreated_events) / n;
    finish_contrast(r);
    return r;
}

}  // namespace sntlab
