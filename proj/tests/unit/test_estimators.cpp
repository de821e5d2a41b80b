#include <cmath>
#include <random>

#include "doctest.h"
#include "sntlab/designs.hpp"
#include "sntlab/estimators.hpp"
#include "sntlab/hazard.hpp"
#include "support.hpp"

using namespace sntlab;

namespace {

IndexRecord rec(bool treated, Severity s, int futime, bool event, bool censored = false,
                Severity next = Severity::low, int visit = 1) {
    IndexRecord r;
    r.treated = treated;
    r.severity_at_index = s;
    r.futime = static_cast<std::uint8_t>(futime);
    r.event = event;
    r.censored = censored;
    r.severity_next = next;
    r.index_visit = static_cast<std::uint8_t>(visit);
    return r;
}

/// Weighted risk written as cumulative incidence over the two annual
/// intervals, accumulated in long double.
std::optional<long double> oracle_risk(const std::vector<IndexRecord>& rs, const std::vector<WeightSchedule>& ws,
                                       bool treated, std::optional<Severity> stratum) {
    long double n1 = 0, d1 = 0, n2 = 0, d2 = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        if (r.treated != treated || (stratum && r.severity_at_index != *stratum)) continue;
        n1 += ws[i].w1;
        if (r.event && r.futime == 1) d1 += ws[i].w1;
        const bool reaches_year2 = r.futime == 2;
        if (reaches_year2) n2 += ws[i].w2;
        if (reaches_year2 && r.event) d2 += ws[i].w2;
    }
    if (n1 == 0) return std::nullopt;
    const long double h1 = d1 / n1;
    const long double h2 = n2 > 0 ? d2 / n2 : 0;
    return h1 + (1 - h1) * h2;
}

struct RandomData {
    std::vector<IndexRecord> records;
    std::vector<WeightSchedule> weights;
};

RandomData random_dataset(std::mt19937_64& rng, std::size_t max_n) {
    RandomData d;
    std::uniform_real_distribution<double> u(0, 1);
    const std::size_t n = 1 + rng() % max_n;
    for (std::size_t i = 0; i < n; ++i) {
        const bool treated = u(rng) < 0.5;
        const Severity s = u(rng) < 0.4 ? Severity::high : Severity::low;
        const int visit = u(rng) < 0.7 ? 1 : 2;
        const double roll = u(rng);
        IndexRecord r;
        if (!treated && visit == 1 && roll < 0.2) {
            r = rec(false, s, 1, false, true);
        } else if (roll < 0.35) {
            r = rec(treated, s, 1, true);
        } else if (roll < 0.6) {
            r = rec(treated, s, 2, true);
        } else {
            r = rec(treated, s, 2, false);
        }
        r.index_visit = static_cast<std::uint8_t>(visit);
        d.records.push_back(r);
        d.weights.push_back({1.0, (!treated && visit == 1) ? 1.0 + 2.0 * u(rng) : 1.0});
    }
    return d;
}

struct Replicate {
    std::vector<Individual> cohort;
    StudyDataset spt, cal, td;
};

Replicate replicate_for(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed) {
    Replicate r;
    RandomStream cs(derive_key(seed, ordinal(spec.scenario_id), 1), StreamPurpose::cohort);
    r.cohort = draw_cohort(cs, spec, solve(spec).hazards, n);
    RandomStream as(derive_key(seed, ordinal(spec.scenario_id), 1), StreamPurpose::assignment);
    const auto a = assign_treatments(as, r.cohort, spec);
    r.spt = build_spt(r.cohort, a);
    r.cal = build_esnt_cal(r.cohort, a);
    r.td = build_esnt_td(r.cohort, a);
    return r;
}

}  // namespace

TEST_CASE("censoring weight examples") {
    const auto s1 = builtin_scenario(ScenarioId::S1);
    const auto s3 = builtin_scenario(ScenarioId::S3);
    const auto high_next = rec(false, Severity::low, 2, false, false, Severity::high);
    const auto low_next = rec(false, Severity::low, 2, false, false, Severity::low);

    for (Design d : {Design::esnt_cal, Design::esnt_td}) {
        const auto t = censoring_weights(rec(true, Severity::low, 2, false, false, Severity::high), s1, d,
                                         CalWeightMode::initiation);
        CHECK(t.w1 == 1.0);
        CHECK(t.w2 == 1.0);
        const auto v2 = censoring_weights(rec(false, Severity::low, 2, false, false, Severity::high, 2), s1, d,
                                          CalWeightMode::initiation);
        CHECK(v2.w2 == 1.0);
    }
    const auto w = censoring_weights(high_next, s1, Design::esnt_cal, CalWeightMode::initiation);
    CHECK(w.w1 == 1.0);
    CHECK(w.w2 == doctest::Approx(1.0 / (1.0 - 0.3 * 0.75)).epsilon(1e-15));
    CHECK(w.w2 == doctest::Approx(1.290323).epsilon(1e-6));
    CHECK(censoring_weights(high_next, s3, Design::esnt_td, CalWeightMode::initiation).w2 ==
          doctest::Approx(2.5).epsilon(1e-15));
    CHECK(censoring_weights(low_next, s1, Design::esnt_cal, CalWeightMode::initiation).w2 ==
          doctest::Approx(1.081081).epsilon(1e-6));

    // The simplified calendar weights drop the decision-point factor; the
    // decision-point design is unaffected by the mode.
    CHECK(censoring_weights(high_next, s1, Design::esnt_cal, CalWeightMode::paper_simplified).w2 ==
          doctest::Approx(4.0).epsilon(1e-15));
    CHECK(censoring_weights(high_next, s1, Design::esnt_td, CalWeightMode::paper_simplified).w2 ==
          doctest::Approx(1.290323).epsilon(1e-6));
    CHECK(censoring_weights(high_next, s1, Design::spt, CalWeightMode::initiation).w2 == 1.0);

    auto certain = s1;
    certain.decision_prob = {1.0, 1.0};
    certain.treat_prob = {0.25, 1.0};
    CHECK_THROWS_AS(censoring_weights(high_next, certain, Design::esnt_cal, CalWeightMode::initiation),
                    DegenerateWeight);
}

TEST_CASE("weighted product-limit example") {
    const auto s1 = builtin_scenario(ScenarioId::S1);
    const std::vector<IndexRecord> rs{rec(false, Severity::low, 2, true, false, Severity::high),
                                      rec(false, Severity::low, 2, false, false, Severity::low)};
    std::vector<WeightSchedule> ws;
    for (const auto& r : rs) ws.push_back(censoring_weights(r, s1, Design::esnt_cal, CalWeightMode::initiation));
    const auto risk = ipcw_km_risk(rs, ws, Arm::untreated, 2, Severity::low);
    REQUIRE(risk);
    CHECK(*risk == doctest::Approx(0.544118).epsilon(1e-6));
    CHECK(std::abs(*risk - static_cast<double>(*oracle_risk(rs, ws, false, Severity::low))) < 1e-12);

    CHECK(*ipcw_km_risk(rs, ws, Arm::untreated, 1) == 0.0);
    CHECK_FALSE(ipcw_km_risk(rs, ws, Arm::treated, 2));
    CHECK_FALSE(ipcw_km_risk(rs, ws, Arm::untreated, 2, Severity::high));
    CHECK_THROWS_AS(ipcw_km_risk(rs, ws, Arm::untreated, 3), std::invalid_argument);
    CHECK_THROWS_AS(ipcw_km_risk(rs, std::vector<WeightSchedule>(1), Arm::untreated, 2), std::invalid_argument);
}

TEST_CASE("unit weights without censoring give the empirical proportion") {
    std::vector<IndexRecord> rs;
    for (int i = 0; i < 7; ++i) rs.push_back(rec(true, Severity::low, 1, true));
    for (int i = 0; i < 5; ++i) rs.push_back(rec(true, Severity::high, 2, true));
    for (int i = 0; i < 19; ++i) rs.push_back(rec(true, Severity::low, 2, false));
    const std::vector<WeightSchedule> ws(rs.size());
    CHECK(std::abs(*ipcw_km_risk(rs, ws, Arm::treated, 2) - 12.0 / 31.0) < 1e-15);
    CHECK(std::abs(*ipcw_km_risk(rs, ws, Arm::treated, 1) - 7.0 / 31.0) < 1e-15);
}

TEST_CASE("risks match the oracle on small random datasets") {
    std::mt19937_64 rng(2024);
    int compared = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const auto d = random_dataset(rng, 12);
        for (Arm arm : {Arm::untreated, Arm::treated}) {
            for (auto stratum : {std::optional<Severity>{}, std::optional<Severity>{Severity::low},
                                 std::optional<Severity>{Severity::high}}) {
                const auto got = ipcw_km_risk(d.records, d.weights, arm, 2, stratum);
                const auto want = oracle_risk(d.records, d.weights, arm == Arm::treated, stratum);
                REQUIRE(got.has_value() == want.has_value());
                if (!got) continue;
                ++compared;
                CHECK(std::abs(*got - static_cast<double>(*want)) < 1e-12);

                // Uniform rescaling of every weight leaves the risk unchanged.
                auto scaled = d.weights;
                const double c = 0.01 + 50.0 * std::generate_canonical<double, 53>(rng);
                for (auto& w : scaled) {
                    w.w1 *= c;
                    w.w2 *= c;
                }
                CHECK(std::abs(*ipcw_km_risk(d.records, scaled, arm, 2, stratum) - *got) < 1e-12);
            }
        }
        // Standardisation against the oracle's stratum risks.
        const TargetDistribution target{0.35, 0.65};
        const auto std_rr = standardized_rr(d.records, d.weights, target);
        std::optional<long double> arm_risk[2];
        for (int a = 0; a < 2; ++a) {
            auto lo = oracle_risk(d.records, d.weights, a == 1, Severity::low);
            auto hi = oracle_risk(d.records, d.weights, a == 1, Severity::high);
            if (lo && hi) arm_risk[a] = 0.35L * *lo + 0.65L * *hi;
        }
        CHECK(std_rr.risk_untreated.has_value() == arm_risk[0].has_value());
        CHECK(std_rr.risk_treated.has_value() == arm_risk[1].has_value());
        if (arm_risk[0] && arm_risk[1]) {
            CHECK(std::abs(*std_rr.risk_untreated - static_cast<double>(*arm_risk[0])) < 1e-12);
            CHECK(std::abs(*std_rr.risk_treated - static_cast<double>(*arm_risk[1])) < 1e-12);
            if (*arm_risk[0] > 0) {
                REQUIRE(std_rr.rr);
                CHECK(std::abs(*std_rr.rr - static_cast<double>(*arm_risk[1] / *arm_risk[0])) < 1e-12);
            }
            // A convex combination stays within the stratum risks.
            for (int a = 0; a < 2; ++a) {
                const auto lo = *oracle_risk(d.records, d.weights, a == 1, Severity::low);
                const auto hi = *oracle_risk(d.records, d.weights, a == 1, Severity::high);
                const double v = a ? *std_rr.risk_treated : *std_rr.risk_untreated;
                CHECK(v >= static_cast<double>(std::min(lo, hi)) - 1e-15);
                CHECK(v <= static_cast<double>(std::max(lo, hi)) + 1e-15);
            }
        } else {
            CHECK((std_rr.degenerate & kEmptyCell) != 0);
            CHECK_FALSE(std_rr.rr);
        }
    }
    CHECK(compared > 10000);
}

TEST_CASE("standardisation examples") {
    // Stratum risks: treated (0.10, 0.30), untreated (0.20, 0.40).
    std::vector<IndexRecord> rs;
    auto add = [&](bool treated, Severity s, int n, int events) {
        for (int i = 0; i < n; ++i) rs.push_back(rec(treated, s, i < events ? 1 : 2, i < events));
    };
    add(true, Severity::low, 10, 1);
    add(true, Severity::high, 10, 3);
    add(false, Severity::low, 5, 1);
    add(false, Severity::high, 5, 2);
    const std::vector<WeightSchedule> ws(rs.size());

    const auto half = standardized_rr(rs, ws, {0.5, 0.5});
    CHECK(std::abs(*half.risk_treated - 0.20) < 1e-12);
    CHECK(std::abs(*half.risk_untreated - 0.30) < 1e-12);
    CHECK(std::abs(*half.rr - 2.0 / 3.0) < 1e-12);
    CHECK(*half.rr == doctest::Approx(0.666667).epsilon(1e-6));
    CHECK(half.n_indexes_treated == 20);
    CHECK(half.n_indexes_untreated == 10);

    const auto low_only = standardized_rr(rs, ws, {1.0, 0.0});
    CHECK(std::abs(*low_only.rr - 0.10 / 0.20) < 1e-12);

    // A target with no weight on an unpopulated stratum still standardises.
    std::vector<IndexRecord> lows(rs.begin(), rs.begin() + 10);
    lows.insert(lows.end(), rs.begin() + 20, rs.begin() + 25);
    const auto low_target = standardized_rr(lows, std::vector<WeightSchedule>(lows.size()), {1.0, 0.0});
    CHECK(low_target.usable());
    const auto needs_high = standardized_rr(lows, std::vector<WeightSchedule>(lows.size()), {0.5, 0.5});
    CHECK_FALSE(needs_high.usable());
    CHECK((needs_high.degenerate & kEmptyCell) != 0);

    // Homogeneous strata: every target reproduces the crude contrast.
    std::vector<IndexRecord> flat;
    auto add_flat = [&](bool treated, Severity s, int n, int events) {
        for (int i = 0; i < n; ++i) flat.push_back(rec(treated, s, 2, i < events));
    };
    add_flat(true, Severity::low, 10, 2);
    add_flat(true, Severity::high, 20, 4);
    add_flat(false, Severity::low, 30, 12);
    add_flat(false, Severity::high, 5, 2);
    const std::vector<WeightSchedule> fw(flat.size());
    const auto crude = crude_rr(flat, fw);
    for (double wl : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        CHECK(*standardized_rr(flat, fw, {wl, 1.0 - wl}).rr == doctest::Approx(*crude.rr).epsilon(1e-14));
    }
}

TEST_CASE("severity distributions") {
    StudyDataset ds;
    CHECK_FALSE(severity_distribution(ds, IndexSubset::all));
    ds.indexes = {rec(false, Severity::high, 2, false), rec(true, Severity::high, 2, false)};
    const auto all = *severity_distribution(ds, IndexSubset::all);
    CHECK(all.w_low == 0.0);
    CHECK(all.w_high == 1.0);
    ds.indexes.push_back(rec(false, Severity::low, 2, false));
    ds.indexes.push_back(rec(true, Severity::low, 2, false));
    ds.indexes.push_back(rec(true, Severity::low, 2, false));
    const auto treated = *severity_distribution(ds, IndexSubset::treated);
    CHECK(treated.w_high == doctest::Approx(1.0 / 3.0));
    CHECK(std::abs(treated.w_low + treated.w_high - 1.0) < 1e-12);

    const auto r = replicate_for(builtin_scenario(ScenarioId::S1), 5000, 77);
    const auto spt = *severity_distribution(r.spt, IndexSubset::all);
    CHECK(std::abs(spt.w_high - 0.25) < 3 * std::sqrt(0.25 * 0.75 / 5000));
}

TEST_CASE("count table reproduces the record-level estimator") {
    for (const auto& spec : builtin_scenarios()) {
        const auto r = replicate_for(spec, 3000, 41);
        for (const StudyDataset* ds : {&r.spt, &r.cal, &r.td}) {
            const CellTable cells(ds->indexes);
            CHECK(cells.arm_total(Arm::treated) + cells.arm_total(Arm::untreated) == ds->indexes.size());
            for (auto mode : {CalWeightMode::initiation, CalWeightMode::paper_simplified}) {
                const auto ws = dataset_weights(*ds, spec, mode);
                for (Arm arm : {Arm::untreated, Arm::treated}) {
                    for (auto stratum : {std::optional<Severity>{}, std::optional<Severity>{Severity::low},
                                         std::optional<Severity>{Severity::high}}) {
                        const auto a = cells.km_risk(spec, ds->design, mode, arm, stratum);
                        const auto b = ipcw_km_risk(ds->indexes, ws, arm, 2, stratum);
                        REQUIRE(a.has_value() == b.has_value());
                        if (a) CHECK(std::abs(*a - *b) < 1e-12);
                    }
                }
            }
        }
    }
    const std::vector<IndexRecord> none;
    const CellTable empty(none);
    CHECK_FALSE(empty.km_risk(builtin_scenario(ScenarioId::S1), Design::esnt_cal, CalWeightMode::initiation,
                              Arm::treated, std::nullopt));
}

TEST_CASE("dataset weights follow the record rules") {
    const auto spec = builtin_scenario(ScenarioId::S3);
    const auto r = replicate_for(spec, 4000, 5);
    for (const StudyDataset* ds : {&r.spt, &r.cal, &r.td}) {
        const auto ws = dataset_weights(*ds, spec, CalWeightMode::initiation);
        REQUIRE(ws.size() == ds->indexes.size());
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const auto& rec = ds->indexes[i];
            CHECK(ws[i].w1 == 1.0);
            CHECK(ws[i].w2 >= 1.0);
            if (rec.treated || rec.index_visit == 2 || ds->design == Design::spt) CHECK(ws[i].w2 == 1.0);
        }
    }
}

TEST_CASE("battery layout") {
    const auto spec = builtin_scenario(ScenarioId::S2);
    const auto r = replicate_for(spec, 5000, 12);
    const auto out = analyze_replicate(r.cohort, r.spt, r.cal, r.td, spec, CalWeightMode::initiation);
    REQUIRE(out.size() == 14);
    const std::pair<Design, Analysis> expected[] = {
        {Design::spt, Analysis::true_rr},       {Design::spt, Analysis::crude},
        {Design::spt, Analysis::ate_spt},       {Design::spt, Analysis::att_spt},
        {Design::esnt_cal, Analysis::crude},    {Design::esnt_cal, Analysis::ate_snt},
        {Design::esnt_cal, Analysis::att_snt},  {Design::esnt_cal, Analysis::ate_spt},
        {Design::esnt_cal, Analysis::att_spt},  {Design::esnt_td, Analysis::crude},
        {Design::esnt_td, Analysis::ate_snt},   {Design::esnt_td, Analysis::att_snt},
        {Design::esnt_td, Analysis::ate_spt},   {Design::esnt_td, Analysis::att_spt},
    };
    for (std::size_t i = 0; i < 14; ++i) {
        CHECK(out[i].design == expected[i].first);
        CHECK(out[i].analysis == expected[i].second);
        CHECK(out[i].usable());
        if (out[i].rr) CHECK(*out[i].rr == doctest::Approx(*out[i].risk_treated / *out[i].risk_untreated));
    }
    CHECK(out[0].n_indexes_treated == 5000);
    CHECK(out[1].n_indexes_treated + out[1].n_indexes_untreated == 5000);
    CHECK(out[4].n_indexes_treated + out[4].n_indexes_untreated == r.cal.indexes.size());

    // The battery's crude contrast equals the record-level one.
    const auto ws = dataset_weights(r.cal, spec, CalWeightMode::initiation);
    const auto crude = crude_rr(r.cal.indexes, ws);
    CHECK(std::abs(*crude.rr - *out[4].rr) < 1e-12);
    const auto att = standardized_rr(r.td.indexes, dataset_weights(r.td, spec, CalWeightMode::initiation),
                                     *severity_distribution(r.td, IndexSubset::treated));
    CHECK(std::abs(*att.rr - *out[11].rr) < 1e-12);
}

TEST_CASE("without Visit-2 initiation the emulation crude risks are unweighted") {
    auto spec = builtin_scenario(ScenarioId::S1);
    spec.decision_prob = {0.0, 0.0};
    const auto r = replicate_for(spec, 5000, 9);
    for (const auto& w : dataset_weights(r.cal, spec, CalWeightMode::initiation)) CHECK(w.w2 == 1.0);
    const auto out = analyze_replicate(r.cohort, r.spt, r.cal, r.td, spec, CalWeightMode::initiation);
    const auto unweighted = crude_rr(r.cal.indexes, std::vector<WeightSchedule>(r.cal.indexes.size()));
    CHECK(std::abs(*out[4].risk_treated - *unweighted.risk_treated) < 1e-12);
    CHECK(std::abs(*out[4].risk_untreated - *unweighted.risk_untreated) < 1e-12);
}

TEST_CASE("single point trial standardisation is idle under homogeneous strata") {
    // Both arms have the same risk in each severity stratum.
    std::vector<IndexRecord> rs;
    auto add = [&](bool treated, Severity s, int n, int events) {
        for (int i = 0; i < n; ++i) rs.push_back(rec(treated, s, i < events ? 1 : 2, i < events));
    };
    add(true, Severity::low, 30, 6);
    add(true, Severity::high, 10, 2);
    add(false, Severity::low, 50, 15);
    add(false, Severity::high, 20, 6);
    StudyDataset spt{Design::spt, rs};
    for (std::size_t i = 0; i < spt.indexes.size(); ++i) spt.indexes[i].person_id = static_cast<std::uint32_t>(i);
    std::vector<Individual> cohort(rs.size());
    const auto out = analyze_replicate(cohort, spt, spt, spt, builtin_scenario(ScenarioId::S1),
                                       CalWeightMode::initiation);
    CHECK(*out[1].rr == doctest::Approx(*out[2].rr).epsilon(1e-14));
    CHECK(*out[1].rr == doctest::Approx(*out[3].rr).epsilon(1e-14));
}

TEST_CASE("homogeneous world: adjusted emulation contrasts recover delta") {
    ScenarioSpec spec = builtin_scenario(ScenarioId::S1, 0.0);
    spec.treat_prob = {0.4, 0.4};
    spec.decision_prob = {0.6, 0.6};
    spec.delta = {0.6, 0.6};
    const auto r = replicate_for(spec, 4000000, 13);
    const auto out = analyze_replicate(r.cohort, r.spt, r.cal, r.td, spec, CalWeightMode::initiation);
    for (const auto& a : out) {
        if (a.design == Design::spt || a.analysis == Analysis::crude) continue;
        REQUIRE(a.log_rr);
        // The log-RR standard error is about 0.0035 at this size.
        CHECK(std::abs(*a.log_rr - std::log(0.6)) < 0.015);
    }
}

TEST_CASE("degenerate tiny replicate is flagged, not fatal") {
    const auto spec = builtin_scenario(ScenarioId::S1);
    const std::vector<Individual> cohort{test::person(0, {0, 0, 0}, {0, 0, 0}, {0, 0, 0})};
    PersonAssignment pa;
    const TreatmentAssignment a{pa};
    const auto out = analyze_replicate(cohort, build_spt(cohort, a), build_esnt_cal(cohort, a),
                                       build_esnt_td(cohort, a), spec, CalWeightMode::initiation);
    REQUIRE(out.size() == 14);
    for (const auto& r : out) CHECK_FALSE(r.usable());
}
