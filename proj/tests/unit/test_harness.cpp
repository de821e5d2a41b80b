#include <cmath>

#include "doctest.h"
#include "sntlab/harness.hpp"

using namespace sntlab;

namespace {

RunConfig small_run(std::uint64_t reps, unsigned threads, std::uint64_t n = 500) {
    RunConfig c;
    c.n_individuals = n;
    c.n_replicates = reps;
    c.master_seed = 1234;
    c.parallelism = threads;
    return c;
}

bool same(const AnalysisResult& a, const AnalysisResult& b) {
    return a.design == b.design && a.analysis == b.analysis && a.risk_treated == b.risk_treated &&
           a.risk_untreated == b.risk_untreated && a.rr == b.rr && a.log_rr == b.log_rr &&
           a.n_indexes_treated == b.n_indexes_treated && a.n_indexes_untreated == b.n_indexes_untreated &&
           a.degenerate == b.degenerate;
}

bool same(const ReplicateResult& a, const ReplicateResult& b) {
    if (a.scenario != b.scenario || a.replicate != b.replicate || a.analyses.size() != b.analyses.size()) return false;
    for (std::size_t i = 0; i < a.analyses.size(); ++i) {
        if (!same(a.analyses[i], b.analyses[i])) return false;
    }
    if (a.descriptives.size() != b.descriptives.size()) return false;
    for (std::size_t i = 0; i < a.descriptives.size(); ++i) {
        const auto &x = a.descriptives[i], &y = b.descriptives[i];
        if (x.n_people != y.n_people || x.n_indexes != y.n_indexes || x.pct_high != y.pct_high ||
            x.avg_indexes_per_person != y.avg_indexes_per_person) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("a replicate is reproducible in isolation") {
    const auto spec = builtin_scenario(ScenarioId::S2);
    const auto h = solve(spec).hazards;
    const auto cfg = small_run(1, 1, 2000);
    const auto a = run_replicate(spec, h, 17, 99, cfg);
    const auto b = run_replicate(spec, h, 17, 99, cfg);
    CHECK(same(a, b));
    CHECK(a.replicate == 17);
    CHECK(a.analyses.size() == 14);
    CHECK(a.descriptives.size() == 24);
    CHECK_FALSE(same(a, run_replicate(spec, h, 18, 99, cfg)));
    CHECK_FALSE(same(a, run_replicate(spec, h, 17, 98, cfg)));
}

TEST_CASE("results do not depend on the worker count") {
    const auto spec = builtin_scenario(ScenarioId::S3);
    const auto h = solve(spec).hazards;
    const auto one = run_scenario(spec, h, small_run(40, 1));
    for (unsigned threads : {2u, 4u, 8u, 64u}) {
        const auto many = run_scenario(spec, h, small_run(40, threads));
        REQUIRE(many.size() == one.size());
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(many[i].replicate == i + 1);
            CHECK(same(one[i], many[i]));
        }
    }
    // Any replicate of a run can be regenerated alone.
    CHECK(same(one[22], run_replicate(spec, h, 23, 1234, small_run(1, 1))));
}

TEST_CASE("zero replicates and one-person cohorts") {
    const auto spec = builtin_scenario(ScenarioId::S1);
    const auto h = solve(spec).hazards;
    CHECK(run_scenario(spec, h, small_run(0, 4)).empty());

    const auto tiny = run_scenario(spec, h, small_run(20, 2, 1));
    REQUIRE(tiny.size() == 20);
    std::size_t flagged = 0;
    for (const auto& r : tiny) {
        CHECK(r.analyses.size() == 14);
        for (const auto& a : r.analyses) flagged += a.degenerate != kNoDegeneracy;
    }
    CHECK(flagged > 0);
}

TEST_CASE("replicates are statistically independent") {
    const auto spec = builtin_scenario(ScenarioId::S1);
    const auto h = solve(spec).hazards;
    const std::size_t reps = 400;
    const auto results = run_scenario(spec, h, small_run(reps, 4, 1000));
    // Lag-one correlation of the calendar ATE estimate across replicate ids.
    std::vector<double> x;
    for (const auto& r : results) x.push_back(*r.analyses[5].log_rr);
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
    }
    CHECK(std::abs(num / den) < 3.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("finite superpopulation mode") {
    const auto spec = builtin_scenario(ScenarioId::S4);
    const auto h = solve(spec).hazards;
    const auto pool = build_pool(spec, h, 1234, 3000);
    CHECK(pool.size() == 3000);
    const auto a = run_scenario(spec, h, small_run(6, 1), &pool);
    const auto b = run_scenario(spec, h, small_run(6, 3), &pool);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same(a[i], b[i]));
    const auto iid = run_scenario(spec, h, small_run(6, 1));
    CHECK_FALSE(same(a[0], iid[0]));
}

TEST_CASE("a failing replicate aborts the run and is identified") {
    auto spec = builtin_scenario(ScenarioId::S1);
    spec.treat_prob = {0.25, 1.0};  // certain censoring of high-severity next visits under the simplified weights
    const auto h = solve(spec).hazards;
    auto cfg = small_run(30, 4, 2000);
    cfg.cal_weight_mode = CalWeightMode::paper_simplified;
    try {
        run_scenario(spec, h, cfg);
        FAIL("expected ReplicateFailure");
    } catch (const ReplicateFailure& e) {
        CHECK(e.replicate() >= 1);
        CHECK(e.replicate() <= 30);
        CHECK(std::string(e.what()).find("replicate") != std::string::npos);
    }
}
