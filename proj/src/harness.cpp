#include "sntlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "sntlab/estimators.hpp"
#include "sntlab/random.hpp"

namespace sntlab {

Pool build_pool(const ScenarioSpec& spec, const HazardSet& h, std::uint64_t master_seed, std::size_t size) {
    RandomStream stream(derive_key(master_seed, ordinal(spec.scenario_id), kPoolReplicate), StreamPurpose::cohort);
    return draw_cohort(stream, spec, h, size);
}

ReplicateResult run_replicate(const ScenarioSpec& spec, const HazardSet& h, std::uint64_t replicate,
                              std::uint64_t master_seed, const RunConfig& config, const Pool* pool) {
    const auto key = derive_key(master_seed, ordinal(spec.scenario_id), replicate);
    const auto n = static_cast<std::size_t>(config.n_individuals);

    std::vector<Individual> cohort;
    if (pool) {
        RandomStream sampler(key, StreamPurpose::pool_sampling);
        cohort = sample_from_pool(sampler, *pool, n);
    } else {
        RandomStream draws(key, StreamPurpose::cohort);
        cohort = draw_cohort(draws, spec, h, n);
    }
    RandomStream assign(key, StreamPurpose::assignment);
    const TreatmentAssignment assignment = assign_treatments(assign, cohort, spec);

    const std::vector<StudyDataset> designs{build_spt(cohort, assignment), build_esnt_cal(cohort, assignment),
                                            build_esnt_td(cohort, assignment)};

    ReplicateResult out;
    out.scenario = spec.scenario_id;
    out.replicate = replicate;
    out.analyses = analyze_replicate(cohort, designs[0], designs[1], designs[2], spec, config.cal_weight_mode);
    out.descriptives = describe(designs, assignment);
    return out;
}

std::vector<ReplicateResult> run_scenario(const ScenarioSpec& spec, const HazardSet& h, const RunConfig& config,
                                          const Pool* pool) {
    const std::uint64_t total = config.n_replicates;
    std::vector<ReplicateResult> results(static_cast<std::size_t>(total));
    if (total == 0) return results;

    std::atomic<std::uint64_t> next{0};
    std::mutex failure_mutex;
    std::uint64_t failed_replicate = 0;  // 0 = none; otherwise the smallest failing id
    std::string failure_message;

    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= total) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failed_replicate != 0) return;
            }
            try {
                results[static_cast<std::size_t>(i)] = run_replicate(spec, h, i + 1, config.master_seed, config, pool);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (failed_replicate == 0 || i + 1 < failed_replicate) {
                    failed_replicate = i + 1;
                    failure_message = e.what();
                }
            }
        }
    };

    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, config.parallelism), total));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
    }
    if (failed_replicate != 0) throw ReplicateFailure(failed_replicate, failure_message);
    return results;
}

}  // namespace sntlab
