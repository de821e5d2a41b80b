#include "sntlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace sntlab {

double TruthReference::theta(ScenarioId id, Analysis a) const {
    if (override_rr) return std::log(*override_rr);
    auto it = truths.find(id);
    if (it == truths.end()) throw std::out_of_range("no truth for scenario " + std::string(to_string(id)));
    switch (a) {
        case Analysis::ate_snt:
        case Analysis::ate_spt: return it->second.std_spt_all.log_rr;
        case Analysis::att_snt:
        case Analysis::att_spt: return it->second.std_spt_treated.log_rr;
        default: return it->second.marginal.log_rr;
    }
}

MomentSummary moments(std::span<const double> values, double theta) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("moments: need at least two values");
    const double nd = static_cast<double>(n);
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / nd;
    double ss_mean = 0.0, ss_theta = 0.0;
    for (double v : values) {
        ss_mean += (v - mean) * (v - mean);
        ss_theta += (v - theta) * (v - theta);
    }
    MomentSummary m;
    m.mean = mean;
    m.ese = std::sqrt(ss_mean / (nd - 1.0));
    m.mse = ss_theta / nd;
    m.mcse = std::sqrt(ss_mean / (nd * (nd - 1.0)));
    return m;
}

std::vector<MetricsRow> summarize(std::span<const EstimateRow> estimates, const TruthReference& reference) {
    using Key = std::tuple<int, int, int>;
    struct Cell {
        std::vector<double> values;
    };
    std::map<Key, Cell> cells;
    for (const EstimateRow& e : estimates) {
        Cell& cell = cells[{ordinal(e.scenario), static_cast<int>(e.result.design), static_cast<int>(e.result.analysis)}];
        if (e.result.usable()) cell.values.push_back(*e.result.log_rr);
    }

    std::vector<MetricsRow> out;
    out.reserve(cells.size());
    for (const auto& [key, cell] : cells) {
        MetricsRow row;
        row.scenario = static_cast<ScenarioId>(std::get<0>(key));
        row.design = static_cast<Design>(std::get<1>(key));
        row.analysis = static_cast<Analysis>(std::get<2>(key));
        row.theta = reference.theta(row.scenario, row.analysis);
        row.n_effective = cell.values.size();
        if (cell.values.size() >= 2) {
            const MomentSummary m = moments(cell.values, row.theta);
            row.rr_summary = std::exp(m.mean);
            row.bias = m.mean - row.theta;
            row.ese = m.ese;
            row.mse = m.mse;
            row.rmse = std::sqrt(m.mse);
            row.mcse_bias = m.mcse;
        }
        out.push_back(row);
    }
    return out;
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<DescribeSummaryRow> summarize_descriptives(std::span<const DescribeRecord> records) {
    // statistic index: 0 n_people, 1 n_indexes, 2 pct_high, 3 avg_indexes_per_person
    static constexpr const char* kStatistics[] = {"n_people", "n_indexes", "pct_high", "avg_indexes_per_person"};
    using Key = std::tuple<int, int, int, int, int>;
    std::map<Key, std::vector<double>> samples;
    for (const DescribeRecord& r : records) {
        const int sc = ordinal(r.scenario), d = static_cast<int>(r.row.design), g = static_cast<int>(r.row.group),
                  s = to_index(r.row.severity);
        samples[{sc, d, g, s, 0}].push_back(static_cast<double>(r.row.n_people));
        samples[{sc, d, g, s, 1}].push_back(static_cast<double>(r.row.n_indexes));
        if (r.row.pct_high) samples[{sc, d, g, s, 2}].push_back(*r.row.pct_high);
        if (r.row.avg_indexes_per_person) samples[{sc, d, g, s, 3}].push_back(*r.row.avg_indexes_per_person);
    }
    std::vector<DescribeSummaryRow> out;
    out.reserve(samples.size());
    for (const auto& [key, values] : samples) {
        DescribeSummaryRow row;
        row.scenario = static_cast<ScenarioId>(std::get<0>(key));
        row.design = static_cast<Design>(std::get<1>(key));
        row.group = static_cast<DescribeGroup>(std::get<2>(key));
        row.severity = static_cast<Severity>(std::get<3>(key));
        row.statistic = kStatistics[std::get<4>(key)];
        row.median = quantile(values, 0.5);
        row.q25 = quantile(values, 0.25);
        row.q75 = quantile(values, 0.75);
        row.n_replicates = values.size();
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace sntlab
