#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sntlab/analysis_result.hpp"
#include "sntlab/designs.hpp"
#include "sntlab/population.hpp"
#include "sntlab/scenario.hpp"

namespace sntlab {

/// One row of estimates.csv.
struct EstimateRow {
    ScenarioId scenario = ScenarioId::S1;
    std::uint64_t replicate = 0;
    AnalysisResult result;
};

/// Bias reference per scenario: the enumerated truth, or a fixed RR.
struct TruthReference {
    std::map<ScenarioId, TruthTable> truths;
    std::optional<double> override_rr;

    /// Log-RR reference for an analysis. ATE-type analyses use the SPT-all
    /// truth, ATT-type the SPT-treated truth, crude/true_rr the marginal one.
    double theta(ScenarioId id, Analysis a) const;
};

struct MetricsRow {
    ScenarioId scenario = ScenarioId::S1;
    Design design = Design::spt;
    Analysis analysis = Analysis::crude;
    double theta = 0.0;
    /// exp(mean log RR); all metric fields are empty when n_effective < 2.
    std::optional<double> rr_summary;
    std::optional<double> bias;
    std::optional<double> mcse_bias;
    std::optional<double> ese;
    std::optional<double> mse;
    std::optional<double> rmse;
    std::uint64_t n_effective = 0;
};

/// Performance measures per (scenario, design, analysis) cell over the usable
/// replicates, in scenario / design / battery order.
std::vector<MetricsRow> summarize(std::span<const EstimateRow> estimates, const TruthReference& reference);

struct MomentSummary {
    double mean = 0.0;
    double ese = 0.0;
    double mse = 0.0;
    double mcse = 0.0;
};

/// Bias-style moments of `values` around `theta`; needs at least two values.
MomentSummary moments(std::span<const double> values, double theta);

/// Linear interpolation between order statistics (the R type-7 rule).
double quantile(std::vector<double> values, double prob);

struct DescribeRecord {
    ScenarioId scenario = ScenarioId::S1;
    std::uint64_t replicate = 0;
    DescribeRow row;
};

struct DescribeSummaryRow {
    ScenarioId scenario = ScenarioId::S1;
    Design design = Design::spt;
    DescribeGroup group = DescribeGroup::all;
    Severity severity = Severity::low;
    std::string statistic;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::uint64_t n_replicates = 0;
};

/// Median and IQR of each descriptive statistic across replicates.
std::vector<DescribeSummaryRow> summarize_descriptives(std::span<const DescribeRecord> records);

}  // namespace sntlab
