#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "sntlab/hazard.hpp"
#include "sntlab/metrics.hpp"
#include "sntlab/population.hpp"
#include "sntlab/scenario.hpp"

namespace sntlab::app {

struct HazardLine {
    ScenarioSpec spec;
    SolveReport report;
};

struct TruthLine {
    ScenarioSpec spec;
    TruthTable truth;
};

void write_hazards(std::ostream& out, std::span<const HazardLine> lines);
void write_truth(std::ostream& out, std::span<const TruthLine> lines);
std::map<ScenarioId, TruthTable> read_truth(std::istream& in, std::string_view source);

void write_estimates(std::ostream& out, std::span<const EstimateRow> rows);
std::vector<EstimateRow> read_estimates(std::istream& in, std::string_view source);

void write_describe(std::ostream& out, std::span<const DescribeRecord> rows);
std::vector<DescribeRecord> read_describe(std::istream& in, std::string_view source);

void write_summary(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_summary(std::istream& in, std::string_view source);

enum class FigureEstimand { ate, att };

/// Long-format bias and MCSE for the crude analysis plus the ATE- (or ATT-)
/// type standardisations, keyed by standardisation target (crude/SNT/SPT).
void write_figure(std::ostream& out, std::span<const MetricsRow> rows, FigureEstimand estimand);

void write_describe_summary(std::ostream& out, std::span<const DescribeSummaryRow> rows);

/// Values as they read back from the CSV files.
AnalysisResult quantized(const AnalysisResult& r);
TruthTable quantized(const TruthTable& t);
DescribeRow quantized(const DescribeRow& r);

}  // namespace sntlab::app
