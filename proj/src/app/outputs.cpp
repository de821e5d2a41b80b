#include "sntlab/app/outputs.hpp"

#include <cmath>

#include "sntlab/csv.hpp"

namespace sntlab::app {

namespace {

ScenarioId scenario_field(std::string_view text) {
    auto id = parse_scenario_id(text);
    if (!id) throw csv::ParseError("unknown scenario_id '" + std::string(text) + "'");
    return *id;
}

Design design_field(std::string_view text) {
    auto d = parse_design(text);
    if (!d) throw csv::ParseError("unknown design '" + std::string(text) + "'");
    return *d;
}

Analysis analysis_field(std::string_view text) {
    auto a = parse_analysis(text);
    if (!a) throw csv::ParseError("unknown analysis '" + std::string(text) + "'");
    return *a;
}

Severity severity_field(std::string_view text) {
    if (text == "low") return Severity::low;
    if (text == "high") return Severity::high;
    throw csv::ParseError("unknown severity '" + std::string(text) + "'");
}

std::string_view severity_name(Severity s) { return s == Severity::high ? "high" : "low"; }

const char* const kTruthEstimands[] = {"marginal", "std_spt_all", "std_spt_treated"};

}  // namespace

void write_hazards(std::ostream& out, std::span<const HazardLine> lines) {
    csv::Writer w(out);
    w.header({"scenario_id", "pi", "p00", "p01", "p10", "p11", "max_abs_residual", "feasible"});
    for (const auto& l : lines) {
        const auto& h = l.report.hazards;
        w.field(to_string(l.spec.scenario_id)).field(l.spec.progression_prob);
        w.field(h.p00).field(h.p01).field(h.p10).field(h.p11);
        w.field(l.report.max_abs_residual()).field(l.report.feasible ? "1" : "0");
        w.end_row();
    }
}

void write_truth(std::ostream& out, std::span<const TruthLine> lines) {
    csv::Writer w(out);
    w.header({"scenario_id", "pi", "estimand", "risk_treated", "risk_untreated", "rr_true", "log_rr_true"});
    for (const auto& l : lines) {
        const TruthRow* rows[] = {&l.truth.marginal, &l.truth.std_spt_all, &l.truth.std_spt_treated};
        for (int i = 0; i < 3; ++i) {
            w.field(to_string(l.spec.scenario_id)).field(l.spec.progression_prob).field(kTruthEstimands[i]);
            w.field(rows[i]->risk_treated).field(rows[i]->risk_untreated).field(rows[i]->rr).field(rows[i]->log_rr);
            w.end_row();
        }
    }
}

std::map<ScenarioId, TruthTable> read_truth(std::istream& in, std::string_view source) {
    auto t = csv::Table::read(
        in, {"scenario_id", "pi", "estimand", "risk_treated", "risk_untreated", "rr_true", "log_rr_true"}, source);
    std::map<ScenarioId, TruthTable> out;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const auto& r = t.row(i);
        TruthTable& table = out[scenario_field(r[0])];
        TruthRow row{csv::parse_double(r[3]), csv::parse_double(r[4]), csv::parse_double(r[5]),
                     csv::parse_double(r[6])};
        if (r[2] == kTruthEstimands[0]) {
            table.marginal = row;
        } else if (r[2] == kTruthEstimands[1]) {
            table.std_spt_all = row;
        } else if (r[2] == kTruthEstimands[2]) {
            table.std_spt_treated = row;
        } else {
            throw csv::ParseError(std::string(source) + ": unknown estimand '" + r[2] + "'");
        }
    }
    return out;
}

void write_estimates(std::ostream& out, std::span<const EstimateRow> rows) {
    csv::Writer w(out);
    w.header({"scenario_id", "replicate", "design", "analysis", "target_population", "risk_treated",
              "risk_untreated", "rr", "log_rr", "n_indexes_treated", "n_indexes_untreated", "degenerate_flag"});
    for (const auto& e : rows) {
        const auto& r = e.result;
        w.field(to_string(e.scenario)).field(e.replicate).field(to_string(r.design)).field(to_string(r.analysis));
        w.field(target_population(r.design, r.analysis));
        w.field(r.risk_treated).field(r.risk_untreated).field(r.rr).field(r.log_rr);
        w.field(r.n_indexes_treated).field(r.n_indexes_untreated).field(static_cast<std::uint64_t>(r.degenerate));
        w.end_row();
    }
}

std::vector<EstimateRow> read_estimates(std::istream& in, std::string_view source) {
    auto t = csv::Table::read(in,
                              {"scenario_id", "replicate", "design", "analysis", "target_population", "risk_treated",
                               "risk_untreated", "rr", "log_rr", "n_indexes_treated", "n_indexes_untreated",
                               "degenerate_flag"},
                              source);
    std::vector<EstimateRow> out;
    out.reserve(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const auto& f = t.row(i);
        EstimateRow e;
        e.scenario = scenario_field(f[0]);
        e.replicate = csv::parse_u64(f[1]);
        e.result.design = design_field(f[2]);
        e.result.analysis = analysis_field(f[3]);
        e.result.risk_treated = csv::parse_optional_double(f[5]);
        e.result.risk_untreated = csv::parse_optional_double(f[6]);
        e.result.rr = csv::parse_optional_double(f[7]);
        e.result.log_rr = csv::parse_optional_double(f[8]);
        e.result.n_indexes_treated = csv::parse_u64(f[9]);
        e.result.n_indexes_untreated = csv::parse_u64(f[10]);
        e.result.degenerate = static_cast<std::uint32_t>(csv::parse_u64(f[11]));
        out.push_back(e);
    }
    return out;
}

void write_describe(std::ostream& out, std::span<const DescribeRecord> rows) {
    csv::Writer w(out);
    w.header({"scenario_id", "replicate", "design", "group", "severity", "n_people", "n_indexes", "pct_high",
              "avg_indexes_per_person"});
    for (const auto& d : rows) {
        w.field(to_string(d.scenario)).field(d.replicate).field(to_string(d.row.design));
        w.field(to_string(d.row.group)).field(severity_name(d.row.severity));
        w.field(d.row.n_people).field(d.row.n_indexes).field(d.row.pct_high).field(d.row.avg_indexes_per_person);
        w.end_row();
    }
}

std::vector<DescribeRecord> read_describe(std::istream& in, std::string_view source) {
    auto t = csv::Table::read(in,
                              {"scenario_id", "replicate", "design", "group", "severity", "n_people", "n_indexes",
                               "pct_high", "avg_indexes_per_person"},
                              source);
    std::vector<DescribeRecord> out;
    out.reserve(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const auto& f = t.row(i);
        DescribeRecord d;
        d.scenario = scenario_field(f[0]);
        d.replicate = csv::parse_u64(f[1]);
        d.row.design = design_field(f[2]);
        auto g = parse_describe_group(f[3]);
        if (!g) throw csv::ParseError(std::string(source) + ": unknown group '" + f[3] + "'");
        d.row.group = *g;
        d.row.severity = severity_field(f[4]);
        d.row.n_people = csv::parse_u64(f[5]);
        d.row.n_indexes = csv::parse_u64(f[6]);
        d.row.pct_high = csv::parse_optional_double(f[7]);
        d.row.avg_indexes_per_person = csv::parse_optional_double(f[8]);
        out.push_back(d);
    }
    return out;
}

void write_summary(std::ostream& out, std::span<const MetricsRow> rows) {
    csv::Writer w(out);
    w.header({"scenario_id", "design", "analysis", "target_population", "rr_summary", "bias", "mcse_bias", "ese",
              "rmse", "n_effective"});
    for (const auto& m : rows) {
        w.field(to_string(m.scenario)).field(to_string(m.design)).field(to_string(m.analysis));
        w.field(target_population(m.design, m.analysis));
        w.field(m.rr_summary).field(m.bias).field(m.mcse_bias).field(m.ese).field(m.rmse).field(m.n_effective);
        w.end_row();
    }
}

std::vector<MetricsRow> read_summary(std::istream& in, std::string_view source) {
    auto t = csv::Table::read(in,
                              {"scenario_id", "design", "analysis", "target_population", "rr_summary", "bias",
                               "mcse_bias", "ese", "rmse", "n_effective"},
                              source);
    std::vector<MetricsRow> out;
    out.reserve(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const auto& f = t.row(i);
        MetricsRow m;
        m.scenario = scenario_field(f[0]);
        m.design = design_field(f[1]);
        m.analysis = analysis_field(f[2]);
        m.rr_summary = csv::parse_optional_double(f[4]);
        m.bias = csv::parse_optional_double(f[5]);
        m.mcse_bias = csv::parse_optional_double(f[6]);
        m.ese = csv::parse_optional_double(f[7]);
        m.rmse = csv::parse_optional_double(f[8]);
        if (m.rmse) m.mse = *m.rmse * *m.rmse;
        m.n_effective = csv::parse_u64(f[9]);
        out.push_back(m);
    }
    return out;
}

void write_figure(std::ostream& out, std::span<const MetricsRow> rows, FigureEstimand estimand) {
    csv::Writer w(out);
    w.header({"scenario", "design", "standardization_target", "bias", "mcse"});
    const Analysis own = estimand == FigureEstimand::ate ? Analysis::ate_snt : Analysis::att_snt;
    const Analysis spt = estimand == FigureEstimand::ate ? Analysis::ate_spt : Analysis::att_spt;
    for (const auto& m : rows) {
        std::string_view target;
        if (m.analysis == Analysis::crude) {
            target = "crude";
        } else if (m.analysis == own) {
            target = "SNT";
        } else if (m.analysis == spt) {
            target = "SPT";
        } else {
            continue;
        }
        w.field(to_string(m.scenario)).field(to_string(m.design)).field(target).field(m.bias).field(m.mcse_bias);
        w.end_row();
    }
}

void write_describe_summary(std::ostream& out, std::span<const DescribeSummaryRow> rows) {
    csv::Writer w(out);
    w.header({"scenario_id", "design", "group", "severity", "statistic", "median", "q25", "q75", "n_replicates"});
    for (const auto& r : rows) {
        w.field(to_string(r.scenario)).field(to_string(r.design)).field(to_string(r.group));
        w.field(severity_name(r.severity)).field(r.statistic);
        w.field(r.median).field(r.q25).field(r.q75).field(r.n_replicates);
        w.end_row();
    }
}

AnalysisResult quantized(const AnalysisResult& r) {
    AnalysisResult q = r;
    q.risk_treated = csv::quantize(r.risk_treated);
    q.risk_untreated = csv::quantize(r.risk_untreated);
    q.rr = csv::quantize(r.rr);
    q.log_rr = csv::quantize(r.log_rr);
    return q;
}

TruthTable quantized(const TruthTable& t) {
    auto q = [](const TruthRow& r) {
        return TruthRow{csv::quantize(r.risk_treated), csv::quantize(r.risk_untreated), csv::quantize(r.rr),
                        csv::quantize(r.log_rr)};
    };
    return {q(t.marginal), q(t.std_spt_all), q(t.std_spt_treated)};
}

DescribeRow quantized(const DescribeRow& r) {
    DescribeRow q = r;
    q.pct_high = csv::quantize(r.pct_high);
    q.avg_indexes_per_person = csv::quantize(r.avg_indexes_per_person);
    return q;
}

}  // namespace sntlab::app
