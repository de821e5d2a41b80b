#include "sntlab/estimators.hpp"

#include <functional>
#include <string>

#include "sntlab/simd/kernels.hpp"

namespace sntlab {

namespace {

bool at_risk_year2(const IndexRecord& rec) { return !rec.censored && !(rec.event && rec.futime == 1); }

using StratumRisk = std::function<std::optional<double>(Arm, std::optional<Severity>)>;

void fill_crude(AnalysisResult& r, const StratumRisk& risk) {
    r.risk_treated = risk(Arm::treated, std::nullopt);
    r.risk_untreated = risk(Arm::untreated, std::nullopt);
    if (!r.risk_treated || !r.risk_untreated) r.degenerate |= kEmptyCell;
    finish_contrast(r);
}

void fill_standardized(AnalysisResult& r, const StratumRisk& risk, const std::optional<TargetDistribution>& target) {
    if (!target) {
        r.degenerate |= kEmptyTarget;
        return;
    }
    std::optional<double> arm_risk[2];
    for (Arm arm : {Arm::untreated, Arm::treated}) {
        double sum = 0.0;
        bool ok = true;
        for (Severity s : {Severity::low, Severity::high}) {
            const double w = (*target)[s];
            if (w <= 0.0) continue;
            auto rs = risk(arm, s);
            if (!rs) {
                ok = false;
                break;
            }
            sum += w * *rs;
        }
        if (ok) arm_risk[static_cast<int>(arm)] = sum;
    }
    r.risk_untreated = arm_risk[0];
    r.risk_treated = arm_risk[1];
    if (!r.risk_treated || !r.risk_untreated) r.degenerate |= kEmptyCell;
    finish_contrast(r);
}

void count_arms(AnalysisResult& r, std::span<const IndexRecord> records) {
    for (const auto& rec : records) (rec.treated ? r.n_indexes_treated : r.n_indexes_untreated) += 1;
}

}  // namespace

double uncensored_probability(Severity next, const ScenarioSpec& spec, Design design, CalWeightMode mode) {
    const double initiate = spec.treat_prob[next];
    if (design == Design::esnt_cal && mode == CalWeightMode::paper_simplified) return 1.0 - initiate;
    return 1.0 - spec.decision_prob[next] * initiate;
}

WeightSchedule censoring_weights(const IndexRecord& rec, const ScenarioSpec& spec, Design design,
                                 CalWeightMode mode) {
    if (rec.treated || rec.index_visit != 1 || design == Design::spt) return {};
    const double p = uncensored_probability(rec.severity_next, spec, design, mode);
    if (!(p > 0.0)) {
        throw DegenerateWeight("censoring is certain for next-visit severity " +
                               std::string(rec.severity_next == Severity::high ? "high" : "low"));
    }
    return {1.0, 1.0 / p};
}

std::vector<WeightSchedule> dataset_weights(const StudyDataset& ds, const ScenarioSpec& spec, CalWeightMode mode) {
    std::vector<WeightSchedule> out(ds.indexes.size());
    for (std::size_t i = 0; i < ds.indexes.size(); ++i) {
        if (at_risk_year2(ds.indexes[i])) out[i] = censoring_weights(ds.indexes[i], spec, ds.design, mode);
    }
    return out;
}

std::optional<double> ipcw_km_risk(std::span<const IndexRecord> records, std::span<const WeightSchedule> weights,
                                   Arm arm, int tau, std::optional<Severity> stratum) {
    if (records.size() != weights.size()) throw std::invalid_argument("ipcw_km_risk: records/weights size mismatch");
    if (tau < 1 || tau > kHorizonYears) throw std::invalid_argument("ipcw_km_risk: tau must be 1 or 2");
    const bool want_treated = arm == Arm::treated;
    double survival = 1.0;
    bool any = false;
    for (int year = 1; year <= tau; ++year) {
        double events = 0.0, at_risk = 0.0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const IndexRecord& rec = records[i];
            if (rec.treated != want_treated) continue;
            if (stratum && rec.severity_at_index != *stratum) continue;
            if (rec.futime < year) continue;
            const double w = year == 1 ? weights[i].w1 : weights[i].w2;
            at_risk += w;
            if (rec.event && rec.futime == year) events += w;
        }
        if (year == 1) any = at_risk > 0.0;
        if (!any) return std::nullopt;
        if (at_risk > 0.0) survival *= 1.0 - events / at_risk;
    }
    return 1.0 - survival;
}

std::optional<TargetDistribution> severity_distribution(const StudyDataset& ds, IndexSubset subset) {
    std::uint64_t n[2] = {0, 0};
    for (const auto& rec : ds.indexes) {
        if (subset == IndexSubset::treated && !rec.treated) continue;
        ++n[to_index(rec.severity_at_index)];
    }
    const std::uint64_t total = n[0] + n[1];
    if (total == 0) return std::nullopt;
    const double high = static_cast<double>(n[1]) / static_cast<double>(total);
    return TargetDistribution{1.0 - high, high};
}

AnalysisResult standardized_rr(std::span<const IndexRecord> records, std::span<const WeightSchedule> weights,
                               const TargetDistribution& target) {
    AnalysisResult r;
    count_arms(r, records);
    fill_standardized(
        r, [&](Arm a, std::optional<Severity> s) { return ipcw_km_risk(records, weights, a, kHorizonYears, s); },
        target);
    return r;
}

AnalysisResult crude_rr(std::span<const IndexRecord> records, std::span<const WeightSchedule> weights) {
    AnalysisResult r;
    count_arms(r, records);
    fill_crude(r, [&](Arm a, std::optional<Severity> s) { return ipcw_km_risk(records, weights, a, kHorizonYears, s); });
    return r;
}

std::uint8_t CellTable::code(Arm arm, Severity stratum, int visit, Severity next, Path path) {
    return static_cast<std::uint8_t>((static_cast<unsigned>(arm) << 5) | (static_cast<unsigned>(stratum) << 4) |
                                     (static_cast<unsigned>(visit == 2) << 3) | (static_cast<unsigned>(next) << 2) |
                                     static_cast<unsigned>(path));
}

std::uint8_t CellTable::code(const IndexRecord& rec) {
    Path path = Path::event_free;
    if (rec.censored) {
        path = Path::censored_year1;
    } else if (rec.event) {
        path = rec.futime == 1 ? Path::event_year1 : Path::event_year2;
    }
    return code(rec.treated ? Arm::treated : Arm::untreated, rec.severity_at_index, rec.index_visit,
                rec.severity_next, path);
}

CellTable::CellTable(std::span<const IndexRecord> records) {
    std::vector<std::uint8_t> codes(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) codes[i] = code(records[i]);
    simd::count_codes(codes, counts_);
}

std::uint64_t CellTable::arm_total(Arm arm) const {
    std::uint64_t n = 0;
    const unsigned base = static_cast<unsigned>(arm) << 5;
    for (unsigned c = 0; c < 32; ++c) n += counts_[base | c];
    return n;
}

std::optional<double> CellTable::km_risk(const ScenarioSpec& spec, Design design, CalWeightMode mode, Arm arm,
                                         std::optional<Severity> stratum) const {
    std::uint64_t n1 = 0, d1 = 0;
    double n2 = 0.0, d2 = 0.0;
    for (Severity s : {Severity::low, Severity::high}) {
        if (stratum && s != *stratum) continue;
        for (int visit : {1, 2}) {
            for (Severity next : {Severity::low, Severity::high}) {
                auto n = [&](Path p) { return counts_[code(arm, s, visit, next, p)]; };
                const std::uint32_t e1 = n(Path::event_year1);
                const std::uint32_t c1 = n(Path::censored_year1);
                const std::uint32_t e2 = n(Path::event_year2);
                const std::uint32_t f = n(Path::event_free);
                n1 += e1 + c1 + e2 + f;
                d1 += e1;
                if (e2 + f == 0) continue;
                double w2 = 1.0;
                if (arm == Arm::untreated && visit == 1 && design != Design::spt) {
                    const double p = uncensored_probability(next, spec, design, mode);
                    if (!(p > 0.0)) throw DegenerateWeight("censoring is certain but uncensored indexes remain");
                    w2 = 1.0 / p;
                }
                n2 += w2 * static_cast<double>(e2 + f);
                d2 += w2 * static_cast<double>(e2);
            }
        }
    }
    if (n1 == 0) return std::nullopt;
    double survival = 1.0 - static_cast<double>(d1) / static_cast<double>(n1);
    if (n2 > 0.0) survival *= 1.0 - d2 / n2;
    return 1.0 - survival;
}

std::vector<AnalysisResult> analyze_replicate(std::span<const Individual> cohort, const StudyDataset& spt,
                                              const StudyDataset& cal, const StudyDataset& td,
                                              const ScenarioSpec& spec, CalWeightMode mode) {
    std::vector<AnalysisResult> out;
    out.reserve(14);

    const auto spt_all = severity_distribution(spt, IndexSubset::all);
    const auto spt_treated = severity_distribution(spt, IndexSubset::treated);

    auto battery = [&](const StudyDataset& ds) {
        const CellTable cells(ds.indexes);
        const StratumRisk risk = [&](Arm a, std::optional<Severity> s) {
            return cells.km_risk(spec, ds.design, mode, a, s);
        };
        auto make = [&](Analysis a) {
            AnalysisResult r;
            r.design = ds.design;
            r.analysis = a;
            r.n_indexes_treated = cells.arm_total(Arm::treated);
            r.n_indexes_untreated = cells.arm_total(Arm::untreated);
            return r;
        };

        if (ds.design == Design::spt) {
            AnalysisResult truth = cohort_true_rr(cohort);
            truth.design = Design::spt;
            out.push_back(truth);
        }
        AnalysisResult crude = make(Analysis::crude);
        fill_crude(crude, risk);
        out.push_back(crude);
        if (ds.design != Design::spt) {
            AnalysisResult ate = make(Analysis::ate_snt);
            fill_standardized(ate, risk, severity_distribution(ds, IndexSubset::all));
            out.push_back(ate);
            AnalysisResult att = make(Analysis::att_snt);
            fill_standardized(att, risk, severity_distribution(ds, IndexSubset::treated));
            out.push_back(att);
        }
        AnalysisResult ate_spt = make(Analysis::ate_spt);
        fill_standardized(ate_spt, risk, spt_all);
        out.push_back(ate_spt);
        AnalysisResult att_spt = make(Analysis::att_spt);
        fill_standardized(att_spt, risk, spt_treated);
        out.push_back(att_spt);
    };

    battery(spt);
    battery(cal);
    battery(td);
    return out;
}

}  // namespace sntlab
