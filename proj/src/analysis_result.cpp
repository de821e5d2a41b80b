#include "sntlab/analysis_result.hpp"

#include <cmath>

namespace sntlab {

std::string_view to_string(Design d) {
    switch (d) {
        case Design::spt: return "SPT";
        case Design::esnt_cal: return "eSNT-CAL";
        case Design::esnt_td: return "eSNT-TD";
    }
    return "?";
}

std::string_view to_string(Analysis a) {
    switch (a) {
        case Analysis::true_rr: return "true_rr";
        case Analysis::crude: return "crude";
        case Analysis::ate_snt: return "ate_snt";
        case Analysis::att_snt: return "att_snt";
        case Analysis::ate_spt: return "ate_spt";
        case Analysis::att_spt: return "att_spt";
    }
    return "?";
}

std::optional<Design> parse_design(std::string_view text) {
    for (auto d : {Design::spt, Design::esnt_cal, Design::esnt_td}) {
        if (to_string(d) == text) return d;
    }
    return std::nullopt;
}

std::optional<Analysis> parse_analysis(std::string_view text) {
    for (auto a : {Analysis::true_rr, Analysis::crude, Analysis::ate_snt, Analysis::att_snt, Analysis::ate_spt,
                   Analysis::att_spt}) {
        if (to_string(a) == text) return a;
    }
    return std::nullopt;
}

std::string_view target_population(Design d, Analysis a) {
    switch (a) {
        case Analysis::true_rr: return "superpopulation";
        case Analysis::crude: return "none";
        case Analysis::ate_snt: return d == Design::esnt_td ? "eSNT-TD-all" : "eSNT-CAL-all";
        case Analysis::att_snt: return d == Design::esnt_td ? "eSNT-TD-treated" : "eSNT-CAL-treated";
        case Analysis::ate_spt: return "SPT-all";
        case Analysis::att_spt: return "SPT-treated";
    }
    return "?";
}

void finish_contrast(AnalysisResult& r) {
    r.rr.reset();
    r.log_rr.reset();
    if (!r.risk_treated || !r.risk_untreated) return;
    if (*r.risk_untreated <= 0.0) {
        r.degenerate |= kZeroRiskUntreated;
        return;
    }
    r.rr = *r.risk_treated / *r.risk_untreated;
    if (*r.rr > 0.0) {
        r.log_rr = std::log(*r.rr);
    } else {
        r.degenerate |= kZeroRiskTreated;
    }
}

}  // namespace sntlab
