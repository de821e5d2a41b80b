#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace sntlab {

enum class Design : std::uint8_t { spt = 0, esnt_cal = 1, esnt_td = 2 };

enum class Analysis : std::uint8_t { true_rr, crude, ate_snt, att_snt, ate_spt, att_spt };

std::string_view to_string(Design d);
std::string_view to_string(Analysis a);
std::optional<Design> parse_design(std::string_view text);
std::optional<Analysis> parse_analysis(std::string_view text);

/// Population the risks were standardised to, as written to estimates.csv.
std::string_view target_population(Design d, Analysis a);

enum DegenerateFlag : std::uint32_t {
    kNoDegeneracy = 0,
    kEmptyCell = 1u << 0,      // an arm x stratum cell (or whole arm) had no records
    kZeroRiskUntreated = 1u << 1,
    kZeroRiskTreated = 1u << 2,  // rr = 0, log rr undefined
    kEmptyTarget = 1u << 3,    // standardisation target had no indexes
};

/// One estimator's risks and contrast for one replicate.
struct AnalysisResult {
    Design design = Design::spt;
    Analysis analysis = Analysis::crude;
    std::optional<double> risk_treated;
    std::optional<double> risk_untreated;
    std::optional<double> rr;
    std::optional<double> log_rr;
    std::uint64_t n_indexes_treated = 0;
    std::uint64_t n_indexes_untreated = 0;
    std::uint32_t degenerate = kNoDegeneracy;

    bool usable() const { return degenerate == kNoDegeneracy && log_rr.has_value(); }
};

/// Fills rr/log_rr and the zero-risk flags from the two risks.
void finish_contrast(AnalysisResult& r);

}  // namespace sntlab
