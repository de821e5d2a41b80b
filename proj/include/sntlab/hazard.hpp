#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "sntlab/scenario.hpp"

namespace sntlab {

enum class Arm : std::uint8_t { untreated = 0, treated = 1 };

/// Per-visit outcome probabilities p[arm][severity]: the chance the outcome
/// occurs in the year following a visit, given the arm and the severity at
/// that visit.
struct HazardSet {
    double p00 = 0.0;  // untreated, low
    double p01 = 0.0;  // untreated, high
    double p10 = 0.0;  // treated, low
    double p11 = 0.0;  // treated, high

    double at(Arm a, Severity s) const {
        if (a == Arm::untreated) return s == Severity::high ? p01 : p00;
        return s == Severity::high ? p11 : p10;
    }
    friend bool operator==(const HazardSet&, const HazardSet&) = default;
};

inline constexpr double kResidualTolerance = 1e-10;

struct SolveReport {
    HazardSet hazards;
    std::array<double, 4> residuals{};
    bool feasible = false;
    /// Empty when feasible; otherwise names the equation and the violated bound.
    std::string diagnostic;

    double max_abs_residual() const;
};

class SolverInfeasible : public std::runtime_error {
public:
    SolverInfeasible(std::string what, SolveReport report)
        : std::runtime_error(std::move(what)), report_(std::move(report)) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

/// Two-year risk starting at high severity with per-visit probability p: p + (1-p)p.
double two_year_risk_high(double p);

/// Two-year risk starting at low severity: own-stratum probability p in year
/// one, then p or the post-progression probability q in year two.
double two_year_risk_low(double p, double q, double pi);

/// Residuals of the four defining equations, ordered (untreated high, treated
/// high, untreated low, treated low). The treated targets are delta_z times
/// the untreated two-year risk of the same stratum.
std::array<double, 4> residuals(const HazardSet& h, const ScenarioSpec& spec);

/// Solves the four equations without throwing; `feasible` reports the outcome.
SolveReport try_solve(const ScenarioSpec& spec);

/// As try_solve, but throws SolverInfeasible when any probability leaves [0,1].
SolveReport solve(const ScenarioSpec& spec);

}  // namespace sntlab
