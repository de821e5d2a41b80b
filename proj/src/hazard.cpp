#include "sntlab/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sntlab {

namespace {

/// Smaller root of a*p^2 - b*p + c = 0 (b > 0), written to avoid cancellation
/// and to stay valid as a -> 0.
std::optional<double> smaller_root(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double denom = b + std::sqrt(disc);
    if (denom == 0.0) return std::nullopt;
    return 2.0 * c / denom;
}

/// Per-visit probability giving two-year risk `target` for a high-severity start.
std::optional<double> solve_high(double target) { return smaller_root(1.0, 2.0, target); }

/// Per-visit probability p with two_year_risk_low(p, q, pi) == target.
/// Rearranged: (1-pi) p^2 - (2 - pi - pi q) p + (target - pi q) = 0.
std::optional<double> solve_low(double target, double q, double pi) {
    return smaller_root(1.0 - pi, 2.0 - pi - pi * q, target - pi * q);
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

double SolveReport::max_abs_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, std::abs(r));
    return m;
}

double two_year_risk_high(double p) { return p + (1.0 - p) * p; }

double two_year_risk_low(double p, double q, double pi) {
    return p + (1.0 - pi) * (1.0 - p) * p + pi * (1.0 - p) * q;
}

std::array<double, 4> residuals(const HazardSet& h, const ScenarioSpec& spec) {
    const double pi = spec.progression_prob;
    const auto& f = spec.risk_untreated;
    return {
        two_year_risk_high(h.p01) - f.high,
        two_year_risk_high(h.p11) - spec.delta.high * f.high,
        two_year_risk_low(h.p00, h.p01, pi) - f.low,
        two_year_risk_low(h.p10, h.p11, pi) - spec.delta.low * f.low,
    };
}

SolveReport try_solve(const ScenarioSpec& spec) {
    SolveReport report;
    const double pi = spec.progression_prob;
    const auto& f = spec.risk_untreated;
    const double nan = std::nan("");
    std::ostringstream why;

    auto p01 = solve_high(f.high);
    auto p11 = solve_high(spec.delta.high * f.high);
    report.hazards.p01 = p01.value_or(nan);
    report.hazards.p11 = p11.value_or(nan);

    auto p00 = solve_low(f.low, report.hazards.p01, pi);
    auto p10 = solve_low(spec.delta.low * f.low, report.hazards.p11, pi);
    report.hazards.p00 = p00.value_or(nan);
    report.hazards.p10 = p10.value_or(nan);

    report.residuals = residuals(report.hazards, spec);

    struct Check {
        const char* equation;
        const char* name;
        double value;
        double target;
        double progressed;  // pi * q for the low-severity equations, 0 otherwise
    };
    const Check checks[] = {
        {"untreated high-severity", "p01", report.hazards.p01, f.high, 0.0},
        {"treated high-severity", "p11", report.hazards.p11, spec.delta.high * f.high, 0.0},
        {"untreated low-severity", "p00", report.hazards.p00, f.low, pi * report.hazards.p01},
        {"treated low-severity", "p10", report.hazards.p10, spec.delta.low * f.low, pi * report.hazards.p11},
    };
    for (const auto& c : checks) {
        if (in_unit(c.value)) continue;
        if (!why.str().empty()) why << "; ";
        why << c.equation << " equation: " << c.name << " = " << c.value << " outside [0,1]";
        if (c.progressed > 0.0 && c.value < 0.0) {
            why << " (requires pi*q <= target, got " << c.progressed << " > " << c.target << ")";
        }
    }
    const bool in_range = why.str().empty();
    if (in_range && report.max_abs_residual() >= kResidualTolerance) {
        why << "max |residual| " << report.max_abs_residual() << " >= " << kResidualTolerance;
    }
    report.diagnostic = why.str();
    report.feasible = report.diagnostic.empty();
    return report;
}

SolveReport solve(const ScenarioSpec& spec) {
    auto report = try_solve(spec);
    if (!report.feasible) {
        std::string msg = "hazard system infeasible for " + std::string(to_string(spec.scenario_id)) + ": " +
                          report.diagnostic;
        throw SolverInfeasible(std::move(msg), std::move(report));
    }
    return report;
}

}  // namespace sntlab
