#pragma once

#include <string>
#include <vector>

#include "starris/config.hpp"
#include "starris/rates.hpp"
#include "starris/sweep.hpp"

namespace starris {

enum class ValidationLevel { fast, full };

ValidationLevel parse_level(const std::string& s);

struct CriterionResult {
    std::string id;    // C1 .. C7
    std::string name;  // short label
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Fault injection for tests of the validator itself.
struct ValidationHooks {
    ClosedFormHooks closed;
};

struct ValidationReport {
    ValidationLevel level = ValidationLevel::fast;
    std::vector<CriterionResult> criteria;
    bool passed() const;
};

CriterionResult check_closed_form_certification(const SystemConfig& cfg, const ValidationHooks& h = {});
CriterionResult check_moment_fidelity(const SystemConfig& cfg, ValidationLevel level);
CriterionResult check_theory_vs_simulation(const SystemConfig& cfg, ValidationLevel level,
                                           const ValidationHooks& h = {});
CriterionResult check_algebraic_identities(const SystemConfig& cfg);
CriterionResult check_figure_trends(const SystemConfig& cfg, ValidationLevel level);
CriterionResult check_determinism(const SystemConfig& cfg, ValidationLevel level);
CriterionResult check_special_functions();

/// Runs every criterion in order. `on_result` (optional) sees each result
/// as it completes.
ValidationReport run_validation(const SystemConfig& cfg, ValidationLevel level,
                                const ValidationHooks& h = {},
                                void (*on_result)(const CriterionResult&) = nullptr);

std::string format_result(const CriterionResult& r);

/// Reads rows back from sweep_csv output (comment lines skipped).
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

}  // namespace starris
