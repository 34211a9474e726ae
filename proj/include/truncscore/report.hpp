#ifndef TRUNCSCORE_REPORT_HPP
#define TRUNCSCORE_REPORT_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "truncscore/estimators.hpp"
#include "truncscore/random.hpp"
#include "truncscore/testing.hpp"

namespace truncscore {

// Six-row parameter table: score means per arm and their difference, then
// landmark survival per arm and the risk difference, with standard errors,
// 95% confidence limits and two-sided p-values.
std::string render_estimate_table(const EstimationResult& est);

// Full text report: the parameter table plus the one-sided signed Wald
// blocks, the intersection test block and the decision lines.
std::string render_summary(const EstimationResult& est, const ClosedTestReport& rep,
                           const TestConfig& cfg);

// Machine-readable companions carrying the same numbers at full precision.
std::string structured_estimate_json(const EstimationResult& est);
std::string structured_test_json(const EstimationResult& est, const ClosedTestReport& rep,
                                 const TestConfig& cfg);

// (rho, value) tables for the critical-value curve and the calibrated
// power comparison curves of the two procedures.
std::string critical_value_csv(const std::vector<double>& rhos, double alpha);
std::string power_curve_csv(const std::vector<double>& rhos, double alpha, PowerMode mode,
                            double target, std::size_t reps, const RandomSource& root);

} // namespace truncscore

#endif
