#ifndef TRUNCSCORE_TESTING_HPP
#define TRUNCSCORE_TESTING_HPP

#include <cstddef>
#include <vector>

#include "truncscore/estimators.hpp"
#include "truncscore/numerics.hpp"
#include "truncscore/random.hpp"

namespace truncscore {

// Margins and level for the two one-sided hypotheses H_Y: psi_y <= delta_y
// and H_T: psi_t <= -delta_t (superiority on the score, non-inferiority on
// the landmark risk difference).
struct TestConfig {
    double alpha = 0.025;
    double delta_y = 0.0;
    double delta_t = 0.05;
};
// Throws ValidationError unless alpha is in (0, 0.5) and both margins >= 0.
void validate(const TestConfig& cfg);

enum class Side { y, t };

struct SignedWaldResult {
    double z = 0.0;
    double statistic = 0.0; // z^2 when z >= 0, else 0
    double p_value = 1.0;
};
// z = (psi_hat - margin) / se for side y, (psi_hat + margin) / se for side t;
// p = 1 - norm_cdf(z) for z > 0 and 1 otherwise.  Throws DomainError when
// se <= 0.
SignedWaldResult signed_wald_single(double psi_hat, double se, double margin, Side side);

struct IntersectionResult {
    double statistic = 0.0;
    double z_y = 0.0, z_t = 0.0;
    double rho_hat = 0.0;
    double q_hat = 0.0;     // 1/4 - arcsin(rho_hat) / (2 pi), in [0, 1/2)
    double p_value = 1.0;   // from the (1/2 - q, 1/2, q) mixture of chi2_0/1/2
};
// Signed Wald test of the intersection null, computed by the closed-form
// region decomposition:
//   SW = 0                      when z_max < 0,
//   SW = z_max^2                when z_min <= rho * z_max,
//   SW = (z_max^2 + z_min^2 - 2 rho z_min z_max) / (1 - rho^2)  otherwise,
// which equals the squared distance from u_hat = sqrt(Sigma_over_n^{-1})
// (psi_hat - margins) to the transformed null region.  Throws
// DegenerateCovariance when |rho_hat| >= 1 - 1e-10.
IntersectionResult signed_wald_intersection(const std::vector<double>& psi_hat,
                                            const Matrix& sigma_over_n,
                                            double delta_y, double delta_t);

// Euclidean projection onto an intersection of half-spaces {u: a_j' u <= 0}
// by cyclic Dykstra iteration with correction vectors; stops when an entire
// sweep moves the iterate by <= 1e-12 in max-norm.  Throws NonConvergence
// after 1e5 sweeps and ValidationError for an empty or zero-normal input.
std::vector<double> dykstra_project(const std::vector<double>& point,
                                    const std::vector<std::vector<double>>& normals);

struct HolmDecisions {
    bool reject_y = false;
    bool reject_t = false;
};

struct ClosedTestReport {
    IntersectionResult intersection;
    SignedWaldResult single_y, single_t;
    bool reject_y = false; // intersection p <= alpha and single p <= alpha
    bool reject_t = false;
    HolmDecisions comparator;
};
// Closed testing of the two hypotheses on an estimation result, with the
// Bonferroni-Holm step-down decisions (alpha/2 then alpha) as comparator.
ClosedTestReport closed_test(const EstimationResult& est, const TestConfig& cfg);

// The c > 0 with (1/2) chisq_sf(c, 1) + q(rho) chisq_sf(c, 2) = alpha, so
// that SW >= c rejects the intersection at level alpha.
double critical_value(double rho, double alpha);

enum class PowerMode { conjunctive, disjunctive };

struct PowerComparison {
    double r_star = 0.0;         // common shift with Holm mode-power = target
    double power_holm = 0.0;
    double power_proposed = 0.0;
};
// Simulates reps draws of correlated standard normal (z_y, z_t), finds by
// bisection the common noncentrality r such that the Bonferroni-Holm
// conjunctive (both rejected) or disjunctive (at least one) power at
// z + (r, r) equals target, then evaluates the closed-testing power on the
// same draws.  Requires reps >= 1e5 (ValidationError).
PowerComparison power_comparison(double rho, double alpha, PowerMode mode,
                                 double target, std::size_t reps, RandomSource& rs);

} // namespace truncscore

#endif
