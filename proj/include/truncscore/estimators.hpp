#ifndef TRUNCSCORE_ESTIMATORS_HPP
#define TRUNCSCORE_ESTIMATORS_HPP

#include <vector>

#include "truncscore/data.hpp"
#include "truncscore/nuisance.hpp"

namespace truncscore {

enum class Method { naive, adjusted };

struct ParameterEstimate {
    double estimate = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0; // two-sided Wald against 0
};

// Joint estimate of the landmark-score and landmark-risk contrasts.
// theta_y[a] is E[Y | T* > tau, A=a]; theta_t[a] is P(T* <= tau | A=a);
// surv_t[a] = 1 - theta_t[a] is the reported survival row.  The contrasts
// are psi_y = theta_y[1] - theta_y[0] and psi_t = theta_t[0] - theta_t[1]
// (equal to the survival difference).  sigma is the 2x2 covariance of
// sqrt(n) (psi_y, psi_t), estimated from the centered influence columns.
struct EstimationResult {
    Method method = Method::adjusted;
    double tau = 2.0;
    std::size_t n = 0;
    double pi1 = 0.0;     // estimated P(A=1)
    double rho[2] = {0.0, 0.0}; // effective score availability per arm
    ParameterEstimate theta_y[2], theta_t[2], surv_t[2];
    ParameterEstimate psi_y, psi_t;
    Matrix sigma;
    std::vector<double> if_psi_y, if_psi_t; // centered per-subject contributions
};

// Initial estimate, one-step estimate and the centered influence
// contributions the variance is built from.
struct OneStep {
    double initial = 0.0;
    double estimate = 0.0;
    std::vector<double> influence;
};

// Sample mean of the score among subjects of one arm with an effective score
// (r = 1 and time > tau).
double naive_theta_y(const Dataset& d, double tau, int arm);

// Score-side nuisance models of one arm: outcome regression Q on the
// effective-score subset and availability model Pi on all arm records, both
// with design (1, x1 - x1_center, x2).
struct ScoreNuisance {
    LinearFit q;
    LogisticFit pi_r;
    double rho = 0.0;       // mean effective availability in the arm
    double x1_center = 0.0;
};
ScoreNuisance fit_score_nuisance(const Dataset& d, double tau, int arm, double x1_center);

// Efficient influence function of theta_y evaluated at theta, uncentered:
//   phi_i = R_i 1(A_i=a) / (pi_a rho_a) (y_i - theta)
//         - (A_i - pi1)(a - pi1) / (rho_a pi1 (1-pi1)) (Q(x_i) - theta) Pi(x_i)
std::vector<double> eif_theta_y(const Dataset& d, double tau, int arm,
                                const ScoreNuisance& nu, double pi1, double theta);

// One-step update of the naive mean, with the influence contributions
// augmented by the treatment-probability estimation term and centered.
OneStep onestep_theta_y(const Dataset& d, double tau, int arm, const ScoreNuisance& nu,
                        double pi1);

// Event-time nuisance models: stratified proportional hazards for the
// terminal event plus per-arm censoring and event Kaplan-Meier curves.
struct SurvivalNuisance {
    CoxFit cox;
    CensoringKm cens[2];
    EventKm km[2];
};
SurvivalNuisance fit_survival_nuisance(const Dataset& d, double x1_center);

// Influence function of theta_t = P(T* <= tau | A=a) ignoring censoring
// (valid when follow-up is complete), uncentered:
//   phi*_i = 1(A_i=a)/pi_a (1(T_i <= tau, event) - F(tau|a,x_i)) + F(tau|a,x_i) - theta
std::vector<double> fulldata_eif_theta_t(const Dataset& d, double tau, int arm,
                                         const CoxFit& cox, double pi1, double theta);

// Censoring-robust influence function: the full-data term is inverse
// weighted by the censoring survival at (tau ^ T)-, and augmented by the
// censoring-martingale integral of the conditional full-data influence.
std::vector<double> eif_theta_t(const Dataset& d, double tau, int arm,
                                const SurvivalNuisance& nu, double pi1, double theta);

// One-step update of the Kaplan-Meier risk 1 - S_a(tau); the reported
// influence contributions are re-evaluated at the one-step estimate and
// centered.
OneStep onestep_theta_t(const Dataset& d, double tau, int arm, const SurvivalNuisance& nu,
                        double pi1);

EstimationResult estimate_truncatedscore(const Dataset& d, const LandmarkSpec& landmark,
                                         Method method);

// Both methods from one pass over the shared nuisance fits.
struct EstimatePair {
    EstimationResult naive;
    EstimationResult adjusted;
};
EstimatePair estimate_truncatedscore_both(const Dataset& d, const LandmarkSpec& landmark);

} // namespace truncscore

#endif
