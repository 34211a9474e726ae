#ifndef TRUNCSCORE_NUISANCE_HPP
#define TRUNCSCORE_NUISANCE_HPP

#include <vector>

#include "truncscore/data.hpp"
#include "truncscore/numerics.hpp"
#include "truncscore/step_function.hpp"

namespace truncscore {

// Ordinary least squares on an explicit design matrix.
struct LinearFit {
    std::vector<double> beta;
    double sigma2 = 0.0;   // residual variance, RSS / (n - p)
    Matrix xtx_inv;        // (X'X)^{-1}, for standard errors
    double predict(const std::vector<double>& x) const;
};
// Throws InsufficientData when rows < cols, RankDeficient when X'X is singular.
LinearFit fit_ols(const Matrix& X, const std::vector<double>& y);

// Logistic regression by iteratively reweighted least squares.
struct LogisticFit {
    std::vector<double> beta;
    int iterations = 0;
    bool converged = false; // score sup-norm reached 1e-8
    double predict(const std::vector<double>& x) const; // P(outcome = 1 | x)
};
// Newton/IRLS with step-halving on the deviance.  When the score cannot be
// driven to 1e-8 within 100 iterations (e.g. a covariate level with all-one
// outcomes pins fitted probabilities at the boundary), the last iterate is
// returned with converged = false.  Throws Separation when coefficients run
// away (sup-norm > 30) or the outcome is constant or perfectly classified,
// RankDeficient for a collinear design, InsufficientData when rows < cols.
LogisticFit fit_logistic(const Matrix& X, const std::vector<int>& y);

// Proportional hazards fit for the terminal event (status > 0), with the
// baseline hazard stratified by arm and shared coefficients on
// (x1 - x1_center, x2).  Ties are handled by the Breslow approximation; a
// subject with time equal to an event time is still at risk for it.
struct CoxFit {
    std::vector<double> beta;      // coefficients (x1 centered, x2)
    double x1_center = 0.0;
    StepFunction baseline[2];      // per-arm cumulative baseline hazard
    int iterations = 0;
    double loglik = 0.0;

    double linear_predictor(double x1, double x2) const;
    double cum_hazard(double t, int arm, double x1, double x2) const;
    double survival(double t, int arm, double x1, double x2) const;     // S(t | arm, x)
    double cif(double t, int arm, double x1, double x2) const;          // F = 1 - S
};
// Throws NoEvents when the data contain no terminal events,
// SingularInformation when the information matrix is singular,
// NonConvergence when Newton fails in 100 iterations.
CoxFit fit_cox_stratified(const Dataset& d, double x1_center);

// Kaplan-Meier estimate of the censoring survival G_c within one arm, with
// the Nelson-Aalen censoring-hazard increments used by martingale integrals.
// At tied times terminal events precede censorings, so the at-risk set for a
// censoring at time s excludes subjects with an event at s.
struct CensoringKm {
    StepFunction surv;                // G_c(t), starts at 1
    std::vector<double> jump_times;   // censoring times with at least one jump
    std::vector<double> increments;   // dLambda_c at each jump
};
CensoringKm fit_km_censoring(const Dataset& d, int arm);

// Kaplan-Meier estimate of terminal-event-free survival within one arm,
// with the ingredients of the Greenwood variance.
struct EventKm {
    StepFunction surv;                // S(t), starts at 1
    std::vector<double> jump_times;   // event times
    std::vector<double> events;       // d(s)
    std::vector<double> atrisk;       // Y(s)
    double greenwood_var(double t) const; // Var of S(t)
};
// Throws NoEvents when the arm has no terminal events.
EventKm fit_km_event(const Dataset& d, int arm);

} // namespace truncscore

#endif
