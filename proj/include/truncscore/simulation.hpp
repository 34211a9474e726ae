#ifndef TRUNCSCORE_SIMULATION_HPP
#define TRUNCSCORE_SIMULATION_HPP

#include <atomic>
#include <cstdint>
#include <string>

#include "truncscore/data.hpp"
#include "truncscore/random.hpp"

namespace truncscore {

// Generating model for one benchmark scenario: randomized treatment,
// binary/continuous baseline covariates, a latent landmark score, Weibull
// times for censoring (cause 0) and two terminal causes, and a visit
// indicator governing score availability for subjects censored before the
// landmark.  Indices: [arm][coefficient] with coefficients (intercept,
// x1 centered, x2); causes are 0 = censoring, 1, 2 = terminal.
struct ScenarioParams {
    double pi_a = 0.5;                  // P(A = 1)
    double p_x2 = 0.156;                // P(X2 = 1)
    double mu_x1[2] = {46.24, 51.15};   // mean of X1 by X2 level
    double sd_x1[2] = {14.99, 15.33};
    double beta_y[2][3] = {{40.141, 0.895, 1.993}, {43.121, 0.863, 2.620}};
    double sd_y[2] = {11.85, 12.16};
    double beta_r[2][3] = {{2.243, 0.0, 0.0}, {2.309, 0.0, 0.0}};
    double beta_t[3][2][3];             // [cause][arm][coef]; intercept is log rate
    double shape_t[3][2];               // [cause][arm]
    double tau = 2.0;
    bool null_effect = false;           // arm 1 generated from arm-0 parameters
};

// Registry of built-in scenarios: "table1" (benchmark), "table5" (stronger
// x1 effect on the first terminal cause), "table1-null" (global null).
// Throws std::invalid_argument for unknown names.
ScenarioParams builtin_scenario(const std::string& name);

// JSON serialization; field names follow the generator's parameter list.
ScenarioParams scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioParams& sp);

// Marginal mean of X1 implied by (p_x2, mu_x1), used to center designs.
double x1_marginal_mean(const ScenarioParams& sp);

// Draws n subjects.  The score is missing when the subject failed before tau,
// or was censored before tau and skipped the landmark visit.  Deterministic
// given (sp, n, rng state).
Dataset simulate_dataset(const ScenarioParams& sp, std::size_t n, RandomSource& rng);

// Monte Carlo evaluation of the true estimands from latent draws with no
// censoring or missingness.
struct TruthEstimate {
    double theta_y[2];   // E[Y | T* > tau, A=a]
    double theta_t[2];   // P(T* <= tau | A=a)
    double psi_y;        // theta_y[1] - theta_y[0]
    double psi_t;        // theta_t[0] - theta_t[1]
    double se_psi_y;     // Monte Carlo standard errors
    double se_psi_t;
};
TruthEstimate truth_oracle(const ScenarioParams& sp, std::size_t reps, RandomSource& rng);

// One simulation campaign: repeated draws, both estimators, both testing
// procedures, aggregated exactly as in the benchmark tables.
struct ReplicationConfig {
    ScenarioParams scenario;
    std::size_t n = 1000;
    std::size_t reps = 2000;
    double alpha = 0.025;
    double delta_y = 0.0;    // margin for the score hypothesis
    double delta_t = 0.05;   // margin for the risk hypothesis
    double truth_psi_y = 0.0;
    double truth_psi_t = 0.0;
    int threads = 1;
};

struct ReplicationResult {
    struct Row {
        double mean = 0, bias = 0, mean_se = 0, sd = 0, se_over_sd = 0;
        double coverage = 0, rel_eff = 0, rel_eff_var = 0;
    };
    // [method: 0 naive, 1 adjusted][parameter: 0 psi_y, 1 psi_t]
    Row rows[2][2];
    struct Tests {
        double p_int = 0, p_y = 0, p_t = 0;             // marginal rejection rates
        double closed_y = 0, closed_t = 0, closed_both = 0;
        double holm_y = 0, holm_t = 0, holm_both = 0;
    };
    Tests tests[2];
    std::size_t reps_requested = 0;
    std::size_t reps_done = 0;      // attempted before a stop request
    std::size_t reps_failed = 0;
    double truth_psi_y = 0.0, truth_psi_t = 0.0;
};

// Runs the campaign with per-replication child streams of seed, so results
// do not depend on the number of worker threads.  Replications where a fit
// fails are dropped; more than 1% of failures is an error (NonConvergence).
// A non-null stop flag lets the caller end the campaign early (e.g. on
// SIGINT); the aggregates then cover the replications already attempted.
ReplicationResult replicate_study(const ReplicationConfig& config, std::uint64_t seed,
                                  const std::atomic<bool>* stop = nullptr);

// CSV renderings of the aggregate tables.
std::string summary_csv(const ReplicationResult& res);
std::string power_csv(const ReplicationResult& res);
std::string type1_csv(const ReplicationResult& res);

} // namespace truncscore

#endif
