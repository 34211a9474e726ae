#include "truncscore/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "truncscore/numerics.hpp"

namespace truncscore {

namespace {

const double kZ975 = norm_quantile(0.975);
const double kMinG = 1e-6; // positivity floor for censoring survival

bool effective(const SubjectRecord& rec, double tau) {
    return rec.r == 1 && rec.time > tau;
}

void center(std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

double column_sd(const std::vector<double>& v) {
    // v is centered; population scaling to match the influence covariance
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

ParameterEstimate make_param(double est, double se) {
    ParameterEstimate p;
    p.estimate = est;
    p.se = se;
    p.ci_low = est - kZ975 * se;
    p.ci_high = est + kZ975 * se;
    p.p_value = se > 0.0 ? 2.0 * (1.0 - norm_cdf(std::fabs(est) / se)) : (est == 0.0 ? 1.0 : 0.0);
    return p;
}

} // namespace

double naive_theta_y(const Dataset& d, double tau, int arm) {
    double s = 0.0, m = 0.0;
    for (const SubjectRecord& rec : d.records)
        if (rec.a == arm && effective(rec, tau)) {
            s += *rec.y;
            m += 1.0;
        }
    if (m == 0.0)
        throw PositivityViolation("naive_theta_y: no effective scores in arm " +
                                  std::to_string(arm));
    return s / m;
}

ScoreNuisance fit_score_nuisance(const Dataset& d, double tau, int arm, double x1_center) {
    std::size_t n_arm = 0, n_eff = 0;
    for (const SubjectRecord& rec : d.records)
        if (rec.a == arm) {
            ++n_arm;
            if (effective(rec, tau)) ++n_eff;
        }
    if (n_arm == 0) throw EmptyArm("fit_score_nuisance: arm " + std::to_string(arm));

    Matrix Xq(n_eff, 3), Xr(n_arm, 3);
    std::vector<double> yq(n_eff);
    std::vector<int> yr(n_arm);
    std::size_t iq = 0, ir = 0;
    for (const SubjectRecord& rec : d.records) {
        if (rec.a != arm) continue;
        const bool eff = effective(rec, tau);
        Xr(ir, 0) = 1.0;
        Xr(ir, 1) = rec.x1 - x1_center;
        Xr(ir, 2) = rec.x2;
        yr[ir] = eff ? 1 : 0;
        ++ir;
        if (eff) {
            Xq(iq, 0) = 1.0;
            Xq(iq, 1) = rec.x1 - x1_center;
            Xq(iq, 2) = rec.x2;
            yq[iq] = *rec.y;
            ++iq;
        }
    }
    ScoreNuisance nu;
    nu.q = fit_ols(Xq, yq);
    nu.pi_r = fit_logistic(Xr, yr);
    nu.rho = static_cast<double>(n_eff) / static_cast<double>(n_arm);
    nu.x1_center = x1_center;
    return nu;
}

std::vector<double> eif_theta_y(const Dataset& d, double tau, int arm,
                                const ScoreNuisance& nu, double pi1, double theta) {
    const double pia = arm == 1 ? pi1 : 1.0 - pi1;
    const double w_obs = 1.0 / (pia * nu.rho);
    const double c_aug = (arm - pi1) / (nu.rho * pi1 * (1.0 - pi1));
    std::vector<double> phi(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        const SubjectRecord& rec = d.records[i];
        const std::vector<double> x = {1.0, rec.x1 - nu.x1_center, rec.x2};
        double v = 0.0;
        if (rec.a == arm && effective(rec, tau)) v = w_obs * (*rec.y - theta);
        v -= (rec.a - pi1) * c_aug * (nu.q.predict(x) - theta) * nu.pi_r.predict(x);
        phi[i] = v;
    }
    return phi;
}

OneStep onestep_theta_y(const Dataset& d, double tau, int arm, const ScoreNuisance& nu,
                        double pi1) {
    OneStep os;
    os.initial = naive_theta_y(d, tau, arm);
    os.influence = eif_theta_y(d, tau, arm, nu, pi1, os.initial);
    double mean_phi = 0.0;
    for (double v : os.influence) mean_phi += v;
    mean_phi /= static_cast<double>(d.n());
    os.estimate = os.initial + mean_phi;
    // account for the estimated treatment probability: the augmentation
    // average times the influence of pi1
    double k = 0.0;
    for (const SubjectRecord& rec : d.records) {
        const std::vector<double> x = {1.0, rec.x1 - nu.x1_center, rec.x2};
        k += (nu.q.predict(x) - os.initial) * nu.pi_r.predict(x);
    }
    k /= static_cast<double>(d.n());
    const double c = (pi1 - arm) / (nu.rho * (1.0 - pi1) * pi1) * k;
    for (std::size_t i = 0; i < d.n(); ++i)
        os.influence[i] += c * (pi1 - d.records[i].a);
    center(os.influence);
    return os;
}

SurvivalNuisance fit_survival_nuisance(const Dataset& d, double x1_center) {
    SurvivalNuisance nu;
    nu.cox = fit_cox_stratified(d, x1_center);
    for (int a = 0; a < 2; ++a) {
        nu.cens[a] = fit_km_censoring(d, a);
        nu.km[a] = fit_km_event(d, a);
    }
    return nu;
}

std::vector<double> fulldata_eif_theta_t(const Dataset& d, double tau, int arm,
                                         const CoxFit& cox, double pi1, double theta) {
    const double pia = arm == 1 ? pi1 : 1.0 - pi1;
    std::vector<double> phi(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        const SubjectRecord& rec = d.records[i];
        const double f_tau = cox.cif(tau, arm, rec.x1, rec.x2);
        double v = f_tau - theta;
        if (rec.a == arm) {
            const double ev = (rec.time <= tau && rec.status > 0) ? 1.0 : 0.0;
            v += (ev - f_tau) / pia;
        }
        phi[i] = v;
    }
    return phi;
}

namespace {

// Censoring jumps of one arm at or before tau, with left limits of G_c and
// the target-arm baseline evaluated at the jump times.
struct CensJumps {
    std::vector<double> time, dlam, g_left, lam0; // lam0: target-arm baseline at jump
};

CensJumps collect_cens_jumps(const CensoringKm& cens, const StepFunction& baseline,
                             double tau) {
    CensJumps cj;
    for (std::size_t k = 0; k < cens.jump_times.size(); ++k) {
        const double s = cens.jump_times[k];
        if (s > tau) break;
        cj.time.push_back(s);
        cj.dlam.push_back(cens.increments[k]);
        cj.g_left.push_back(cens.surv.left_limit(s));
        cj.lam0.push_back(baseline.value_at(s));
    }
    return cj;
}

} // namespace

std::vector<double> eif_theta_t(const Dataset& d, double tau, int arm,
                                const SurvivalNuisance& nu, double pi1, double theta) {
    const double pia = arm == 1 ? pi1 : 1.0 - pi1;
    const double lam_tau = nu.cox.baseline[arm].value_at(tau);
    CensJumps jumps[2];
    for (int c = 0; c < 2; ++c)
        jumps[c] = collect_cens_jumps(nu.cens[c], nu.cox.baseline[arm], tau);

    std::vector<double> phi(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        const SubjectRecord& rec = d.records[i];
        const double elp = std::exp(nu.cox.linear_predictor(rec.x1, rec.x2));
        const double f_tau = 1.0 - std::exp(-lam_tau * elp);
        const bool own = rec.a == arm;

        // conditional full-data influence among subjects still at risk at u,
        // divided by the censoring survival just before u
        auto h = [&](double lam0_u, double g_left) {
            if (g_left < kMinG)
                throw CensoringPositivityViolation(
                    "eif_theta_t: censoring survival below 1e-6 before landmark");
            double e = f_tau - theta;
            if (own) {
                const double s_u = std::exp(-lam0_u * elp);
                e += ((f_tau - (1.0 - s_u)) / s_u - f_tau) / pia;
            }
            return e / g_left;
        };

        double v = 0.0;
        const bool event_by_tau = rec.time <= tau && rec.status > 0;
        const bool at_risk_tau = rec.time > tau;
        if (event_by_tau || at_risk_tau) {
            const double tu = std::min(rec.time, tau);
            const double g = nu.cens[rec.a].surv.left_limit(tu);
            if (g < kMinG)
                throw CensoringPositivityViolation(
                    "eif_theta_t: censoring survival below 1e-6 before landmark");
            double fd = f_tau - theta;
            if (own) fd += ((event_by_tau ? 1.0 : 0.0) - f_tau) / pia;
            v = fd / g;
        }

        // censoring-martingale augmentation over the subject's own arm
        const CensJumps& cj = jumps[rec.a];
        if (rec.status == 0 && rec.time <= tau)
            v += h(nu.cox.baseline[arm].value_at(rec.time),
                   nu.cens[rec.a].surv.left_limit(rec.time));
        for (std::size_t k = 0; k < cj.time.size(); ++k) {
            const double s = cj.time[k];
            if (s > rec.time || (s == rec.time && rec.status != 0)) break;
            v -= h(cj.lam0[k], cj.g_left[k]) * cj.dlam[k];
        }
        phi[i] = v;
    }
    return phi;
}

OneStep onestep_theta_t(const Dataset& d, double tau, int arm, const SurvivalNuisance& nu,
                        double pi1) {
    OneStep os;
    os.initial = 1.0 - nu.km[arm].surv.value_at(tau);
    std::vector<double> phi = eif_theta_t(d, tau, arm, nu, pi1, os.initial);
    double mean_phi = 0.0;
    for (double v : phi) mean_phi += v;
    mean_phi /= static_cast<double>(d.n());
    os.estimate = os.initial + mean_phi;
    os.influence = eif_theta_t(d, tau, arm, nu, pi1, os.estimate);
    center(os.influence);
    return os;
}

namespace {

// Kaplan-Meier influence contributions for the naive risk estimate of one
// arm, on the all-subject scale: the counting part at the subject's own
// event minus the hazard compensator, times S(tau), scaled by n / n_arm.
std::vector<double> naive_km_influence(const Dataset& d, double tau, int arm,
                                       const EventKm& km) {
    const double s_tau = km.surv.value_at(tau);
    // prefix sums of d(s) / Y(s)^2 over jumps
    std::vector<double> comp(km.jump_times.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < km.jump_times.size(); ++k) {
        if (km.jump_times[k] <= tau) acc += km.events[k] / (km.atrisk[k] * km.atrisk[k]);
        comp[k] = acc;
    }
    const double n = static_cast<double>(d.n());
    std::vector<double> xi(d.n(), 0.0);
    for (std::size_t i = 0; i < d.n(); ++i) {
        const SubjectRecord& rec = d.records[i];
        if (rec.a != arm) continue;
        double v = 0.0;
        if (rec.status > 0 && rec.time <= tau) {
            const auto it = std::lower_bound(km.jump_times.begin(), km.jump_times.end(),
                                             rec.time);
            v += 1.0 / km.atrisk[static_cast<std::size_t>(it - km.jump_times.begin())];
        }
        const double cut = std::min(rec.time, tau);
        const auto it = std::upper_bound(km.jump_times.begin(), km.jump_times.end(), cut);
        if (it != km.jump_times.begin())
            v -= comp[static_cast<std::size_t>(it - km.jump_times.begin()) - 1];
        xi[i] = n * s_tau * v;
    }
    return xi;
}

Matrix sigma_from_columns(const std::vector<double>& c1, const std::vector<double>& c2) {
    Matrix s(2, 2);
    const double n = static_cast<double>(c1.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        s(0, 0) += c1[i] * c1[i];
        s(0, 1) += c1[i] * c2[i];
        s(1, 1) += c2[i] * c2[i];
    }
    s(0, 0) /= n;
    s(0, 1) /= n;
    s(1, 1) /= n;
    s(1, 0) = s(0, 1);
    return s;
}

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

} // namespace

EstimatePair estimate_truncatedscore_both(const Dataset& d, const LandmarkSpec& landmark) {
    const double tau = landmark.tau;
    validate_for_estimation(d, landmark);
    const double n = static_cast<double>(d.n());
    const double sqrt_n = std::sqrt(n);

    double x1_center = 0.0, pi1 = 0.0;
    for (const SubjectRecord& rec : d.records) {
        x1_center += rec.x1;
        pi1 += rec.a;
    }
    x1_center /= n;
    pi1 /= n;

    EstimatePair out;
    out.naive.method = Method::naive;
    out.adjusted.method = Method::adjusted;
    for (EstimationResult* res : {&out.naive, &out.adjusted}) {
        res->tau = tau;
        res->n = d.n();
        res->pi1 = pi1;
    }

    // ---- naive score side ----
    std::vector<double> naive_if_y[2];
    double theta_y_tilde[2];
    for (int a = 0; a < 2; ++a) {
        theta_y_tilde[a] = naive_theta_y(d, tau, a);
        std::size_t m = 0;
        for (const SubjectRecord& rec : d.records)
            if (rec.a == a && effective(rec, tau)) ++m;
        naive_if_y[a].assign(d.n(), 0.0);
        const double w = n / static_cast<double>(m);
        for (std::size_t i = 0; i < d.n(); ++i) {
            const SubjectRecord& rec = d.records[i];
            if (rec.a == a && effective(rec, tau))
                naive_if_y[a][i] = w * (*rec.y - theta_y_tilde[a]);
        }
        center(naive_if_y[a]);
    }

    // ---- naive event side ----
    EventKm km[2] = {fit_km_event(d, 0), fit_km_event(d, 1)};
    double theta_t_tilde[2], greenwood_se[2];
    std::vector<double> naive_if_t[2];
    for (int a = 0; a < 2; ++a) {
        theta_t_tilde[a] = 1.0 - km[a].surv.value_at(tau);
        greenwood_se[a] = std::sqrt(km[a].greenwood_var(tau));
        naive_if_t[a] = naive_km_influence(d, tau, a, km[a]);
        center(naive_if_t[a]);
    }

    {
        EstimationResult& res = out.naive;
        for (int a = 0; a < 2; ++a) {
            std::size_t m = 0, n_arm = 0;
            for (const SubjectRecord& rec : d.records)
                if (rec.a == a) {
                    ++n_arm;
                    if (effective(rec, tau)) ++m;
                }
            res.rho[a] = static_cast<double>(m) / static_cast<double>(n_arm);
            res.theta_y[a] = make_param(theta_y_tilde[a], column_sd(naive_if_y[a]) / sqrt_n);
            res.theta_t[a] = make_param(theta_t_tilde[a], greenwood_se[a]);
            res.surv_t[a] = make_param(1.0 - theta_t_tilde[a], greenwood_se[a]);
        }
        res.if_psi_y = difference(naive_if_y[1], naive_if_y[0]);
        res.if_psi_t = difference(naive_if_t[0], naive_if_t[1]);
        center(res.if_psi_y);
        center(res.if_psi_t);
        res.sigma = sigma_from_columns(res.if_psi_y, res.if_psi_t);
        res.psi_y = make_param(theta_y_tilde[1] - theta_y_tilde[0],
                               column_sd(res.if_psi_y) / sqrt_n);
        const double se_psi_t = std::sqrt(greenwood_se[0] * greenwood_se[0] +
                                          greenwood_se[1] * greenwood_se[1]);
        res.psi_t = make_param(theta_t_tilde[0] - theta_t_tilde[1], se_psi_t);
    }

    // ---- adjusted ----
    {
        EstimationResult& res = out.adjusted;
        SurvivalNuisance surv;
        surv.cox = fit_cox_stratified(d, x1_center);
        for (int a = 0; a < 2; ++a) {
            surv.cens[a] = fit_km_censoring(d, a);
            surv.km[a] = km[a];
        }
        OneStep os_y[2], os_t[2];
        for (int a = 0; a < 2; ++a) {
            const ScoreNuisance nu = fit_score_nuisance(d, tau, a, x1_center);
            res.rho[a] = nu.rho;
            os_y[a] = onestep_theta_y(d, tau, a, nu, pi1);
            os_t[a] = onestep_theta_t(d, tau, a, surv, pi1);
            res.theta_y[a] = make_param(os_y[a].estimate, column_sd(os_y[a].influence) / sqrt_n);
            const double se_t = column_sd(os_t[a].influence) / sqrt_n;
            res.theta_t[a] = make_param(os_t[a].estimate, se_t);
            res.surv_t[a] = make_param(1.0 - os_t[a].estimate, se_t);
        }
        res.if_psi_y = difference(os_y[1].influence, os_y[0].influence);
        res.if_psi_t = difference(os_t[0].influence, os_t[1].influence);
        center(res.if_psi_y);
        center(res.if_psi_t);
        res.sigma = sigma_from_columns(res.if_psi_y, res.if_psi_t);
        res.psi_y = make_param(os_y[1].estimate - os_y[0].estimate,
                               column_sd(res.if_psi_y) / sqrt_n);
        res.psi_t = make_param(os_t[0].estimate - os_t[1].estimate,
                               column_sd(res.if_psi_t) / sqrt_n);
    }
    return out;
}

EstimationResult estimate_truncatedscore(const Dataset& d, const LandmarkSpec& landmark,
                                         Method method) {
    EstimatePair pair = estimate_truncatedscore_both(d, landmark);
    return method == Method::naive ? pair.naive : pair.adjusted;
}

} // namespace truncscore
