#include "truncscore/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace truncscore {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

} // namespace

double LinearFit::predict(const std::vector<double>& x) const { return dot(beta, x); }

LinearFit fit_ols(const Matrix& X, const std::vector<double>& y) {
    const std::size_t n = X.rows, p = X.cols;
    if (y.size() != n) throw std::invalid_argument("fit_ols: length mismatch");
    if (n < p) throw InsufficientData("fit_ols: " + std::to_string(n) + " rows for " +
                                      std::to_string(p) + " coefficients");
    Matrix xtx(p, p);
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const double xij = X(i, j);
            xty[j] += xij * y[i];
            for (std::size_t k = j; k < p; ++k) xtx(j, k) += xij * X(i, k);
        }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < j; ++k) xtx(j, k) = xtx(k, j);

    LinearFit fit;
    try {
        fit.beta = solve_spd(xtx, xty);
        fit.xtx_inv = inverse_spd(xtx);
    } catch (const NotPositiveDefinite& e) {
        throw RankDeficient(std::string("fit_ols: design is rank deficient (") + e.what() + ")");
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fitv = 0.0;
        for (std::size_t j = 0; j < p; ++j) fitv += X(i, j) * fit.beta[j];
        const double res = y[i] - fitv;
        rss += res * res;
    }
    fit.sigma2 = (n > p) ? rss / static_cast<double>(n - p) : 0.0;
    return fit;
}

double LogisticFit::predict(const std::vector<double>& x) const { return expit(dot(beta, x)); }

LogisticFit fit_logistic(const Matrix& X, const std::vector<int>& y) {
    const std::size_t n = X.rows, p = X.cols;
    if (y.size() != n) throw std::invalid_argument("fit_logistic: length mismatch");
    if (n < p) throw InsufficientData("fit_logistic: " + std::to_string(n) + " rows for " +
                                      std::to_string(p) + " coefficients");
    const int ones = std::accumulate(y.begin(), y.end(), 0);
    if (ones == 0 || static_cast<std::size_t>(ones) == n)
        throw Separation("fit_logistic: outcome is constant");

    std::vector<double> beta(p, 0.0);
    auto deviance = [&](const std::vector<double>& b) {
        double dev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double lp = 0.0;
            for (std::size_t j = 0; j < p; ++j) lp += X(i, j) * b[j];
            // log(1 + exp(lp)) computed stably
            const double lse = lp > 0 ? lp + std::log1p(std::exp(-lp)) : std::log1p(std::exp(lp));
            dev += 2.0 * (lse - y[i] * lp);
        }
        return dev;
    };

    double dev = deviance(beta);
    for (int it = 1; it <= 100; ++it) {
        Matrix info(p, p);
        std::vector<double> score(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double lp = 0.0;
            for (std::size_t j = 0; j < p; ++j) lp += X(i, j) * beta[j];
            const double mu = expit(lp);
            const double w = std::max(mu * (1.0 - mu), 1e-10);
            const double res = y[i] - mu;
            for (std::size_t j = 0; j < p; ++j) {
                score[j] += X(i, j) * res;
                for (std::size_t k = j; k < p; ++k) info(j, k) += w * X(i, j) * X(i, k);
            }
        }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < j; ++k) info(j, k) = info(k, j);

        double smax = 0.0;
        for (double s : score) smax = std::max(smax, std::fabs(s));
        LogisticFit fit;
        fit.beta = beta;
        fit.iterations = it - 1;
        if (smax <= 1e-8) {
            // a vanishing score with (near) zero deviance means perfect
            // classification: the true maximiser is at infinity
            if (dev < 1e-6) throw Separation("fit_logistic: data perfectly separated");
            fit.converged = true;
            return fit;
        }

        std::vector<double> delta;
        try {
            delta = solve_spd(info, score);
        } catch (const NotPositiveDefinite&) {
            // at the first iteration the weights are constant, so a singular
            // information means a collinear design; later it means fitted
            // probabilities pinned at 0/1, where the iterate is the best
            // attainable fit
            if (it == 1) throw RankDeficient("fit_logistic: design is rank deficient");
            return fit;
        }
        double step = 1.0;
        std::vector<double> cand(p);
        bool improved = false;
        // tolerance scaled by the deviance: plain summation noise grows with n
        const double tol = 1e-9 * (1.0 + std::fabs(dev));
        for (int h = 0; h <= 10; ++h) {
            for (std::size_t j = 0; j < p; ++j) cand[j] = beta[j] + step * delta[j];
            const double dc = deviance(cand);
            if (dc <= dev + tol) {
                beta = cand;
                dev = dc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) return fit; // deviance plateau, report the last iterate
        double bmax = 0.0;
        for (double b : beta) bmax = std::max(bmax, std::fabs(b));
        if (bmax > 30.0) throw Separation("fit_logistic: coefficients diverging");
    }
    LogisticFit fit;
    fit.beta = beta;
    fit.iterations = 100;
    return fit;
}

double CoxFit::linear_predictor(double x1, double x2) const {
    return beta[0] * (x1 - x1_center) + beta[1] * x2;
}

double CoxFit::cum_hazard(double t, int arm, double x1, double x2) const {
    return baseline[arm].value_at(t) * std::exp(linear_predictor(x1, x2));
}

double CoxFit::survival(double t, int arm, double x1, double x2) const {
    return std::exp(-cum_hazard(t, arm, x1, x2));
}

double CoxFit::cif(double t, int arm, double x1, double x2) const {
    return 1.0 - survival(t, arm, x1, x2);
}

namespace {

// Per-stratum sorted view: indices ordered by descending time so risk sets
// accumulate in one pass.
struct Stratum {
    std::vector<std::size_t> order;
};

struct CoxDerivs {
    double loglik = 0.0;
    std::vector<double> score;
    Matrix info;
};

CoxDerivs cox_derivs(const Dataset& d, const Stratum strata[2], double x1_center,
                     const std::vector<double>& beta) {
    CoxDerivs out;
    out.score.assign(2, 0.0);
    out.info = Matrix(2, 2);
    for (int a = 0; a < 2; ++a) {
        const auto& ord = strata[a].order;
        double s0 = 0.0, s1[2] = {0.0, 0.0}, s2[3] = {0.0, 0.0, 0.0}; // s2: xx,xy,yy
        std::size_t i = 0;
        while (i < ord.size()) {
            const double t = d.records[ord[i]].time;
            // add everyone tied at t to the risk set before scoring events at t
            std::size_t j = i;
            while (j < ord.size() && d.records[ord[j]].time == t) {
                const SubjectRecord& rec = d.records[ord[j]];
                const double x[2] = {rec.x1 - x1_center, rec.x2};
                const double w = std::exp(beta[0] * x[0] + beta[1] * x[1]);
                s0 += w;
                s1[0] += w * x[0];
                s1[1] += w * x[1];
                s2[0] += w * x[0] * x[0];
                s2[1] += w * x[0] * x[1];
                s2[2] += w * x[1] * x[1];
                ++j;
            }
            for (std::size_t k = i; k < j; ++k) {
                const SubjectRecord& rec = d.records[ord[k]];
                if (rec.status <= 0) continue;
                const double x[2] = {rec.x1 - x1_center, rec.x2};
                const double m0 = s1[0] / s0, m1 = s1[1] / s0;
                out.loglik += beta[0] * x[0] + beta[1] * x[1] - std::log(s0);
                out.score[0] += x[0] - m0;
                out.score[1] += x[1] - m1;
                out.info(0, 0) += s2[0] / s0 - m0 * m0;
                out.info(0, 1) += s2[1] / s0 - m0 * m1;
                out.info(1, 1) += s2[2] / s0 - m1 * m1;
            }
            i = j;
        }
    }
    out.info(1, 0) = out.info(0, 1);
    return out;
}

} // namespace

CoxFit fit_cox_stratified(const Dataset& d, double x1_center) {
    Stratum strata[2];
    std::size_t nevents = 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        strata[d.records[i].a].order.push_back(i);
        if (d.records[i].status > 0) ++nevents;
    }
    if (nevents == 0) throw NoEvents("fit_cox_stratified: no terminal events");
    for (int a = 0; a < 2; ++a)
        std::sort(strata[a].order.begin(), strata[a].order.end(),
                  [&](std::size_t i, std::size_t j) {
                      return d.records[i].time > d.records[j].time;
                  });

    CoxFit fit;
    fit.beta.assign(2, 0.0);
    fit.x1_center = x1_center;
    CoxDerivs cur = cox_derivs(d, strata, x1_center, fit.beta);
    bool converged = false;
    for (int it = 1; it <= 100 && !converged; ++it) {
        const double smax = std::max(std::fabs(cur.score[0]), std::fabs(cur.score[1]));
        if (smax <= 1e-8) {
            fit.iterations = it - 1;
            converged = true;
            break;
        }
        std::vector<double> delta;
        try {
            delta = solve_spd(cur.info, cur.score);
        } catch (const NotPositiveDefinite&) {
            throw SingularInformation("fit_cox_stratified: information matrix singular");
        }
        double step = 1.0;
        bool improved = false;
        const double tol = 1e-9 * (1.0 + std::fabs(cur.loglik));
        for (int h = 0; h <= 10; ++h) {
            std::vector<double> cand = {fit.beta[0] + step * delta[0],
                                        fit.beta[1] + step * delta[1]};
            CoxDerivs cd = cox_derivs(d, strata, x1_center, cand);
            if (cd.loglik >= cur.loglik - tol) {
                fit.beta = cand;
                cur = cd;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) throw NonConvergence("fit_cox_stratified: step halving failed");
        if (std::max(std::fabs(fit.beta[0]), std::fabs(fit.beta[1])) > 200.0)
            throw NonConvergence("fit_cox_stratified: coefficients diverging");
    }
    if (!converged) throw NonConvergence("fit_cox_stratified: no convergence in 100 iterations");
    fit.loglik = cur.loglik;

    // Breslow baseline per stratum, ascending event times:
    //   dLambda_0a(s) = d_a(s) / sum_{j at risk} exp(lp_j)
    for (int a = 0; a < 2; ++a) {
        const auto& ord = strata[a].order;
        std::vector<double> times, cumhaz;
        double s0 = 0.0;
        std::size_t i = 0;
        while (i < ord.size()) {
            const double t = d.records[ord[i]].time;
            std::size_t j = i;
            int dev = 0;
            while (j < ord.size() && d.records[ord[j]].time == t) {
                const SubjectRecord& rec = d.records[ord[j]];
                s0 += std::exp(fit.linear_predictor(rec.x1, rec.x2));
                if (rec.status > 0) ++dev;
                ++j;
            }
            if (dev > 0) {
                times.push_back(t);
                cumhaz.push_back(dev / s0);
            }
            i = j;
        }
        // scanned descending: reverse and accumulate
        std::reverse(times.begin(), times.end());
        std::reverse(cumhaz.begin(), cumhaz.end());
        double acc = 0.0;
        for (double& h : cumhaz) {
            acc += h;
            h = acc;
        }
        fit.baseline[a] = StepFunction(std::move(times), std::move(cumhaz), 0.0);
    }
    return fit;
}

namespace {

// Shared scan over the sorted times of one arm; calls back at each distinct
// time with (t, atrisk, events, censorings).
template <typename F>
void scan_arm_times(const Dataset& d, int arm, F&& visit) {
    std::vector<std::pair<double, int>> ts; // (time, status)
    for (const SubjectRecord& rec : d.records)
        if (rec.a == arm) ts.emplace_back(rec.time, rec.status);
    std::sort(ts.begin(), ts.end());
    const std::size_t n = ts.size();
    std::size_t i = 0;
    while (i < n) {
        const double t = ts[i].first;
        std::size_t j = i;
        int ev = 0, ce = 0;
        while (j < n && ts[j].first == t) {
            (ts[j].second > 0 ? ev : ce)++;
            ++j;
        }
        visit(t, static_cast<double>(n - i), static_cast<double>(ev), static_cast<double>(ce));
        i = j;
    }
}

} // namespace

CensoringKm fit_km_censoring(const Dataset& d, int arm) {
    CensoringKm out;
    std::vector<double> times, values;
    double g = 1.0;
    scan_arm_times(d, arm, [&](double t, double atrisk, double ev, double ce) {
        if (ce <= 0.0) return;
        // events precede censorings at tied times, so they are out of the
        // censoring risk set
        const double dl = ce / (atrisk - ev);
        g *= 1.0 - dl;
        times.push_back(t);
        values.push_back(g);
        out.jump_times.push_back(t);
        out.increments.push_back(dl);
    });
    out.surv = StepFunction(std::move(times), std::move(values), 1.0);
    return out;
}

double EventKm::greenwood_var(double t) const {
    const double s = surv.value_at(t);
    double acc = 0.0;
    for (std::size_t k = 0; k < jump_times.size() && jump_times[k] <= t; ++k)
        if (atrisk[k] > events[k])
            acc += events[k] / (atrisk[k] * (atrisk[k] - events[k]));
    return s * s * acc;
}

EventKm fit_km_event(const Dataset& d, int arm) {
    EventKm out;
    std::vector<double> times, values;
    double s = 1.0;
    scan_arm_times(d, arm, [&](double t, double atrisk, double ev, double) {
        if (ev <= 0.0) return;
        s *= 1.0 - ev / atrisk;
        times.push_back(t);
        values.push_back(s);
        out.jump_times.push_back(t);
        out.events.push_back(ev);
        out.atrisk.push_back(atrisk);
    });
    if (out.jump_times.empty())
        throw NoEvents("fit_km_event: arm " + std::to_string(arm) + " has no terminal events");
    out.surv = StepFunction(std::move(times), std::move(values), 1.0);
    return out;
}

} // namespace truncscore
