#include "truncscore/testing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace truncscore {

void validate(const TestConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 0.5))
        throw ValidationError("TestConfig: alpha must be in (0, 0.5)");
    if (cfg.delta_y < 0.0 || cfg.delta_t < 0.0)
        throw ValidationError("TestConfig: margins must be >= 0");
}

SignedWaldResult signed_wald_single(double psi_hat, double se, double margin, Side side) {
    if (!(se > 0.0)) throw DomainError("signed_wald_single: se must be positive");
    SignedWaldResult res;
    res.z = side == Side::y ? (psi_hat - margin) / se : (psi_hat + margin) / se;
    if (res.z >= 0.0) {
        res.statistic = res.z * res.z;
        res.p_value = res.z > 0.0 ? 1.0 - norm_cdf(res.z) : 1.0;
    }
    return res;
}

namespace {

double mixture_p(double sw, double q_hat) {
    if (sw <= 0.0) return 1.0;
    return 0.5 * chisq_sf(sw, 1) + q_hat * chisq_sf(sw, 2);
}

} // namespace

IntersectionResult signed_wald_intersection(const std::vector<double>& psi_hat,
                                            const Matrix& sigma_over_n,
                                            double delta_y, double delta_t) {
    if (psi_hat.size() != 2 || sigma_over_n.rows != 2 || sigma_over_n.cols != 2)
        throw ValidationError("signed_wald_intersection: expects 2 contrasts");
    const double v_y = sigma_over_n(0, 0), v_t = sigma_over_n(1, 1);
    if (!(v_y > 0.0) || !(v_t > 0.0))
        throw DomainError("signed_wald_intersection: variances must be positive");
    IntersectionResult res;
    res.rho_hat = sigma_over_n(0, 1) / std::sqrt(v_y * v_t);
    if (std::fabs(res.rho_hat) >= 1.0 - 1e-10)
        throw DegenerateCovariance("signed_wald_intersection: |rho| >= 1 - 1e-10");
    res.z_y = (psi_hat[0] - delta_y) / std::sqrt(v_y);
    res.z_t = (psi_hat[1] + delta_t) / std::sqrt(v_t);
    const double z_max = std::max(res.z_y, res.z_t);
    const double z_min = std::min(res.z_y, res.z_t);
    const double rho = res.rho_hat;
    if (z_max < 0.0)
        res.statistic = 0.0;
    else if (z_min <= rho * z_max)
        res.statistic = z_max * z_max;
    else
        res.statistic =
            (z_max * z_max + z_min * z_min - 2.0 * rho * z_min * z_max) / (1.0 - rho * rho);
    res.q_hat = 0.25 - std::asin(rho) / (2.0 * M_PI);
    res.p_value = mixture_p(res.statistic, res.q_hat);
    return res;
}

std::vector<double> dykstra_project(const std::vector<double>& point,
                                    const std::vector<std::vector<double>>& normals) {
    if (normals.empty()) throw ValidationError("dykstra_project: no half-spaces");
    const std::size_t d = point.size();
    std::vector<double> nrm2(normals.size());
    for (std::size_t j = 0; j < normals.size(); ++j) {
        if (normals[j].size() != d)
            throw ValidationError("dykstra_project: normal dimension mismatch");
        double s = 0.0;
        for (double v : normals[j]) s += v * v;
        if (s == 0.0) throw ValidationError("dykstra_project: zero normal");
        nrm2[j] = s;
    }
    std::vector<double> u = point;
    std::vector<std::vector<double>> corr(normals.size(), std::vector<double>(d, 0.0));
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double change = 0.0;
        for (std::size_t j = 0; j < normals.size(); ++j) {
            std::vector<double> w(d);
            for (std::size_t k = 0; k < d; ++k) w[k] = u[k] + corr[j][k];
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += normals[j][k] * w[k];
            const double step = dot > 0.0 ? dot / nrm2[j] : 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double next = w[k] - step * normals[j][k];
                corr[j][k] = w[k] - next;
                change = std::max(change, std::fabs(next - u[k]));
                u[k] = next;
            }
        }
        if (change <= 1e-12) return u;
    }
    throw NonConvergence("dykstra_project: no convergence in 1e5 sweeps");
}

ClosedTestReport closed_test(const EstimationResult& est, const TestConfig& cfg) {
    validate(cfg);
    ClosedTestReport rep;
    rep.single_y = signed_wald_single(est.psi_y.estimate, est.psi_y.se, cfg.delta_y, Side::y);
    rep.single_t = signed_wald_single(est.psi_t.estimate, est.psi_t.se, cfg.delta_t, Side::t);
    const double n = static_cast<double>(est.n);
    Matrix sigma_over_n(2, 2);
    for (std::size_t i = 0; i < 4; ++i) sigma_over_n.data[i] = est.sigma.data[i] / n;
    rep.intersection = signed_wald_intersection({est.psi_y.estimate, est.psi_t.estimate},
                                                sigma_over_n, cfg.delta_y, cfg.delta_t);
    const bool int_rej = rep.intersection.p_value <= cfg.alpha;
    rep.reject_y = int_rej && rep.single_y.p_value <= cfg.alpha;
    rep.reject_t = int_rej && rep.single_t.p_value <= cfg.alpha;

    const double p_lo = std::min(rep.single_y.p_value, rep.single_t.p_value);
    const double p_hi = std::max(rep.single_y.p_value, rep.single_t.p_value);
    const bool first = p_lo <= cfg.alpha / 2.0;
    const bool second = first && p_hi <= cfg.alpha;
    if (rep.single_y.p_value <= rep.single_t.p_value) {
        rep.comparator.reject_y = first;
        rep.comparator.reject_t = second;
    } else {
        rep.comparator.reject_t = first;
        rep.comparator.reject_y = second;
    }
    return rep;
}

double critical_value(double rho, double alpha) {
    if (std::fabs(rho) >= 1.0 - 1e-10)
        throw DegenerateCovariance("critical_value: |rho| >= 1 - 1e-10");
    if (!(alpha > 0.0 && alpha < 0.5))
        throw ValidationError("critical_value: alpha must be in (0, 0.5)");
    const double q = 0.25 - std::asin(rho) / (2.0 * M_PI);
    return bisect_decreasing([q](double c) { return mixture_p(c, q); }, alpha, 1e-8, 40.0);
}

PowerComparison power_comparison(double rho, double alpha, PowerMode mode, double target,
                                 std::size_t reps, RandomSource& rs) {
    if (reps < 100000) throw ValidationError("power_comparison: reps must be >= 1e5");
    if (std::fabs(rho) >= 1.0 - 1e-10)
        throw DegenerateCovariance("power_comparison: |rho| >= 1 - 1e-10");
    if (!(target > 0.0 && target < 1.0))
        throw ValidationError("power_comparison: target must be in (0, 1)");
    const double q_high = norm_quantile(1.0 - alpha / 2.0);
    const double q_low = norm_quantile(1.0 - alpha);
    const double c_sw = critical_value(rho, alpha);
    const double mix = std::sqrt(1.0 - rho * rho);

    std::vector<double> e1(reps), e2(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const double n1 = rs.normal(), n2 = rs.normal();
        e1[i] = n1;
        e2[i] = rho * n1 + mix * n2;
    }
    // the Holm decision at shift r depends on the draw only through a
    // per-draw threshold on r, so the calibration power curve is exact
    std::vector<double> threshold(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const double hi = std::max(e1[i], e2[i]), lo = std::min(e1[i], e2[i]);
        threshold[i] = mode == PowerMode::conjunctive
                           ? std::max(q_high - hi, q_low - lo)
                           : q_high - hi;
    }
    std::sort(threshold.begin(), threshold.end());
    auto holm_power = [&](double r) {
        const auto it = std::upper_bound(threshold.begin(), threshold.end(), r);
        return static_cast<double>(it - threshold.begin()) / static_cast<double>(reps);
    };

    double lo = 0.0, hi = 10.0;
    if (holm_power(lo) >= target)
        throw NonConvergence("power_comparison: target power reached at r = 0");
    while (holm_power(hi) < target) {
        hi *= 2.0;
        if (hi > 1e4) throw NonConvergence("power_comparison: no bracket for r");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (holm_power(mid) < target ? lo : hi) = mid;
    }
    PowerComparison out;
    out.r_star = hi;
    out.power_holm = holm_power(out.r_star);

    std::size_t hits = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        const double z1 = e1[i] + out.r_star, z2 = e2[i] + out.r_star;
        const double z_max = std::max(z1, z2), z_min = std::min(z1, z2);
        double sw = 0.0;
        if (z_max >= 0.0) {
            if (z_min <= rho * z_max)
                sw = z_max * z_max;
            else
                sw = (z_max * z_max + z_min * z_min - 2.0 * rho * z_min * z_max) /
                     (1.0 - rho * rho);
        }
        const bool intersection = sw >= c_sw;
        const bool hit = mode == PowerMode::conjunctive
                             ? intersection && z_min >= q_low
                             : intersection && z_max >= q_low;
        if (hit) ++hits;
    }
    out.power_proposed = static_cast<double>(hits) / static_cast<double>(reps);
    return out;
}

} // namespace truncscore
