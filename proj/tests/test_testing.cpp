#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "truncscore/testing.hpp"

using namespace truncscore;

namespace {

// independent zooming-grid minimization of (psi-b)' Sigma^{-1} (psi-b) over
// the null region {b0 <= dy, b1 <= -dt}
double grid_sw(const std::vector<double>& psi, const Matrix& sigma_star, double dy,
               double dt) {
    const Matrix inv = inverse_spd(sigma_star);
    auto quad = [&](double b0, double b1) {
        const double r0 = psi[0] - b0, r1 = psi[1] - b1;
        return inv(0, 0) * r0 * r0 + 2.0 * inv(0, 1) * r0 * r1 + inv(1, 1) * r1 * r1;
    };
    double c0 = dy, c1 = -dt;
    double w = 8.0 * std::sqrt(std::max(sigma_star(0, 0), sigma_star(1, 1))) + 8.0;
    double best = quad(c0, c1);
    for (int round = 0; round < 80; ++round) {
        double b0_best = c0, b1_best = c1;
        for (int i = -20; i <= 20; ++i)
            for (int j = -20; j <= 20; ++j) {
                const double b0 = std::min(dy, c0 + w * i / 20.0);
                const double b1 = std::min(-dt, c1 + w * j / 20.0);
                const double v = quad(b0, b1);
                if (v < best) {
                    best = v;
                    b0_best = b0;
                    b1_best = b1;
                }
            }
        c0 = b0_best;
        c1 = b1_best;
        w *= 0.5;
    }
    return best;
}

// SW via the u-space representation and the generic projection
double dykstra_sw(const std::vector<double>& psi, const Matrix& sigma_star, double dy,
                  double dt) {
    const Matrix s = sym_sqrt_2x2(sigma_star);
    const Matrix s_inv = inverse_spd(s);
    const double r0 = psi[0] - dy, r1 = psi[1] + dt;
    const std::vector<double> u = {s_inv(0, 0) * r0 + s_inv(0, 1) * r1,
                                   s_inv(1, 0) * r0 + s_inv(1, 1) * r1};
    const std::vector<double> proj =
        dykstra_project(u, {{s(0, 0), s(0, 1)}, {s(1, 0), s(1, 1)}});
    const double d0 = u[0] - proj[0], d1 = u[1] - proj[1];
    return d0 * d0 + d1 * d1;
}

struct Instance {
    std::vector<double> psi;
    Matrix sigma;
    double dy, dt;
};

Instance random_instance(RandomSource& rs) {
    Instance in;
    in.psi = {6.0 * rs.uniform() - 3.0, 6.0 * rs.uniform() - 3.0};
    for (;;) {
        double a[4];
        for (double& v : a) v = 2.0 * rs.uniform() - 1.0;
        Matrix s(2, 2);
        s(0, 0) = a[0] * a[0] + a[2] * a[2] + 0.05;
        s(1, 1) = a[1] * a[1] + a[3] * a[3] + 0.05;
        s(0, 1) = s(1, 0) = a[0] * a[1] + a[2] * a[3];
        const double rho = s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
        if (std::fabs(rho) <= 0.98) {
            in.sigma = s;
            break;
        }
    }
    in.dy = 0.1 * rs.uniform();
    in.dt = 0.1 * rs.uniform();
    return in;
}

} // namespace

TEST_CASE("single signed Wald test boundary and anchor values") {
    const SignedWaldResult zero = signed_wald_single(0.0, 1.0, 0.0, Side::y);
    CHECK(zero.statistic == 0.0);
    CHECK(zero.p_value == 1.0);

    const SignedWaldResult anchor = signed_wald_single(1.9599639845400542, 1.0, 0.0, Side::y);
    CHECK(anchor.statistic == doctest::Approx(3.841458820694126).epsilon(1e-12));
    CHECK(anchor.p_value == doctest::Approx(0.025).epsilon(1e-9));
    // half the df-1 upper tail gives the same p
    CHECK(anchor.p_value == doctest::Approx(0.5 * chisq_sf(anchor.statistic, 1)).epsilon(1e-12));

    const SignedWaldResult neg = signed_wald_single(-0.4, 1.0, 0.0, Side::y);
    CHECK(neg.statistic == 0.0);
    CHECK(neg.p_value == 1.0);

    // margins enter with opposite signs on the two sides
    CHECK(signed_wald_single(0.3, 1.0, 0.1, Side::y).z == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(signed_wald_single(0.3, 1.0, 0.1, Side::t).z == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(signed_wald_single(1.0, 0.0, 0.0, Side::y), DomainError);
}

TEST_CASE("intersection statistic region formula on worked examples") {
    Matrix eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;

    const IntersectionResult both = signed_wald_intersection({2.0, 2.0}, eye, 0.0, 0.0);
    CHECK(both.statistic == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(both.q_hat == doctest::Approx(0.25).epsilon(1e-12));

    const IntersectionResult one = signed_wald_intersection({3.0, -1.0}, eye, 0.0, 0.0);
    CHECK(one.statistic == doctest::Approx(9.0).epsilon(1e-12));

    const IntersectionResult none = signed_wald_intersection({-1.0, -2.0}, eye, 0.0, 0.0);
    CHECK(none.statistic == 0.0);
    CHECK(none.p_value == 1.0);

    Matrix degenerate(2, 2);
    degenerate(0, 0) = degenerate(1, 1) = degenerate(0, 1) = degenerate(1, 0) = 1.0;
    CHECK_THROWS_AS(signed_wald_intersection({1.0, 1.0}, degenerate, 0.0, 0.0),
                    DegenerateCovariance);
}

TEST_CASE("projection algorithm on hand-checkable geometry") {
    const std::vector<double> inside = dykstra_project({-1.0, -2.0}, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(inside[0] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(inside[1] == doctest::Approx(-2.0).epsilon(1e-10));

    const std::vector<double> wall = dykstra_project({3.0, 4.0}, {{1.0, 0.0}});
    CHECK(wall[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(wall[1] == doctest::Approx(4.0).epsilon(1e-10));

    const std::vector<double> corner = dykstra_project({1.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(std::fabs(corner[0]) < 1e-10);
    CHECK(std::fabs(corner[1]) < 1e-10);

    CHECK_THROWS_AS(dykstra_project({1.0, 1.0}, {}), ValidationError);
    CHECK_THROWS_AS(dykstra_project({1.0, 1.0}, {{0.0, 0.0}}), ValidationError);
}

TEST_CASE("region formula agrees with projection and grid minimization") {
    RandomSource rs(3001);
    for (int k = 0; k < 1000; ++k) {
        const Instance in = random_instance(rs);
        const IntersectionResult res =
            signed_wald_intersection(in.psi, in.sigma, in.dy, in.dt);
        const double via_proj = dykstra_sw(in.psi, in.sigma, in.dy, in.dt);
        const double via_grid = grid_sw(in.psi, in.sigma, in.dy, in.dt);
        const double tol = 1e-8 * std::max(1.0, res.statistic);
        CHECK(std::fabs(res.statistic - via_proj) < tol);
        CHECK(std::fabs(res.statistic - via_grid) < tol);

        // dominance over the larger standardized statistic
        const double z_max = std::max(res.z_y, res.z_t);
        if (z_max >= 0.0) CHECK(res.statistic >= z_max * z_max - 1e-12);

        // mixture weights are a probability vector
        CHECK(res.q_hat > 0.0);
        CHECK(res.q_hat < 0.5);
        CHECK((0.5 - res.q_hat) + 0.5 + res.q_hat == 1.0);

        // scale invariance
        const double c = 3.7;
        Matrix scaled(2, 2);
        for (std::size_t i = 0; i < 4; ++i) scaled.data[i] = in.sigma.data[i] * c * c;
        const IntersectionResult res2 = signed_wald_intersection(
            {c * in.psi[0], c * in.psi[1]}, scaled, c * in.dy, c * in.dt);
        CHECK(res2.statistic == doctest::Approx(res.statistic).epsilon(1e-12));
        CHECK(res2.p_value == doctest::Approx(res.p_value).epsilon(1e-12));
    }
}

TEST_CASE("orthant probability matches simulation on a correlation grid") {
    RandomSource rs(3002);
    for (double rho : {-0.9, -0.5, 0.0, 0.3, 0.57, 0.9}) {
        const double mix = std::sqrt(1.0 - rho * rho);
        std::size_t hits = 0;
        const std::size_t reps = 10000000;
        for (std::size_t i = 0; i < reps; ++i) {
            const double z1 = rs.normal();
            const double z2 = rho * z1 + mix * rs.normal();
            if (z1 <= 0.0 && z2 <= 0.0) ++hits;
        }
        const double mc = static_cast<double>(hits) / static_cast<double>(reps);
        CHECK(std::fabs(orthant_prob_neg(rho) - mc) < 1e-3);
        // q is the complement used by the mixture null
        const double q = 0.25 - std::asin(rho) / (2.0 * M_PI);
        CHECK(std::fabs(q - (0.5 - mc)) < 1e-3);
    }
}

TEST_CASE("critical value anchor, limits and monotonicity") {
    const double c = critical_value(0.57, 0.025);
    CHECK(c > 5.014);
    CHECK(c < 5.034);
    // coincides with the squared alpha/2 normal quantile at this correlation
    const double q9875 = norm_quantile(0.9875);
    CHECK(std::fabs(c - q9875 * q9875) < 0.01);

    // q -> 0 recovers the single-test threshold
    const double c_top = critical_value(1.0 - 1e-7, 0.025);
    CHECK(std::fabs(c_top - 3.841458820694126) < 5e-3);

    double prev = critical_value(-0.98, 0.025);
    for (int i = 1; i < 50; ++i) {
        const double rho = -0.98 + 1.96 * i / 49.0;
        const double cur = critical_value(rho, 0.025);
        CHECK(cur < prev);
        prev = cur;
    }

    // p-value is non-increasing in the statistic for fixed correlation
    Matrix eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    double p_prev = 1.0;
    for (double shift = 0.0; shift < 4.0; shift += 0.25) {
        const IntersectionResult r = signed_wald_intersection({shift, shift}, eye, 0.0, 0.0);
        CHECK(r.p_value <= p_prev + 1e-15);
        p_prev = r.p_value;
    }

    CHECK_THROWS_AS(critical_value(1.0, 0.025), DegenerateCovariance);
    CHECK_THROWS_AS(critical_value(0.5, 0.7), ValidationError);
}

namespace {

EstimationResult synthetic_result(double psi_y, double se_y, double psi_t, double se_t,
                                  double rho, std::size_t n) {
    EstimationResult est;
    est.n = n;
    const double dn = static_cast<double>(n);
    est.psi_y.estimate = psi_y;
    est.psi_y.se = se_y;
    est.psi_t.estimate = psi_t;
    est.psi_t.se = se_t;
    est.sigma = Matrix(2, 2);
    est.sigma(0, 0) = se_y * se_y * dn;
    est.sigma(1, 1) = se_t * se_t * dn;
    est.sigma(0, 1) = est.sigma(1, 0) = rho * se_y * se_t * dn;
    return est;
}

} // namespace

TEST_CASE("closed testing decisions and the step-down comparator") {
    TestConfig cfg; // alpha 0.025, margins (0, 0.05)
    cfg.delta_t = 0.0;

    // both clearly rejected by everything
    const ClosedTestReport strong = closed_test(synthetic_result(5.0, 1.0, 0.06, 0.01, 0.0, 400), cfg);
    CHECK(strong.reject_y);
    CHECK(strong.reject_t);
    CHECK(strong.comparator.reject_y);
    CHECK(strong.comparator.reject_t);

    // one-sided: the score effect is huge, the risk effect is on the null side
    const ClosedTestReport one = closed_test(synthetic_result(8.0, 1.0, -0.02, 0.01, 0.0, 400), cfg);
    CHECK(one.reject_y);
    CHECK(!one.reject_t);
    CHECK(one.comparator.reject_y);
    CHECK(!one.comparator.reject_t);
    // closure: an elementary rejection implies the intersection was rejected
    CHECK(one.intersection.p_value <= cfg.alpha);

    // both moderately positive: the joint test rejects both where the
    // step-down comparator rejects neither
    const double z_y = 2.0537489106318225; // 1 - cdf = 0.020
    const double z_t = 2.2262157162740992; // 1 - cdf = 0.013
    const ClosedTestReport joint =
        closed_test(synthetic_result(z_y, 1.0, z_t, 1.0, 0.0, 100), cfg);
    CHECK(joint.single_y.p_value == doctest::Approx(0.020).epsilon(1e-6));
    CHECK(joint.single_t.p_value == doctest::Approx(0.013).epsilon(1e-6));
    CHECK(joint.reject_y);
    CHECK(joint.reject_t);
    CHECK(!joint.comparator.reject_y);
    CHECK(!joint.comparator.reject_t);

    // nothing significant
    const ClosedTestReport weak = closed_test(synthetic_result(0.5, 1.0, 0.0, 0.01, 0.0, 400), cfg);
    CHECK(!weak.reject_y);
    CHECK(!weak.reject_t);
    CHECK(!weak.comparator.reject_y);
    CHECK(!weak.comparator.reject_t);

    TestConfig bad;
    bad.alpha = 0.7;
    CHECK_THROWS_AS(closed_test(synthetic_result(1, 1, 1, 1, 0.0, 10), bad), ValidationError);
}

TEST_CASE("closed testing dominates the comparator in calibrated power") {
    RandomSource rs(3003);
    const PowerComparison disj =
        power_comparison(0.57, 0.025, PowerMode::disjunctive, 0.8, 400000, rs);
    CHECK(std::fabs(disj.power_holm - 0.8) < 1e-3);
    CHECK(disj.power_proposed >= disj.power_holm);

    RandomSource rs2(3004);
    const PowerComparison conj =
        power_comparison(0.0, 0.025, PowerMode::conjunctive, 0.8, 400000, rs2);
    CHECK(std::fabs(conj.power_holm - 0.8) < 1e-3);
    CHECK(conj.power_proposed >= conj.power_holm);

    RandomSource rs3(3005);
    CHECK_THROWS_AS(power_comparison(0.0, 0.025, PowerMode::conjunctive, 0.8, 1000, rs3),
                    ValidationError);
}

TEST_CASE("joint rejection rate under the exact null stays at level") {
    // draws at the null vertex: both standardized statistics centered at zero
    const double alpha = 0.025;
    const double rho = 0.3;
    const double c = critical_value(rho, alpha);
    const double mix = std::sqrt(1.0 - rho * rho);
    RandomSource rs(3006);
    const std::size_t reps = 400000;
    std::size_t rej = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        const double z1 = rs.normal();
        const double z2 = rho * z1 + mix * rs.normal();
        const double z_max = std::max(z1, z2), z_min = std::min(z1, z2);
        double sw = 0.0;
        if (z_max >= 0.0)
            sw = z_min <= rho * z_max
                     ? z_max * z_max
                     : (z_max * z_max + z_min * z_min - 2.0 * rho * z_min * z_max) /
                           (1.0 - rho * rho);
        if (sw >= c) ++rej;
    }
    const double rate = static_cast<double>(rej) / static_cast<double>(reps);
    const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
    CHECK(std::fabs(rate - alpha) < 3.0 * se);
}
