#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "truncscore/numerics.hpp"
#include "truncscore/random.hpp"
#include "truncscore/step_function.hpp"

using namespace truncscore;

TEST_CASE("matrix basics") {
    Matrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    Matrix at = transpose(a);
    CHECK(at.rows == 3);
    CHECK(at(2, 1) == 6.0);
    Matrix p = matmul(a, at); // 2x2: [[14,32],[32,77]]
    CHECK(p(0, 0) == doctest::Approx(14.0));
    CHECK(p(0, 1) == doctest::Approx(32.0));
    CHECK(p(1, 1) == doctest::Approx(77.0));
    CHECK(p.is_symmetric());
    CHECK_FALSE(a.is_symmetric());
    Matrix i3 = Matrix::identity(3);
    Matrix ai = matmul(a, i3);
    for (std::size_t k = 0; k < 6; ++k) CHECK(ai.data[k] == a.data[k]);
    CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}

TEST_CASE("solve_spd solves and rejects non-PD") {
    Matrix m(2, 2);
    m(0, 0) = 4; m(0, 1) = 2; m(1, 0) = 2; m(1, 1) = 3;
    std::vector<double> x = solve_spd(m, {10.0, 8.0});
    CHECK(x[0] == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(1.5).epsilon(1e-12));

    Matrix inv = inverse_spd(m);
    Matrix id = matmul(m, inv);
    CHECK(id(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(id(0, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    Matrix bad(2, 2);
    bad(0, 0) = 1; bad(0, 1) = 2; bad(1, 0) = 2; bad(1, 1) = 1; // eigenvalues 3, -1
    CHECK_THROWS_AS(solve_spd(bad, {1.0, 1.0}), NotPositiveDefinite);
}

TEST_CASE("sym_sqrt_2x2 multiplies back") {
    std::vector<std::vector<double>> cases = {
        {2, 1, 1, 2}, {1, 0, 0, 1}, {4, -1.2, -1.2, 0.5}, {1, 0.57, 0.57, 1},
        {3.7, 0, 0, 0.002}};
    for (const auto& c : cases) {
        Matrix m(2, 2);
        m(0, 0) = c[0]; m(0, 1) = c[1]; m(1, 0) = c[2]; m(1, 1) = c[3];
        Matrix s = sym_sqrt_2x2(m);
        Matrix ss = matmul(s, s);
        for (int k = 0; k < 4; ++k)
            CHECK(std::fabs(ss.data[k] - m.data[k]) <= 1e-10);
    }
    // closed form for [[2,1],[1,2]]: (m + sqrt(3) I) / (1 + sqrt(3))
    Matrix m(2, 2);
    m(0, 0) = 2; m(0, 1) = 1; m(1, 0) = 1; m(1, 1) = 2;
    Matrix s = sym_sqrt_2x2(m);
    const double r3 = std::sqrt(3.0);
    CHECK(s(0, 0) == doctest::Approx((2 + r3) / (1 + r3)).epsilon(1e-12));
    CHECK(s(0, 1) == doctest::Approx(1.0 / (1 + r3)).epsilon(1e-12));

    Matrix nd(2, 2);
    nd(0, 0) = 1; nd(0, 1) = 2; nd(1, 0) = 2; nd(1, 1) = 1;
    CHECK_THROWS_AS(sym_sqrt_2x2(nd), NotPositiveDefinite);
}

TEST_CASE("norm_cdf frozen values and integration oracle") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::fabs(norm_cdf(1.959964) - 0.9750000009035576) <= 1e-10);
    CHECK(std::fabs(norm_cdf(-1.0) - 0.15865525393145705) <= 1e-10);
    CHECK(std::fabs(norm_cdf(2.2414) - 0.9874999117387979) <= 1e-10);
    CHECK(std::fabs(norm_cdf(0.5) - 0.6914624612740131) <= 1e-10);
    CHECK(std::fabs(norm_cdf(-3.0) - 0.0013498980316300945) <= 1e-12);
    CHECK(norm_cdf(1.0) + norm_cdf(-1.0) == doctest::Approx(1.0).epsilon(1e-14));

    // independent oracle: Simpson integration of the density over [0, z]
    for (double z : {0.3, 1.0, 1.959964, 2.5}) {
        const int n = 2000;
        const double h = z / n;
        double acc = norm_pdf(0.0) + norm_pdf(z);
        for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * norm_pdf(i * h);
        const double integral = acc * h / 3.0;
        CHECK(std::fabs(norm_cdf(z) - (0.5 + integral)) <= 1e-10);
    }
}

TEST_CASE("norm_quantile inverts the cdf") {
    CHECK(std::fabs(norm_quantile(0.975) - 1.9599639845400542) <= 1e-8);
    CHECK(std::fabs(norm_quantile(0.9875) - 2.2414027276049454) <= 1e-8);
    CHECK(std::fabs(norm_quantile(0.025) + 1.9599639845400542) <= 1e-8);
    CHECK(std::fabs(norm_quantile(0.8) - 0.8416212335729142) <= 1e-8);
    CHECK(norm_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    for (double p = 0.0005; p < 1.0; p += 0.0085)
        CHECK(std::fabs(norm_cdf(norm_quantile(p)) - p) <= 1e-10);
    CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(norm_quantile(-0.2), std::domain_error);
}

TEST_CASE("chisq_sf for one and two degrees of freedom") {
    CHECK(std::fabs(chisq_sf(5.991464547107982, 2) - 0.05) <= 1e-12);
    CHECK(std::fabs(chisq_sf(3.841458820694126, 1) - 0.05) <= 1e-10);
    CHECK(std::fabs(chisq_sf(5.9915, 2) - 0.05) <= 2e-5);
    CHECK(std::fabs(chisq_sf(3.8415, 1) - 0.05) <= 2e-5);
    CHECK(chisq_sf(0.0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(chisq_sf(0.0, 2) == doctest::Approx(1.0).epsilon(1e-14));
    // df=1 is the squared-normal tail: sf(z^2, 1) = 2 (1 - Phi(z))
    for (double z : {0.5, 1.0, 1.959964, 3.0})
        CHECK(chisq_sf(z * z, 1) == doctest::Approx(2.0 * (1.0 - norm_cdf(z))).epsilon(1e-12));
    CHECK_THROWS_AS(chisq_sf(1.0, 3), std::domain_error);
    CHECK_THROWS_AS(chisq_sf(-0.5, 1), std::domain_error);
}

TEST_CASE("orthant_prob_neg closed form") {
    CHECK(orthant_prob_neg(0.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::fabs(orthant_prob_neg(0.57) - 0.34652840487134017) <= 1e-12);
    CHECK(std::fabs(orthant_prob_neg(-0.3) - 0.20150665798966085) <= 1e-12);
    CHECK(std::fabs(orthant_prob_neg(0.9) - 0.42821685343564686) <= 1e-12);
    CHECK_THROWS_AS(orthant_prob_neg(1.0), std::domain_error);
}

TEST_CASE("bisect_decreasing finds roots and expands brackets") {
    auto f2 = [](double x) { return chisq_sf(x, 2); };
    CHECK(std::fabs(bisect_decreasing(f2, 0.05, 0.0, 20.0) - 5.991464547107982) <= 1e-6);
    auto f1 = [](double x) { return chisq_sf(x, 1); };
    CHECK(std::fabs(bisect_decreasing(f1, 0.05, 0.0, 20.0) - 3.841458820694126) <= 1e-6);
    // solution outside the initial bracket: expansion must find it
    auto lin = [](double x) { return 10.0 - x; };
    CHECK(std::fabs(bisect_decreasing(lin, 2.0, 0.0, 1.0) - 8.0) <= 1e-6);
    // increasing function cannot be bracketed
    auto inc = [](double x) { return x; };
    CHECK_THROWS_AS(bisect_decreasing(inc, 0.5, 2.0, 3.0), BracketError);
    CHECK_THROWS_AS(bisect_decreasing(lin, 2.0, 5.0, 4.0), std::invalid_argument);
}

TEST_CASE("random source determinism and child derivation") {
    RandomSource a(42), b(42);
    for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());
    // child is a pure function of (seed, index), untouched by parent draws
    RandomSource c1 = RandomSource(42).child(5);
    RandomSource parent(42);
    parent.uniform();
    parent.uniform();
    RandomSource c2 = parent.child(5);
    for (int i = 0; i < 100; ++i) CHECK(c1.next_u64() == c2.next_u64());
    // distinct indices give distinct streams
    RandomSource c3 = RandomSource(42).child(6);
    int same = 0;
    RandomSource c4 = RandomSource(42).child(5);
    for (int i = 0; i < 100; ++i) same += (c4.next_u64() == c3.next_u64());
    CHECK(same == 0);
}

TEST_CASE("random source distributions") {
    RandomSource r(7);
    double su = 0, squ = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        su += u;
        squ += u * u;
    }
    CHECK(std::fabs(su / n - 0.5) <= 4.0 * std::sqrt(1.0 / 12 / n));
    CHECK(std::fabs(squ / n - 1.0 / 3) <= 4.0 * std::sqrt(0.0889 / n));
    double sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::fabs(sn / n) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(sn2 / n - 1.0) <= 4.0 * std::sqrt(2.0 / n));
    // Weibull median is scale * log(2)^(1/shape)
    const double shape = 1.822, scale = 0.8;
    int below = 0;
    const double med = scale * std::pow(std::log(2.0), 1.0 / shape);
    for (int i = 0; i < n; ++i) below += (r.weibull(shape, scale) < med);
    CHECK(std::fabs(below / static_cast<double>(n) - 0.5) <= 4.0 * std::sqrt(0.25 / n));
    CHECK_THROWS_AS(r.weibull(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("step function evaluation and left limits") {
    StepFunction s({1.0, 3.0}, {0.75, 0.5}, 1.0);
    CHECK(s.value_at(0.9) == 1.0);
    CHECK(s.value_at(1.0) == 0.75);
    CHECK(s.left_limit(1.0) == 1.0);
    CHECK(s.value_at(2.5) == 0.75);
    CHECK(s.left_limit(3.0) == 0.75);
    CHECK(s.value_at(3.0) == 0.5);
    CHECK(s.value_at(100.0) == 0.5);
    CHECK(s.left_limit(0.2) == 1.0);
    StepFunction empty({}, {}, 2.0);
    CHECK(empty.value_at(5.0) == 2.0);
    CHECK_THROWS_AS(StepFunction({2.0, 2.0}, {1.0, 0.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepFunction({2.0}, {1.0, 0.5}, 1.0), std::invalid_argument);
}
