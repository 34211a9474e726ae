#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "truncscore/simulation.hpp"

using namespace truncscore;

TEST_CASE("scenario registry and the stronger-covariate variant") {
    const ScenarioParams base = builtin_scenario("table1");
    CHECK(base.pi_a == 0.5);
    CHECK(base.p_x2 == 0.156);
    CHECK(base.mu_x1[1] == 51.15);
    CHECK(base.beta_y[1][2] == 2.620);
    CHECK(base.beta_r[0][0] == 2.243);
    CHECK(base.shape_t[1][1] == 1.901);
    CHECK(!base.null_effect);
    CHECK(x1_marginal_mean(base) == doctest::Approx(47.00596).epsilon(1e-9));

    const ScenarioParams strong = builtin_scenario("table5");
    CHECK(strong.beta_t[1][0][1] == -0.15);
    CHECK(strong.beta_t[1][1][1] == -0.15);
    // every other field is untouched
    ScenarioParams patched = base;
    patched.beta_t[1][0][1] = patched.beta_t[1][1][1] = -0.15;
    CHECK(scenario_to_json(strong) == scenario_to_json(patched));

    const ScenarioParams null_sp = builtin_scenario("table1-null");
    CHECK(null_sp.null_effect);
    ScenarioParams base_null = base;
    base_null.null_effect = true;
    CHECK(scenario_to_json(null_sp) == scenario_to_json(base_null));

    CHECK_THROWS_AS(builtin_scenario("table9"), std::invalid_argument);
}

TEST_CASE("scenario serialization round-trips and rejects bad input") {
    const ScenarioParams sp = builtin_scenario("table5");
    const std::string text = scenario_to_json(sp);
    const ScenarioParams back = scenario_from_json(text);
    CHECK(scenario_to_json(back) == text);
    CHECK(std::memcmp(back.beta_t, sp.beta_t, sizeof sp.beta_t) == 0);
    CHECK(back.sd_y[1] == sp.sd_y[1]);

    CHECK_THROWS_AS(scenario_from_json("{not json"), ParseError);
    CHECK_THROWS_AS(scenario_from_json("{\"a\": 0.5}"), SchemaError);
    std::string bad = text;
    const std::string::size_type pos = bad.find("\"tau\": 2.0");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 10, "\"tau\": -1.0");
    CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
}

TEST_CASE("generated datasets are deterministic and internally consistent") {
    const ScenarioParams sp = builtin_scenario("table1");
    RandomSource r1(99), r2(99);
    const Dataset d1 = simulate_dataset(sp, 5000, r1);
    const Dataset d2 = simulate_dataset(sp, 5000, r2);
    std::ostringstream s1, s2;
    write_csv(s1, d1);
    write_csv(s2, d2);
    CHECK(s1.str() == s2.str());

    std::size_t early_scores = 0, survivors = 0;
    for (const SubjectRecord& rec : d1.records) {
        CHECK((rec.a == 0 || rec.a == 1));
        CHECK((rec.x2 == 0.0 || rec.x2 == 1.0));
        CHECK(rec.time > 0.0);
        CHECK(rec.status >= 0);
        CHECK(rec.status <= 2);
        CHECK(rec.y.has_value() == (rec.r == 1));
        if (rec.time > sp.tau) {
            // whoever is still under observation at the landmark has a score
            CHECK(rec.r == 1);
            ++survivors;
        } else if (rec.r == 1) {
            ++early_scores; // censored early yet seen at the landmark visit
        }
    }
    CHECK(survivors > 4000);
    CHECK(early_scores > 0);
}

TEST_CASE("latent Weibull reduces to the exponential in the degenerate scenario") {
    ScenarioParams sp = builtin_scenario("table1");
    // leave only cause 1, unit rate and shape, no covariate effects
    for (int arm = 0; arm < 2; ++arm) {
        sp.beta_t[0][arm][0] = std::log(1e-12);
        sp.beta_t[2][arm][0] = std::log(1e-12);
        sp.beta_t[1][arm][0] = 0.0;
        sp.beta_t[1][arm][1] = 0.0;
        sp.beta_t[1][arm][2] = 0.0;
        sp.shape_t[1][arm] = 1.0;
        sp.beta_r[arm][0] = 30.0; // keep the landmark visit certain
    }
    RandomSource rs(100);
    const Dataset d = simulate_dataset(sp, 1000000, rs);
    std::vector<double> times;
    times.reserve(d.n());
    for (const SubjectRecord& rec : d.records) {
        CHECK(rec.status == 1);
        times.push_back(rec.time);
    }
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    CHECK(std::fabs(times[times.size() / 2] - std::log(2.0)) < 0.01);
}

TEST_CASE("oracle recovers the benchmark contrasts and vanishes under the null") {
    RandomSource rs(101);
    const TruthEstimate t = truth_oracle(builtin_scenario("table1"), 1000000, rs);
    CHECK(std::fabs(t.psi_y - 2.790) < 3.5 * t.se_psi_y + 0.001);
    CHECK(std::fabs(t.psi_t - 0.0259) < 3.5 * t.se_psi_t + 0.0001);

    RandomSource rs_null(102);
    const TruthEstimate tn = truth_oracle(builtin_scenario("table1-null"), 1000000, rs_null);
    CHECK(std::fabs(tn.psi_y) < 3.5 * tn.se_psi_y);
    CHECK(std::fabs(tn.psi_t) < 3.5 * tn.se_psi_t);
}

TEST_CASE("replication campaigns are deterministic and worker-count independent") {
    ReplicationConfig rc;
    rc.scenario = builtin_scenario("table1");
    rc.n = 400;
    rc.reps = 60;
    rc.delta_t = 0.0;
    rc.truth_psi_y = 2.790;
    rc.truth_psi_t = 0.0259;
    const ReplicationResult r1 = replicate_study(rc, 77);
    const ReplicationResult r2 = replicate_study(rc, 77);
    rc.threads = 3;
    const ReplicationResult r3 = replicate_study(rc, 77);
    CHECK(summary_csv(r1) == summary_csv(r2));
    CHECK(summary_csv(r1) == summary_csv(r3));
    CHECK(power_csv(r1) == power_csv(r3));
    CHECK(type1_csv(r1) == type1_csv(r3));

    CHECK(r1.reps_requested == 60);
    CHECK(r1.reps_failed <= 1);
    for (int m = 0; m < 2; ++m)
        for (int p = 0; p < 2; ++p) {
            const ReplicationResult::Row& row = r1.rows[m][p];
            CHECK(std::isfinite(row.mean));
            CHECK(row.sd > 0.0);
            CHECK(row.coverage >= 0.0);
            CHECK(row.coverage <= 1.0);
        }
    CHECK(r1.rows[0][0].rel_eff == 1.0);
    CHECK(r1.rows[0][1].rel_eff == 1.0);
    CHECK(r1.rows[1][0].rel_eff ==
          doctest::Approx(r1.rows[1][0].sd / r1.rows[0][0].sd).epsilon(1e-12));
    CHECK(r1.rows[1][0].rel_eff_var ==
          doctest::Approx(r1.rows[1][0].rel_eff * r1.rows[1][0].rel_eff).epsilon(1e-12));

    // a different seed moves the aggregates
    CHECK(summary_csv(replicate_study(rc, 78)) != summary_csv(r1));

    // the emitters carry a header plus one line per row
    std::istringstream sum(summary_csv(r1));
    std::string line;
    int lines = 0;
    while (std::getline(sum, line)) ++lines;
    CHECK(lines == 5);
    CHECK(summary_csv(r1).rfind("estimator,parameter,mean,bias,se,sd,", 0) == 0);
    CHECK(power_csv(r1).find("adjusted") != std::string::npos);
    CHECK(type1_csv(r1).find("intersection") != std::string::npos);
}

TEST_CASE("campaigns with overwhelming failure rates abort") {
    ReplicationConfig rc;
    rc.scenario = builtin_scenario("table1");
    rc.n = 6; // far too small for any nuisance fit
    rc.reps = 100;
    CHECK_THROWS_AS(replicate_study(rc, 5), NonConvergence);
}
