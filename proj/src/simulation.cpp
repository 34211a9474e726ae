#include "truncscore/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "truncscore/estimators.hpp"
#include "truncscore/testing.hpp"

namespace truncscore {

namespace {

void fill_cause(ScenarioParams& sp, int cause, double rate0, double bx1_0, double bx2_0,
                double shape0, double rate1, double bx1_1, double bx2_1, double shape1) {
    sp.beta_t[cause][0][0] = std::log(rate0);
    sp.beta_t[cause][0][1] = bx1_0;
    sp.beta_t[cause][0][2] = bx2_0;
    sp.shape_t[cause][0] = shape0;
    sp.beta_t[cause][1][0] = std::log(rate1);
    sp.beta_t[cause][1][1] = bx1_1;
    sp.beta_t[cause][1][2] = bx2_1;
    sp.shape_t[cause][1] = shape1;
}

ScenarioParams benchmark_scenario() {
    ScenarioParams sp;
    // covariates, score and visit models are carried by the defaults;
    // cause 0 is censoring, causes 1-2 are terminal
    fill_cause(sp, 0, 0.00014, 0.0, 0.0, 6.691, 9.35e-5, 0.0, 0.0, 6.946);
    fill_cause(sp, 1, 0.0285, -0.0243, -0.5832, 1.822, 0.01817, -0.0289, -0.1261, 1.901);
    fill_cause(sp, 2, 0.0154, -0.0205, -0.4549, 1.143, 0.016, 0.00687, -0.598, 1.071);
    return sp;
}

} // namespace

ScenarioParams builtin_scenario(const std::string& name) {
    if (name == "table1") return benchmark_scenario();
    if (name == "table1-null") {
        ScenarioParams sp = benchmark_scenario();
        sp.null_effect = true;
        return sp;
    }
    if (name == "table5") {
        ScenarioParams sp = benchmark_scenario();
        sp.beta_t[1][0][1] = -0.15;
        sp.beta_t[1][1][1] = -0.15;
        return sp;
    }
    throw std::invalid_argument("unknown scenario '" + name +
                                "' (available: table1, table5, table1-null)");
}

namespace {

using nlohmann::json;

json arm_triplet(const double b[2][3]) {
    return json{{"a=0", {b[0][0], b[0][1], b[0][2]}}, {"a=1", {b[1][0], b[1][1], b[1][2]}}};
}

void read_arm_triplet(const json& j, double b[2][3]) {
    for (int a = 0; a < 2; ++a) {
        const json& v = j.at(a == 0 ? "a=0" : "a=1");
        if (!v.is_array() || v.size() != 3)
            throw SchemaError("scenario: coefficient lists must have 3 entries");
        for (int k = 0; k < 3; ++k) b[a][k] = v.at(k).get<double>();
    }
}

} // namespace

std::string scenario_to_json(const ScenarioParams& sp) {
    json j;
    j["a"] = sp.pi_a;
    j["x2"] = sp.p_x2;
    j["x1"] = {{"m", {{"x2=0", sp.mu_x1[0]}, {"x2=1", sp.mu_x1[1]}}},
               {"sd", {{"x2=0", sp.sd_x1[0]}, {"x2=1", sp.sd_x1[1]}}}};
    j["y"] = {{"m", arm_triplet(sp.beta_y)},
              {"sd", {{"a=0", sp.sd_y[0]}, {"a=1", sp.sd_y[1]}}}};
    j["r"] = {{"m", arm_triplet(sp.beta_r)}};
    const char* keys[3] = {"t0", "t1", "t2"};
    for (int c = 0; c < 3; ++c)
        j[keys[c]] = {{"m", arm_triplet(sp.beta_t[c])},
                      {"shape", {{"a=0", sp.shape_t[c][0]}, {"a=1", sp.shape_t[c][1]}}}};
    j["tau"] = sp.tau;
    j["null"] = sp.null_effect;
    return j.dump(2) + "\n";
}

ScenarioParams scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
    }
    ScenarioParams sp;
    try {
        sp.pi_a = j.at("a").get<double>();
        sp.p_x2 = j.at("x2").get<double>();
        sp.mu_x1[0] = j.at("x1").at("m").at("x2=0").get<double>();
        sp.mu_x1[1] = j.at("x1").at("m").at("x2=1").get<double>();
        sp.sd_x1[0] = j.at("x1").at("sd").at("x2=0").get<double>();
        sp.sd_x1[1] = j.at("x1").at("sd").at("x2=1").get<double>();
        read_arm_triplet(j.at("y").at("m"), sp.beta_y);
        sp.sd_y[0] = j.at("y").at("sd").at("a=0").get<double>();
        sp.sd_y[1] = j.at("y").at("sd").at("a=1").get<double>();
        read_arm_triplet(j.at("r").at("m"), sp.beta_r);
        const char* keys[3] = {"t0", "t1", "t2"};
        for (int c = 0; c < 3; ++c) {
            read_arm_triplet(j.at(keys[c]).at("m"), sp.beta_t[c]);
            sp.shape_t[c][0] = j.at(keys[c]).at("shape").at("a=0").get<double>();
            sp.shape_t[c][1] = j.at(keys[c]).at("shape").at("a=1").get<double>();
        }
        sp.tau = j.value("tau", 2.0);
        sp.null_effect = j.value("null", false);
    } catch (const json::out_of_range& e) {
        throw SchemaError(std::string("scenario: missing field: ") + e.what());
    } catch (const json::type_error& e) {
        throw SchemaError(std::string("scenario: wrong field type: ") + e.what());
    }
    if (!(sp.pi_a > 0.0 && sp.pi_a < 1.0) || !(sp.p_x2 >= 0.0 && sp.p_x2 <= 1.0) ||
        !(sp.tau > 0.0))
        throw ValidationError("scenario: probabilities or tau out of range");
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 2; ++a)
            if (!(sp.shape_t[c][a] > 0.0))
                throw ValidationError("scenario: Weibull shapes must be positive");
    for (int a = 0; a < 2; ++a)
        if (!(sp.sd_y[a] > 0.0) || !(sp.sd_x1[a] > 0.0))
            throw ValidationError("scenario: standard deviations must be positive");
    return sp;
}

double x1_marginal_mean(const ScenarioParams& sp) {
    return sp.mu_x1[0] * (1.0 - sp.p_x2) + sp.mu_x1[1] * sp.p_x2;
}

namespace {

struct LatentDraw {
    int a;
    double x1, x2, y0, t0, t1, t2;
    bool r_tau;
};

// One subject's latent variables, in a fixed draw order so streams are
// reproducible.  The parameter arm is forced to 0 when null_effect is set.
LatentDraw draw_latent(const ScenarioParams& sp, double mean_x1, RandomSource& rng,
                       bool need_cens) {
    LatentDraw L;
    L.a = rng.bernoulli(sp.pi_a) ? 1 : 0;
    const int x2i = rng.bernoulli(sp.p_x2) ? 1 : 0;
    L.x2 = x2i;
    L.x1 = rng.normal(sp.mu_x1[x2i], sp.sd_x1[x2i]);
    const int ap = (sp.null_effect && L.a == 1) ? 0 : L.a;
    const double x[3] = {1.0, L.x1 - mean_x1, L.x2};
    auto lin = [&](const double b[3]) { return b[0] * x[0] + b[1] * x[1] + b[2] * x[2]; };
    L.y0 = rng.normal(lin(sp.beta_y[ap]), sp.sd_y[ap]);
    auto wdraw = [&](int cause) {
        const double shape = sp.shape_t[cause][ap];
        return rng.weibull(shape, std::exp(-lin(sp.beta_t[cause][ap]) / shape));
    };
    L.t0 = need_cens ? wdraw(0) : 0.0;
    L.t1 = wdraw(1);
    L.t2 = wdraw(2);
    L.r_tau = need_cens ? rng.bernoulli(1.0 / (1.0 + std::exp(-lin(sp.beta_r[ap])))) : true;
    return L;
}

} // namespace

Dataset simulate_dataset(const ScenarioParams& sp, std::size_t n, RandomSource& rng) {
    const double mean_x1 = x1_marginal_mean(sp);
    Dataset d;
    d.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LatentDraw L = draw_latent(sp, mean_x1, rng, true);
        SubjectRecord rec;
        rec.a = L.a;
        rec.x1 = L.x1;
        rec.x2 = L.x2;
        const double failure = std::min(L.t1, L.t2);
        rec.time = std::min(L.t0, failure);
        // first minimum wins on (measure-zero) ties, censoring first
        rec.status = (L.t0 <= L.t1 && L.t0 <= L.t2) ? 0 : (L.t1 <= L.t2 ? 1 : 2);
        const bool y_missing = (failure < sp.tau) || (!L.r_tau && rec.time < sp.tau);
        if (!y_missing) rec.y = L.y0;
        rec.r = y_missing ? 0 : 1;
        d.records.push_back(rec);
    }
    return d;
}

TruthEstimate truth_oracle(const ScenarioParams& sp, std::size_t reps, RandomSource& rng) {
    const double mean_x1 = x1_marginal_mean(sp);
    double cnt[2] = {0, 0}, ev[2] = {0, 0};
    double surv[2] = {0, 0}, sy[2] = {0, 0}, syy[2] = {0, 0};
    for (std::size_t i = 0; i < reps; ++i) {
        const LatentDraw L = draw_latent(sp, mean_x1, rng, false);
        const double tstar = std::min(L.t1, L.t2);
        cnt[L.a] += 1.0;
        if (tstar <= sp.tau) {
            ev[L.a] += 1.0;
        } else {
            surv[L.a] += 1.0;
            sy[L.a] += L.y0;
            syy[L.a] += L.y0 * L.y0;
        }
    }
    TruthEstimate t;
    double se_y[2], se_t[2];
    for (int a = 0; a < 2; ++a) {
        if (surv[a] < 2.0 || cnt[a] < 2.0)
            throw InsufficientData("truth_oracle: too few survivors in arm " + std::to_string(a));
        t.theta_t[a] = ev[a] / cnt[a];
        t.theta_y[a] = sy[a] / surv[a];
        const double vy = (syy[a] - surv[a] * t.theta_y[a] * t.theta_y[a]) / (surv[a] - 1.0);
        se_y[a] = std::sqrt(vy / surv[a]);
        se_t[a] = std::sqrt(t.theta_t[a] * (1.0 - t.theta_t[a]) / cnt[a]);
    }
    t.psi_y = t.theta_y[1] - t.theta_y[0];
    t.psi_t = t.theta_t[0] - t.theta_t[1];
    t.se_psi_y = std::sqrt(se_y[0] * se_y[0] + se_y[1] * se_y[1]);
    t.se_psi_t = std::sqrt(se_t[0] * se_t[0] + se_t[1] * se_t[1]);
    return t;
}

namespace {

// Everything one replication contributes to the aggregates, stored per
// replication index so the summary does not depend on worker scheduling.
struct RepOutcome {
    bool attempted = false;
    bool ok = false;
    double est[2][2], se[2][2];     // [method][parameter]
    bool cover[2][2];
    bool p_int[2], p_y[2], p_t[2];  // marginal signed Wald rejections
    bool closed_y[2], closed_t[2];
    bool holm_y[2], holm_t[2];
};

RepOutcome run_one(const ReplicationConfig& config, const TestConfig& tc, RandomSource rng) {
    RepOutcome o;
    const Dataset d = simulate_dataset(config.scenario, config.n, rng);
    const EstimatePair pair = estimate_truncatedscore_both(d, LandmarkSpec{config.scenario.tau});
    const double truth[2] = {config.truth_psi_y, config.truth_psi_t};
    const EstimationResult* res[2] = {&pair.naive, &pair.adjusted};
    for (int m = 0; m < 2; ++m) {
        const ParameterEstimate* par[2] = {&res[m]->psi_y, &res[m]->psi_t};
        for (int p = 0; p < 2; ++p) {
            o.est[m][p] = par[p]->estimate;
            o.se[m][p] = par[p]->se;
            o.cover[m][p] = par[p]->ci_low <= truth[p] && truth[p] <= par[p]->ci_high;
        }
        const ClosedTestReport rep = closed_test(*res[m], tc);
        o.p_int[m] = rep.intersection.p_value <= tc.alpha;
        o.p_y[m] = rep.single_y.p_value <= tc.alpha;
        o.p_t[m] = rep.single_t.p_value <= tc.alpha;
        o.closed_y[m] = rep.reject_y;
        o.closed_t[m] = rep.reject_t;
        o.holm_y[m] = rep.comparator.reject_y;
        o.holm_t[m] = rep.comparator.reject_t;
    }
    o.ok = true;
    return o;
}

} // namespace

ReplicationResult replicate_study(const ReplicationConfig& config, std::uint64_t seed,
                                  const std::atomic<bool>* stop) {
    if (config.reps == 0) throw ValidationError("replicate_study: reps must be >= 1");
    if (config.n == 0) throw ValidationError("replicate_study: n must be >= 1");
    TestConfig tc;
    tc.alpha = config.alpha;
    tc.delta_y = config.delta_y;
    tc.delta_t = config.delta_t;
    validate(tc);

    const RandomSource root(seed);
    std::vector<RepOutcome> outcomes(config.reps);
    auto worker = [&](std::size_t first, std::size_t step) {
        for (std::size_t i = first; i < config.reps; i += step) {
            if (stop && stop->load(std::memory_order_relaxed)) return;
            try {
                outcomes[i] = run_one(config, tc, root.child(i));
            } catch (const std::runtime_error&) {
                outcomes[i].ok = false;
            }
            outcomes[i].attempted = true;
        }
    };
    const int threads = std::max(config.threads, 1);
    if (threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
        for (std::thread& t : pool) t.join();
    }

    ReplicationResult res;
    res.reps_requested = config.reps;
    res.truth_psi_y = config.truth_psi_y;
    res.truth_psi_t = config.truth_psi_t;
    for (const RepOutcome& o : outcomes)
        if (o.attempted) {
            ++res.reps_done;
            if (!o.ok) ++res.reps_failed;
        }
    if (100 * res.reps_failed > res.reps_done)
        throw NonConvergence("replicate_study: " + std::to_string(res.reps_failed) + " of " +
                             std::to_string(res.reps_done) + " replications failed (> 1%)");
    const double ok = static_cast<double>(res.reps_done - res.reps_failed);
    if (ok < 2.0) throw InsufficientData("replicate_study: fewer than 2 usable replications");

    const double truth[2] = {config.truth_psi_y, config.truth_psi_t};
    for (int m = 0; m < 2; ++m)
        for (int p = 0; p < 2; ++p) {
            double s = 0.0, s_se = 0.0, s_cov = 0.0;
            for (const RepOutcome& o : outcomes)
                if (o.ok) {
                    s += o.est[m][p];
                    s_se += o.se[m][p];
                    s_cov += o.cover[m][p] ? 1.0 : 0.0;
                }
            ReplicationResult::Row& row = res.rows[m][p];
            row.mean = s / ok;
            row.bias = row.mean - truth[p];
            row.mean_se = s_se / ok;
            row.coverage = s_cov / ok;
            double ss = 0.0;
            for (const RepOutcome& o : outcomes)
                if (o.ok) ss += (o.est[m][p] - row.mean) * (o.est[m][p] - row.mean);
            row.sd = std::sqrt(ss / (ok - 1.0));
            row.se_over_sd = row.mean_se / row.sd;
        }
    for (int p = 0; p < 2; ++p) {
        res.rows[0][p].rel_eff = 1.0;
        res.rows[0][p].rel_eff_var = 1.0;
        const double ratio = res.rows[1][p].sd / res.rows[0][p].sd;
        res.rows[1][p].rel_eff = ratio;
        res.rows[1][p].rel_eff_var = ratio * ratio;
    }
    for (int m = 0; m < 2; ++m) {
        double n_int = 0, n_y = 0, n_t = 0, c_y = 0, c_t = 0, c_b = 0, h_y = 0, h_t = 0,
               h_b = 0;
        for (const RepOutcome& o : outcomes)
            if (o.ok) {
                n_int += o.p_int[m];
                n_y += o.p_y[m];
                n_t += o.p_t[m];
                c_y += o.closed_y[m];
                c_t += o.closed_t[m];
                c_b += o.closed_y[m] && o.closed_t[m];
                h_y += o.holm_y[m];
                h_t += o.holm_t[m];
                h_b += o.holm_y[m] && o.holm_t[m];
            }
        ReplicationResult::Tests& te = res.tests[m];
        te.p_int = n_int / ok;
        te.p_y = n_y / ok;
        te.p_t = n_t / ok;
        te.closed_y = c_y / ok;
        te.closed_t = c_t / ok;
        te.closed_both = c_b / ok;
        te.holm_y = h_y / ok;
        te.holm_t = h_t / ok;
        te.holm_both = h_b / ok;
    }
    return res;
}

namespace {

const char* kMethodName[2] = {"naive", "adjusted"};
const char* kParamName[2] = {"psi_y", "psi_t"};

std::string format_row(std::initializer_list<double> vals) {
    std::string out;
    char buf[32];
    for (double v : vals) {
        std::snprintf(buf, sizeof(buf), ",%.6f", v);
        out += buf;
    }
    return out;
}

} // namespace

std::string summary_csv(const ReplicationResult& res) {
    std::string out = "estimator,parameter,mean,bias,se,sd,se_over_sd,coverage,rel_eff,"
                      "rel_eff_var\n";
    for (int p = 0; p < 2; ++p)
        for (int m = 0; m < 2; ++m) {
            const ReplicationResult::Row& r = res.rows[m][p];
            out += std::string(kMethodName[m]) + "," + kParamName[p] +
                   format_row({r.mean, r.bias, r.mean_se, r.sd, r.se_over_sd, r.coverage,
                               r.rel_eff, r.rel_eff_var}) +
                   "\n";
        }
    return out;
}

std::string power_csv(const ReplicationResult& res) {
    std::string out = "estimator,proposed_y,proposed_t,proposed_both,holm_y,holm_t,"
                      "holm_both\n";
    for (int m = 1; m >= 0; --m) {
        const ReplicationResult::Tests& t = res.tests[m];
        out += std::string(kMethodName[m]) +
               format_row({t.closed_y, t.closed_t, t.closed_both, t.holm_y, t.holm_t,
                           t.holm_both}) +
               "\n";
    }
    return out;
}

std::string type1_csv(const ReplicationResult& res) {
    std::string out = "estimator,intersection,single_y,single_t\n";
    for (int m = 1; m >= 0; --m) {
        const ReplicationResult::Tests& t = res.tests[m];
        out += std::string(kMethodName[m]) + format_row({t.p_int, t.p_y, t.p_t}) + "\n";
    }
    return out;
}

} // namespace truncscore
