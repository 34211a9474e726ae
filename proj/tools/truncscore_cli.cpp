#include <atomic>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "truncscore/data.hpp"
#include "truncscore/errors.hpp"
#include "truncscore/estimators.hpp"
#include "truncscore/report.hpp"
#include "truncscore/simulation.hpp"
#include "truncscore/testing.hpp"

namespace {

using namespace truncscore;
using nlohmann::json;

std::atomic<bool> g_stop{false};
int g_exit = 0;

void handle_interrupt(int) { g_stop.store(true); }

// Built-in scenario name first, then a JSON parameter file.
ScenarioParams resolve_scenario(const std::string& name, bool null_effect) {
    ScenarioParams sp;
    try {
        sp = builtin_scenario(name);
    } catch (const std::invalid_argument&) {
        std::ifstream in(name, std::ios::binary);
        if (!in) throw ValidationError("scenario is neither built-in nor a readable file: " + name);
        std::ostringstream ss;
        ss << in.rdbuf();
        sp = scenario_from_json(ss.str());
    }
    if (null_effect) sp.null_effect = true;
    return sp;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << text;
    if (!out.good()) throw ValidationError("failed while writing: " + path);
}

void add_schema_options(CLI::App* cmd, CsvSchema& schema) {
    cmd->add_option("--col-a", schema.a, "Treatment-arm column name");
    cmd->add_option("--col-x1", schema.x1, "Continuous covariate column name");
    cmd->add_option("--col-x2", schema.x2, "Binary covariate column name");
    cmd->add_option("--col-y", schema.y, "Score column name");
    cmd->add_option("--col-time", schema.time, "Follow-up time column name");
    cmd->add_option("--col-r", schema.r, "Score-availability column name");
    cmd->add_option("--col-status", schema.status, "Event-status column name");
}

Method parse_method(const std::string& m) {
    return m == "naive" ? Method::naive : Method::adjusted;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Landmark survival and score-among-survivors estimation toolkit"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "Worker threads for replication campaigns")
        ->envname("TRUNCSCORE_THREADS")
        ->check(CLI::Range(1, 1024));

    // ---- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Draw a synthetic trial dataset and write CSV");
    struct {
        std::string scenario = "table1";
        std::size_t n = 0;
        std::uint64_t seed = 0;
        bool null_effect = false;
        std::string out;
    } sim_cfg;
    sim->add_option("--scenario", sim_cfg.scenario,
                    "Built-in name (table1, table5, table1-null) or JSON parameter file");
    sim->add_option("--n", sim_cfg.n, "Number of subjects")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_cfg.seed, "Random seed")->required();
    sim->add_flag("--null", sim_cfg.null_effect, "Generate arm 1 from arm-0 parameters");
    sim->add_option("--out", sim_cfg.out, "Output CSV path")->required();
    sim->callback([&] {
        const ScenarioParams sp = resolve_scenario(sim_cfg.scenario, sim_cfg.null_effect);
        RandomSource rng(sim_cfg.seed);
        const Dataset d = simulate_dataset(sp, sim_cfg.n, rng);
        write_csv_file(sim_cfg.out, d);
        std::size_t arm1 = 0;
        for (const SubjectRecord& rec : d.records) arm1 += rec.a;
        std::printf("wrote %s: %zu rows (arm 0: %zu, arm 1: %zu)\n", sim_cfg.out.c_str(), d.n(),
                    d.n() - arm1, arm1);
    });

    // ---- estimate ----------------------------------------------------------
    auto* est_cmd = app.add_subcommand("estimate", "Estimate landmark parameters from a CSV");
    struct {
        std::string data;
        double tau = 2.0;
        std::string method = "adjusted";
        std::string out;
        CsvSchema schema;
    } est_cfg;
    est_cmd->add_option("--data", est_cfg.data, "Input CSV path")->required();
    est_cmd->add_option("--tau", est_cfg.tau, "Landmark time")->check(CLI::PositiveNumber);
    est_cmd->add_option("--method", est_cfg.method, "naive, adjusted or both")
        ->check(CLI::IsMember({"naive", "adjusted", "both"}));
    est_cmd->add_option("--out", est_cfg.out, "Structured JSON output path");
    add_schema_options(est_cmd, est_cfg.schema);
    est_cmd->callback([&] {
        const Dataset d = read_csv_file(est_cfg.data, est_cfg.schema);
        const LandmarkSpec lm{est_cfg.tau};
        std::string text, structured;
        if (est_cfg.method == "both") {
            const EstimatePair pair = estimate_truncatedscore_both(d, lm);
            text = "== naive ==\n-- Parameter estimates --\n" + render_estimate_table(pair.naive) +
                   "\n== adjusted ==\n-- Parameter estimates --\n" +
                   render_estimate_table(pair.adjusted);
            json j;
            j["naive"] = json::parse(structured_estimate_json(pair.naive));
            j["adjusted"] = json::parse(structured_estimate_json(pair.adjusted));
            structured = j.dump(2) + "\n";
        } else {
            const EstimationResult est =
                estimate_truncatedscore(d, lm, parse_method(est_cfg.method));
            text = "-- Parameter estimates --\n" + render_estimate_table(est);
            structured = structured_estimate_json(est);
        }
        std::fputs(text.c_str(), stdout);
        if (!est_cfg.out.empty()) write_file(est_cfg.out, structured);
    });

    // ---- test --------------------------------------------------------------
    auto* test_cmd = app.add_subcommand("test", "Closed testing of the two one-sided hypotheses");
    struct {
        std::string data;
        double tau = 2.0;
        std::string method = "adjusted";
        double alpha = 0.025;
        double delta_y = 0.0;
        double delta_t = 0.05;
        std::string out;
        CsvSchema schema;
    } test_cfg;
    test_cmd->add_option("--data", test_cfg.data, "Input CSV path")->required();
    test_cmd->add_option("--tau", test_cfg.tau, "Landmark time")->check(CLI::PositiveNumber);
    test_cmd->add_option("--method", test_cfg.method, "naive, adjusted or both")
        ->check(CLI::IsMember({"naive", "adjusted", "both"}));
    test_cmd->add_option("--alpha", test_cfg.alpha, "One-sided level");
    test_cmd->add_option("--delta-y", test_cfg.delta_y, "Margin for the score hypothesis");
    test_cmd->add_option("--delta-t", test_cfg.delta_t, "Margin for the risk hypothesis");
    test_cmd->add_option("--out", test_cfg.out, "Structured JSON output path");
    add_schema_options(test_cmd, test_cfg.schema);
    test_cmd->callback([&] {
        const Dataset d = read_csv_file(test_cfg.data, test_cfg.schema);
        const LandmarkSpec lm{test_cfg.tau};
        const TestConfig cfg{test_cfg.alpha, test_cfg.delta_y, test_cfg.delta_t};
        std::string text, structured;
        if (test_cfg.method == "both") {
            const EstimatePair pair = estimate_truncatedscore_both(d, lm);
            const ClosedTestReport rn = closed_test(pair.naive, cfg);
            const ClosedTestReport ra = closed_test(pair.adjusted, cfg);
            text = "== naive ==\n" + render_summary(pair.naive, rn, cfg) + "\n== adjusted ==\n" +
                   render_summary(pair.adjusted, ra, cfg);
            json j;
            j["naive"] = json::parse(structured_test_json(pair.naive, rn, cfg));
            j["adjusted"] = json::parse(structured_test_json(pair.adjusted, ra, cfg));
            structured = j.dump(2) + "\n";
        } else {
            const EstimationResult est =
                estimate_truncatedscore(d, lm, parse_method(test_cfg.method));
            const ClosedTestReport rep = closed_test(est, cfg);
            text = render_summary(est, rep, cfg);
            structured = structured_test_json(est, rep, cfg);
        }
        std::fputs(text.c_str(), stdout);
        if (!test_cfg.out.empty()) write_file(test_cfg.out, structured);
    });

    // ---- replicate ---------------------------------------------------------
    auto* rep_cmd = app.add_subcommand("replicate", "Run a simulation campaign and write tables");
    struct {
        std::string scenario = "table1";
        std::size_t n = 0;
        std::size_t reps = 0;
        std::uint64_t seed = 0;
        bool null_effect = false;
        double alpha = 0.025;
        double delta_y = 0.0;
        double delta_t = 0.0;
        double truth_y = 0.0, truth_t = 0.0;
        std::size_t truth_reps = 2000000;
        std::string out_summary = "summary.csv";
        std::string out_power = "power.csv";
        std::string out_type1 = "type1.csv";
    } rep_cfg;
    rep_cmd->add_option("--scenario", rep_cfg.scenario,
                        "Built-in name (table1, table5, table1-null) or JSON parameter file");
    rep_cmd->add_option("--n", rep_cfg.n, "Subjects per replication")
        ->required()
        ->check(CLI::PositiveNumber);
    rep_cmd->add_option("--reps", rep_cfg.reps, "Number of replications")
        ->required()
        ->check(CLI::PositiveNumber);
    rep_cmd->add_option("--seed", rep_cfg.seed, "Random seed")->required();
    rep_cmd->add_flag("--null", rep_cfg.null_effect, "Generate arm 1 from arm-0 parameters");
    rep_cmd->add_option("--alpha", rep_cfg.alpha, "One-sided level");
    rep_cmd->add_option("--delta-y", rep_cfg.delta_y,
                        "Margin for the score hypothesis (0 in the benchmark tables)");
    rep_cmd->add_option("--delta-t", rep_cfg.delta_t,
                        "Margin for the risk hypothesis (0 in the benchmark tables)");
    auto* opt_ty = rep_cmd->add_option("--truth-y", rep_cfg.truth_y,
                                       "True score contrast (default: Monte Carlo oracle)");
    auto* opt_tt = rep_cmd->add_option("--truth-t", rep_cfg.truth_t,
                                       "True risk contrast (default: Monte Carlo oracle)");
    rep_cmd->add_option("--truth-reps", rep_cfg.truth_reps, "Oracle draws when truth not given")
        ->check(CLI::PositiveNumber);
    rep_cmd->add_option("--out-summary", rep_cfg.out_summary, "Estimation summary CSV path");
    rep_cmd->add_option("--out-power", rep_cfg.out_power, "Power CSV path");
    rep_cmd->add_option("--out-type1", rep_cfg.out_type1, "Marginal rejection-rate CSV path");
    rep_cmd->callback([&] {
        ReplicationConfig rc;
        rc.scenario = resolve_scenario(rep_cfg.scenario, rep_cfg.null_effect);
        rc.n = rep_cfg.n;
        rc.reps = rep_cfg.reps;
        rc.alpha = rep_cfg.alpha;
        rc.delta_y = rep_cfg.delta_y;
        rc.delta_t = rep_cfg.delta_t;
        rc.threads = threads;
        rc.truth_psi_y = rep_cfg.truth_y;
        rc.truth_psi_t = rep_cfg.truth_t;
        if (opt_ty->count() == 0 || opt_tt->count() == 0) {
            // Oracle stream disjoint from the replication children (index 2^32).
            RandomSource trng = RandomSource(rep_cfg.seed).child(std::uint64_t(1) << 32);
            const TruthEstimate tr = truth_oracle(rc.scenario, rep_cfg.truth_reps, trng);
            if (opt_ty->count() == 0) rc.truth_psi_y = tr.psi_y;
            if (opt_tt->count() == 0) rc.truth_psi_t = tr.psi_t;
        }
        std::signal(SIGINT, handle_interrupt);
        const ReplicationResult res = replicate_study(rc, rep_cfg.seed, &g_stop);
        std::signal(SIGINT, SIG_DFL);
        write_file(rep_cfg.out_summary, summary_csv(res));
        write_file(rep_cfg.out_power, power_csv(res));
        write_file(rep_cfg.out_type1, type1_csv(res));
        std::printf("truth: psi_y = %.6f, psi_t = %.6f\n", rc.truth_psi_y, rc.truth_psi_t);
        std::printf("replications: %zu requested, %zu completed, %zu failed\n",
                    res.reps_requested, res.reps_done, res.reps_failed);
        std::printf("wrote %s, %s, %s\n", rep_cfg.out_summary.c_str(), rep_cfg.out_power.c_str(),
                    rep_cfg.out_type1.c_str());
        if (res.reps_done < res.reps_requested) {
            std::fprintf(stderr, "interrupted: partial campaign results written\n");
            g_exit = 130;
        }
    });

    // ---- curves ------------------------------------------------------------
    auto* cur_cmd = app.add_subcommand("curves", "Critical-value and power-comparison curves");
    struct {
        std::vector<double> rhos;
        double alpha = 0.025;
        double target = 0.8;
        std::size_t reps = 200000;
        std::uint64_t seed = 0;
        std::string out_critical = "critical.csv";
        std::string out_conj = "conjunctive.csv";
        std::string out_disj = "disjunctive.csv";
    } cur_cfg;
    cur_cmd->add_option("--rho", cur_cfg.rhos, "Correlation grid points in (-1, 1)")
        ->required()
        ->check(CLI::Range(-0.999999999, 0.999999999));
    cur_cmd->add_option("--alpha", cur_cfg.alpha, "One-sided level");
    cur_cmd->add_option("--target", cur_cfg.target, "Calibrated Bonferroni-Holm power");
    cur_cmd->add_option("--reps", cur_cfg.reps, "Monte Carlo draws per grid point")
        ->check(CLI::Range(std::size_t(100000), std::size_t(1) << 40));
    cur_cmd->add_option("--seed", cur_cfg.seed, "Random seed")->required();
    cur_cmd->add_option("--out-critical", cur_cfg.out_critical, "Critical-value CSV path");
    cur_cmd->add_option("--out-conjunctive", cur_cfg.out_conj, "Conjunctive power CSV path");
    cur_cmd->add_option("--out-disjunctive", cur_cfg.out_disj, "Disjunctive power CSV path");
    cur_cmd->callback([&] {
        const RandomSource root(cur_cfg.seed);
        write_file(cur_cfg.out_critical, critical_value_csv(cur_cfg.rhos, cur_cfg.alpha));
        write_file(cur_cfg.out_conj,
                   power_curve_csv(cur_cfg.rhos, cur_cfg.alpha, PowerMode::conjunctive,
                                   cur_cfg.target, cur_cfg.reps, root.child(1)));
        write_file(cur_cfg.out_disj,
                   power_curve_csv(cur_cfg.rhos, cur_cfg.alpha, PowerMode::disjunctive,
                                   cur_cfg.target, cur_cfg.reps, root.child(2)));
        std::printf("wrote %s, %s, %s\n", cur_cfg.out_critical.c_str(), cur_cfg.out_conj.c_str(),
                    cur_cfg.out_disj.c_str());
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return g_exit;
}
