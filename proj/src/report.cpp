#include "truncscore/report.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace truncscore {

namespace {

using nlohmann::json;

// p-values below this print as "< 2.2e-16" instead of a number.
constexpr double kTinyP = 2.220446049250313e-16;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// %g rendering with a two-sided guard against "-0".
std::string fmt_g(double v) { return fmt("%g", v == 0.0 ? 0.0 : v); }

// Landmark time as it appears inside row labels: always with a decimal
// point, so tau = 2 reads "2.0".
std::string tau_label(double tau) {
    std::string s = fmt_g(tau);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

std::string pad_left(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string table_row(const std::string& label, const ParameterEstimate& p) {
    return pad_right(label, 14) + fmt(" %8.5f", p.estimate) + fmt(" %8.6f", p.se) +
           fmt(" %7.4f", p.ci_low) + fmt(" %8.5f", p.ci_high) + fmt(" %9.3e", p.p_value) + "\n";
}

std::string p_phrase(double p) {
    return p < kTinyP ? std::string("p-value < 2.2e-16") : "p-value = " + fmt("%.4g", p);
}

// One-sided test block in the classic hypothesis-test layout: definition of
// the contrast, indented title, data/alternative lines and the estimate.
std::string single_block(const std::string& name, const std::string& definition,
                         double margin, const SignedWaldResult& r, double estimate) {
    std::string m = fmt_g(margin);
    std::string value = fmt("%.7g", estimate);
    std::size_t w = value.size() > name.size() ? value.size() : name.size();
    std::string out;
    out += "\n" + name + " = " + definition + "\n";
    out += "\n\tSigned Wald Test\n\n";
    out += "data:  H0: " + name + " =< " + m + "\n";
    out += "Q = " + fmt("%.5g", r.statistic) + ", " + p_phrase(r.p_value) + "\n";
    out += "alternative hypothesis: HA: " + name + " > " + m + "\n";
    out += "sample estimates:\n";
    out += pad_left(name, w) + " \n" + pad_left(value, w) + " \n\n";
    return out;
}

std::string decision(bool reject) { return reject ? "rejected" : "not rejected"; }

json param_json(const ParameterEstimate& p) {
    return json{{"estimate", p.estimate},
                {"se", p.se},
                {"ci_low", p.ci_low},
                {"ci_high", p.ci_high},
                {"p_value", p.p_value}};
}

json estimate_json(const EstimationResult& est) {
    json j;
    j["method"] = est.method == Method::naive ? "naive" : "adjusted";
    j["tau"] = est.tau;
    j["n"] = est.n;
    j["pi1"] = est.pi1;
    j["rho"] = {est.rho[0], est.rho[1]};
    j["theta_y"] = {param_json(est.theta_y[0]), param_json(est.theta_y[1])};
    j["theta_t"] = {param_json(est.theta_t[0]), param_json(est.theta_t[1])};
    j["surv_t"] = {param_json(est.surv_t[0]), param_json(est.surv_t[1])};
    j["psi_y"] = param_json(est.psi_y);
    j["psi_t"] = param_json(est.psi_t);
    j["sigma"] = {{est.sigma(0, 0), est.sigma(0, 1)}, {est.sigma(1, 0), est.sigma(1, 1)}};
    return j;
}

} // namespace

std::string render_estimate_table(const EstimationResult& est) {
    const std::string t = tau_label(est.tau);
    std::string out;
    out += pad_right("", 14) + pad_left("Estimate", 9) + pad_left("Std.Err", 9) +
           pad_left("2.5%", 8) + pad_left("97.5%", 9) + pad_left("P-value", 10) + "\n";
    out += table_row("E(Y|T>" + t + ",A=0)", est.theta_y[0]);
    out += table_row("E(Y|T>" + t + ",A=1)", est.theta_y[1]);
    out += table_row("diff", est.psi_y);
    out += pad_right(std::string(14, '-'), 59) + "\n";
    out += table_row("P(T>" + t + "|A=0)", est.surv_t[0]);
    out += table_row("P(T>" + t + "|A=1)", est.surv_t[1]);
    out += table_row("riskdiff", est.psi_t);
    return out;
}

std::string render_summary(const EstimationResult& est, const ClosedTestReport& rep,
                           const TestConfig& cfg) {
    const std::string t = tau_label(est.tau);
    const std::string my = fmt_g(cfg.delta_y);
    const std::string mt = fmt_g(-cfg.delta_t);

    std::string out = "-- Parameter estimates --\n";
    out += render_estimate_table(est);
    out += "\n-- One-sided tests --\n";
    out += single_block("b1", "E(Y|T>" + t + ",A=1) - E(Y|T>" + t + ",A=0)", cfg.delta_y,
                        rep.single_y, est.psi_y.estimate);
    out += single_block("b2", "P(T>" + t + "|A=1) - P(T>" + t + "|A=0)", -cfg.delta_t,
                        rep.single_t, est.psi_t.estimate);
    out += "\n-- Intersection test --\n";
    out += "\n\tSigned Wald Intersection Test\n\n";
    out += "data:  \n";
    out += "Intersection null hypothesis: b =< [" + my + ", " + mt + "]\n";
    out += "w = [0.5, 0.5]\n";
    out += "Q = " + fmt("%.5g", rep.intersection.statistic) + ", " +
           p_phrase(rep.intersection.p_value) + "\n";
    out += "\n-- Decisions (alpha = " + fmt_g(cfg.alpha) + ") --\n";
    out += "closed testing:  b1 " + decision(rep.reject_y) + ", b2 " + decision(rep.reject_t) +
           "\n";
    out += "Bonferroni-Holm: b1 " + decision(rep.comparator.reject_y) + ", b2 " +
           decision(rep.comparator.reject_t) + "\n";
    return out;
}

std::string structured_estimate_json(const EstimationResult& est) {
    return estimate_json(est).dump(2) + "\n";
}

std::string structured_test_json(const EstimationResult& est, const ClosedTestReport& rep,
                                 const TestConfig& cfg) {
    json j;
    j["alpha"] = cfg.alpha;
    j["delta_y"] = cfg.delta_y;
    j["delta_t"] = cfg.delta_t;
    j["estimate"] = estimate_json(est);
    j["single_y"] = {{"z", rep.single_y.z},
                     {"statistic", rep.single_y.statistic},
                     {"p_value", rep.single_y.p_value}};
    j["single_t"] = {{"z", rep.single_t.z},
                     {"statistic", rep.single_t.statistic},
                     {"p_value", rep.single_t.p_value}};
    j["intersection"] = {{"statistic", rep.intersection.statistic},
                         {"z_y", rep.intersection.z_y},
                         {"z_t", rep.intersection.z_t},
                         {"rho_hat", rep.intersection.rho_hat},
                         {"q_hat", rep.intersection.q_hat},
                         {"p_value", rep.intersection.p_value}};
    j["closed"] = {{"reject_y", rep.reject_y}, {"reject_t", rep.reject_t}};
    j["holm"] = {{"reject_y", rep.comparator.reject_y}, {"reject_t", rep.comparator.reject_t}};
    return j.dump(2) + "\n";
}

std::string critical_value_csv(const std::vector<double>& rhos, double alpha) {
    std::string out = "rho,critical_value\n";
    for (double r : rhos) out += fmt("%.4f", r) + "," + fmt("%.8f", critical_value(r, alpha)) + "\n";
    return out;
}

std::string power_curve_csv(const std::vector<double>& rhos, double alpha, PowerMode mode,
                            double target, std::size_t reps, const RandomSource& root) {
    std::string out = "rho,r_star,power_holm,power_proposed\n";
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        RandomSource rs = root.child(i);
        PowerComparison pc = power_comparison(rhos[i], alpha, mode, target, reps, rs);
        out += fmt("%.4f", rhos[i]) + "," + fmt("%.6f", pc.r_star) + "," +
               fmt("%.6f", pc.power_holm) + "," + fmt("%.6f", pc.power_proposed) + "\n";
    }
    return out;
}

} // namespace truncscore
