#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "starris/error.hpp"
#include "starris/montecarlo.hpp"
#include "starris/oracle.hpp"
#include "starris/rates.hpp"
#include "starris/sweep.hpp"
#include "starris/validate.hpp"

using namespace starris;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, failed = 1, config_error = 2, numerical_error = 3 };

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

SystemConfig read_config(const std::string& path) {
    return path.empty() ? SystemConfig{} : load_config(path);
}

// JSON has no infinities; -inf logs become null
ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

double rel_delta(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

int cmd_analyze(const std::string& config_path, const std::string& engines_arg,
                std::uint64_t trials, std::uint64_t seed) {
    const SystemConfig cfg = read_config(config_path);
    std::vector<Engine> engines;
    for (const auto& e : split(engines_arg)) engines.push_back(parse_engine(e));
    const ClosedFormParams p = closed_form_params(cfg);

    ojson out;
    out["config"] = config_to_json(cfg);
    out["params"] = {{"k_p", p.k_p},         {"k_s", p.k_s},       {"k_p_real", p.k_p_real},
                     {"k_s_real", p.k_s_real}, {"theta_p", p.theta_p}, {"theta_s", p.theta_s},
                     {"L_p", p.L_p},         {"L_s", p.L_s},       {"tau1", p.tau1},
                     {"psi", p.psi},         {"zeta1", p.zeta1},   {"zeta2", num(p.zeta2)},
                     {"tau2", p.tau2}};
    bool have_closed = false, have_quad = false;
    RateBreakdown cf;
    QuadBreakdown q;
    for (Engine e : engines) {
        switch (e) {
            case Engine::closed:
                cf = er_total(p);
                have_closed = true;
                out["closed"] = {{"er1", cf.er1},        {"er2", cf.er2},
                                 {"er3", cf.er3},        {"er_total", cf.er_total},
                                 {"p_out", cf.p_out},    {"r_out", cf.r_out},
                                 {"ln_er1", num(cf.ln_er1)}, {"ln_er2", num(cf.ln_er2)},
                                 {"ln_er3", num(cf.ln_er3)}, {"ln_success", num(cf.ln_success)},
                                 {"er2_route", cf.er2_route}};
                break;
            case Engine::quad:
                q = evaluate_quad(p, {}, ShapeMode::integer);
                have_quad = true;
                out["quad"] = {{"er1", q.er1.value},           {"er2", q.er2.value},
                               {"er3", q.er3.value},           {"er_total", q.er_total},
                               {"p_out", q.outage.p_out},      {"r_out", q.r_out},
                               {"ln_er1", num(q.er1.ln_value)}, {"ln_er2", num(q.er2.ln_value)},
                               {"ln_er3", num(q.er3.ln_value)}, {"ln_success", num(q.outage.ln_success)},
                               {"shapes", "integer"}};
                break;
            case Engine::mc: {
                const McReport m = run_mc(cfg, trials, seed, FadingMode::exact);
                out["mc"] = {{"trials", m.trials},
                             {"seed", m.seed},
                             {"rng", m.rng},
                             {"mode", to_string(m.mode)},
                             {"er1", m.er1},
                             {"er2", m.er2},
                             {"er3", m.er3},
                             {"er_total", m.er_total},
                             {"se_er", m.se_er},
                             {"p_out_strict", m.p_out_strict},
                             {"p_out_caseIII", m.p_out_caseIII},
                             {"r_out", m.r_out},
                             {"case_freqs", m.case_freqs}};
                break;
            }
        }
    }
    if (have_closed && have_quad) {
        auto gap = [](double la, double lb) {
            if (la == lb) return 0.0;
            return std::fabs(la - lb);
        };
        out["closed_vs_quad"] = {{"er1_rel", gap(cf.ln_er1, q.er1.ln_value)},
                                 {"er2_rel", gap(cf.ln_er2, q.er2.ln_value)},
                                 {"er3_rel", gap(cf.ln_er3, q.er3.ln_value)},
                                 {"er_total_rel", rel_delta(cf.er_total, q.er_total)},
                                 {"p_out_abs", std::fabs(cf.p_out - q.outage.p_out)}};
    }
    std::cout << out.dump(2) << '\n';
    return ok;
}

struct SweepArgs {
    std::string config, var = "alpha", grid, betas = "0.3", engines = "closed",
                        metrics = "er_total,r_out,p_out,case_freqs", out;
    std::uint64_t trials = 1000000, seed = 1;
    unsigned threads = 0;
};

int cmd_sweep(const SweepArgs& a) {
    const SystemConfig cfg = read_config(a.config);
    SweepSpec spec;
    spec.variable = parse_variable(a.var);
    spec.grid = parse_grid(a.grid);
    spec.betas.clear();
    for (const auto& b : split(a.betas)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(b, &used);
        } catch (const std::exception&) {
        }
        if (used == 0 || used != b.size()) throw ConfigError("cannot parse beta '" + b + "'");
        spec.betas.push_back(v);
    }
    spec.engines.clear();
    for (const auto& e : split(a.engines)) spec.engines.push_back(parse_engine(e));
    spec.metrics.clear();
    for (const auto& m : split(a.metrics)) spec.metrics.push_back(parse_metric(m));
    spec.mc_trials = a.trials;
    spec.seed = a.seed;
    spec.validate();
    const std::string text = sweep_csv(cfg, spec, run_sweep(cfg, spec, a.threads));
    if (a.out.empty() || a.out == "-") {
        std::cout << text;
    } else {
        std::ofstream f(a.out, std::ios::binary);
        if (!f) throw ConfigError("cannot open '" + a.out + "' for writing");
        f << text;
    }
    return ok;
}

int cmd_validate(const std::string& config_path, const std::string& level) {
    const SystemConfig cfg = read_config(config_path);
    const ValidationReport rep = run_validation(cfg, parse_level(level), {}, [](const CriterionResult& r) {
        std::cout << format_result(r) << std::endl;
    });
    std::cout << (rep.passed() ? "validate: all criteria passed" : "validate: FAILED") << '\n';
    return rep.passed() ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS cognitive-radio RSMA uplink rate analysis"};
    app.require_subcommand(1);

    std::string analyze_config, analyze_engines = "closed,quad";
    std::uint64_t analyze_trials = 100000, analyze_seed = 1;
    auto* analyze = app.add_subcommand("analyze", "evaluate one configuration");
    analyze->add_option("--config", analyze_config, "JSON config (defaults if omitted)");
    analyze->add_option("--engines", analyze_engines, "comma list of closed,quad,mc");
    analyze->add_option("--trials", analyze_trials, "Monte Carlo trials");
    analyze->add_option("--seed", analyze_seed, "Monte Carlo seed");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
    sweep->add_option("--config", sw.config, "JSON config (defaults if omitted)");
    sweep->add_option("--var", sw.var, "alpha | gamma | omega")->required();
    sweep->add_option("--grid", sw.grid, "a:b:step")->required();
    sweep->add_option("--betas", sw.betas, "comma list of beta values");
    sweep->add_option("--engines", sw.engines, "comma list of closed,quad,mc");
    sweep->add_option("--metrics", sw.metrics, "comma list of er_total,er1,er2,er3,r_out,p_out,case_freqs");
    sweep->add_option("--trials", sw.trials, "Monte Carlo trials per point");
    sweep->add_option("--seed", sw.seed, "base seed");
    sweep->add_option("--threads", sw.threads, "worker threads (0 = all cores)");
    sweep->add_option("--out", sw.out, "output CSV (stdout if omitted)");

    std::string validate_config, validate_level = "fast";
    auto* validate = app.add_subcommand("validate", "run the acceptance criteria");
    validate->add_option("--config", validate_config, "JSON config (defaults if omitted)");
    validate->add_option("--level", validate_level, "fast | full")
        ->check(CLI::IsMember({"fast", "full"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_config, analyze_engines, analyze_trials, analyze_seed);
        if (*sweep) return cmd_sweep(sw);
        if (*validate) return cmd_validate(validate_config, validate_level);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical_error;
    }
    return ok;
}
