#include "starris/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "starris/error.hpp"
#include "starris/montecarlo.hpp"
#include "starris/oracle.hpp"
#include "starris/rates.hpp"
#include "starris/rng.hpp"

namespace starris {

const char* to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::alpha: return "alpha";
        case SweepVariable::gamma_p_target: return "gamma_p_target";
        case SweepVariable::omega: return "omega";
    }
    return "?";
}

const char* to_string(Engine e) {
    switch (e) {
        case Engine::closed: return "closed";
        case Engine::quad: return "quad";
        case Engine::mc: return "mc";
    }
    return "?";
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::er_total: return "er_total";
        case Metric::er1: return "er1";
        case Metric::er2: return "er2";
        case Metric::er3: return "er3";
        case Metric::r_out: return "r_out";
        case Metric::p_out: return "p_out";
        case Metric::case_freqs: return "case_freqs";
    }
    return "?";
}

SweepVariable parse_variable(const std::string& s) {
    if (s == "alpha") return SweepVariable::alpha;
    if (s == "gamma" || s == "gamma_p_target") return SweepVariable::gamma_p_target;
    if (s == "omega") return SweepVariable::omega;
    throw ConfigError("unknown sweep variable '" + s + "'");
}

Engine parse_engine(const std::string& s) {
    if (s == "closed") return Engine::closed;
    if (s == "quad") return Engine::quad;
    if (s == "mc") return Engine::mc;
    throw ConfigError("unknown engine '" + s + "'");
}

Metric parse_metric(const std::string& s) {
    for (Metric m : {Metric::er_total, Metric::er1, Metric::er2, Metric::er3, Metric::r_out,
                     Metric::p_out, Metric::case_freqs})
        if (s == to_string(m)) return m;
    throw ConfigError("unknown metric '" + s + "'");
}

namespace {

double snap(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

}  // namespace

std::vector<double> make_grid(double a, double b, double step) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(step > 0.0) || !std::isfinite(step))
        throw ConfigError("grid: need finite a, b and a positive step");
    if (b < a) throw ConfigError("grid: end is below start");
    const double span = (b - a) / step;
    const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (n > 1000000) throw ConfigError("grid: too many points");
    std::vector<double> g;
    g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.push_back(snap(a + static_cast<double>(i) * step));
    return g;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ConfigError("grid: cannot parse '" + s + "'");
        parts.push_back(v);
    }
    if (parts.size() != 3) throw ConfigError("grid: expected a:b:step, got '" + s + "'");
    return make_grid(parts[0], parts[1], parts[2]);
}

void SweepSpec::validate() const {
    if (grid.empty()) throw ConfigError("sweep: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError("sweep: grid must be strictly increasing");
    for (double v : grid) {
        const bool ok = variable == SweepVariable::alpha            ? (v >= 0.0 && v <= 1.0)
                        : variable == SweepVariable::gamma_p_target ? (v >= 0.0 && std::isfinite(v))
                                                                    : (v > 0.0 && v < 1.0);
        if (!ok) throw ConfigError("sweep: grid value outside the domain of " +
                                   std::string(to_string(variable)));
    }
    if (betas.empty()) throw ConfigError("sweep: empty beta list");
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("sweep: beta values must lie in (0, 1)");
    if (metrics.empty()) throw ConfigError("sweep: no metrics");
    if (engines.empty()) throw ConfigError("sweep: no engines");
    if (mc_trials < 1) throw ConfigError("sweep: mc_trials must be >= 1");
}

SystemConfig point_config(const SystemConfig& base, SweepVariable var, double value, double beta) {
    SystemConfig c = base;
    c.beta = beta;
    switch (var) {
        case SweepVariable::alpha: c.alpha = value; break;
        case SweepVariable::gamma_p_target: c.gamma_p_target = value; break;
        case SweepVariable::omega: c.omega = value; break;
    }
    c.validate();
    return c;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t beta_index, std::size_t grid_index) {
    std::uint64_t st = seed;
    std::uint64_t h = splitmix64(st);
    st = h ^ (static_cast<std::uint64_t>(beta_index) << 32) ^ static_cast<std::uint64_t>(grid_index);
    return splitmix64(st);
}

namespace {

struct Value {
    double result, err;
};

struct PointValues {
    // indexed by Metric; case_freqs uses the three slots at the end
    Value er_total, er1, er2, er3, r_out, p_out;
    Value freq[3];
};

PointValues closed_point(const SystemConfig& cfg) {
    const ClosedFormParams p = closed_form_params(cfg);
    const RateBreakdown r = er_total(p);
    PointValues v{};
    v.er_total = {r.er_total, 0.0};
    v.er1 = {r.er1, 0.0};
    v.er2 = {r.er2, 0.0};
    v.er3 = {r.er3, 0.0};
    v.r_out = {r.r_out, 0.0};
    v.p_out = {r.p_out, 0.0};
    const double c3 = p.tau1 > 0.0 ? specfun::gamma_p(p.k_p, p.tau1) : 0.0;
    v.freq[0] = {std::exp(r.ln_success), 0.0};
    v.freq[2] = {c3, 0.0};
    v.freq[1] = {std::max(0.0, r.p_out - c3), 0.0};
    return v;
}

PointValues quad_point(const SystemConfig& cfg) {
    const ClosedFormParams p = closed_form_params(cfg);
    const QuadBreakdown q = evaluate_quad(p, {}, ShapeMode::real);
    auto val = [](const Estimate& e) { return Value{e.value, e.value * e.rel_error}; };
    PointValues v{};
    v.er1 = val(q.er1);
    v.er2 = val(q.er2);
    v.er3 = val(q.er3);
    v.er_total = {q.er_total, v.er1.err + v.er2.err + v.er3.err};
    v.p_out = {q.outage.p_out, q.outage.p_out * q.outage.rel_error};
    v.r_out = {q.r_out, q.r_out * q.outage.rel_error};
    if (!cfg.case3_full_surface) {
        const RegionProbabilities rp = region_probabilities_2d(p, {}, ShapeMode::real);
        v.freq[0] = {rp.case1, 0.0};
        v.freq[1] = {rp.case2, 0.0};
        v.freq[2] = {rp.case3, 0.0};
    } else {
        const double c3 = p.tau1 > 0.0 ? specfun::gamma_p(p.k_p_real, p.tau1) : 0.0;
        v.freq[0] = {std::exp(q.outage.ln_success), 0.0};
        v.freq[2] = {c3, 0.0};
        v.freq[1] = {std::max(0.0, q.outage.p_out - c3), 0.0};
    }
    return v;
}

PointValues mc_point(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed) {
    const McReport m = run_mc(cfg, trials, seed, FadingMode::exact, kDefaultShards, 1);
    const double n = static_cast<double>(m.trials);
    auto binom = [n](double f) { return std::sqrt(f * (1.0 - f) / n); };
    PointValues v{};
    v.er_total = {m.er_total, m.se_er};
    v.er1 = {m.er1, m.se_er1};
    v.er2 = {m.er2, m.se_er2};
    v.er3 = {m.er3, m.se_er3};
    v.p_out = {m.p_out_strict, binom(m.p_out_strict)};
    v.r_out = {m.r_out, std::log2(1.0 + cfg.gamma_p_target) * binom(m.p_out_strict)};
    for (int i = 0; i < 3; ++i) v.freq[i] = {m.case_freqs[i], binom(m.case_freqs[i])};
    return v;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SystemConfig& base, const SweepSpec& spec, unsigned threads) {
    spec.validate();
    base.validate();
    const std::size_t nb = spec.betas.size(), ng = spec.grid.size(), ne = spec.engines.size();
    const std::size_t points = nb * ng;
    std::vector<std::vector<PointValues>> results(points, std::vector<PointValues>(ne));
    std::vector<std::exception_ptr> errors(points);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, points));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < points;) {
            const std::size_t bi = k / ng, gi = k % ng;
            try {
                const SystemConfig cfg = point_config(base, spec.variable, spec.grid[gi], spec.betas[bi]);
                for (std::size_t e = 0; e < ne; ++e) {
                    switch (spec.engines[e]) {
                        case Engine::closed: results[k][e] = closed_point(cfg); break;
                        case Engine::quad: results[k][e] = quad_point(cfg); break;
                        case Engine::mc:
                            results[k][e] = mc_point(cfg, spec.mc_trials, point_seed(spec.seed, bi, gi));
                            break;
                    }
                }
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<SweepRow> rows;
    for (std::size_t bi = 0; bi < nb; ++bi)
        for (std::size_t gi = 0; gi < ng; ++gi)
            for (std::size_t e = 0; e < ne; ++e) {
                const PointValues& v = results[bi * ng + gi][e];
                auto push = [&](const std::string& name, const Value& x) {
                    rows.push_back({spec.variable, spec.grid[gi], spec.betas[bi], spec.engines[e],
                                    name, x.result, x.err});
                };
                for (Metric m : spec.metrics) {
                    switch (m) {
                        case Metric::er_total: push("er_total", v.er_total); break;
                        case Metric::er1: push("er1", v.er1); break;
                        case Metric::er2: push("er2", v.er2); break;
                        case Metric::er3: push("er3", v.er3); break;
                        case Metric::r_out: push("r_out", v.r_out); break;
                        case Metric::p_out: push("p_out", v.p_out); break;
                        case Metric::case_freqs:
                            push("case1_freq", v.freq[0]);
                            push("case2_freq", v.freq[1]);
                            push("case3_freq", v.freq[2]);
                            break;
                    }
                }
            }
    return rows;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string sweep_csv(const SystemConfig& base, const SweepSpec& spec,
                      const std::vector<SweepRow>& rows) {
    nlohmann::json echo;
    echo["config"] = config_to_json(base);
    nlohmann::json sw;
    sw["variable"] = to_string(spec.variable);
    sw["grid"] = spec.grid;
    sw["betas"] = spec.betas;
    std::vector<std::string> names;
    for (Metric m : spec.metrics) names.emplace_back(to_string(m));
    sw["metrics"] = names;
    names.clear();
    for (Engine e : spec.engines) names.emplace_back(to_string(e));
    sw["engines"] = names;
    sw["mc_trials"] = spec.mc_trials;
    sw["seed"] = spec.seed;
    echo["sweep"] = sw;
    std::string out = "# " + echo.dump() + "\n";
    out += kCsvHeader;
    out += '\n';
    for (const SweepRow& r : rows) {
        out += to_string(r.variable);
        out += ',' + format_double(r.value) + ',' + format_double(r.beta) + ',';
        out += to_string(r.engine);
        out += ',' + r.metric + ',' + format_double(r.result) + ',' + format_double(r.stderr_) + '\n';
    }
    return out;
}

}  // namespace starris
