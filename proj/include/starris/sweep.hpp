#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starris/config.hpp"

namespace starris {

enum class SweepVariable { alpha, gamma_p_target, omega };
enum class Engine { closed, quad, mc };
/// case_freqs expands to three rows: case1_freq, case2_freq, case3_freq.
enum class Metric { er_total, er1, er2, er3, r_out, p_out, case_freqs };

const char* to_string(SweepVariable v);
const char* to_string(Engine e);
const char* to_string(Metric m);
SweepVariable parse_variable(const std::string& s);  // alpha|gamma|gamma_p_target|omega
Engine parse_engine(const std::string& s);
Metric parse_metric(const std::string& s);

/// "a:b:step", inclusive of b up to rounding. Values are snapped to 12
/// significant digits so that 0.1 steps print cleanly.
std::vector<double> parse_grid(const std::string& s);
std::vector<double> make_grid(double a, double b, double step);

struct SweepSpec {
    SweepVariable variable = SweepVariable::alpha;
    std::vector<double> grid;
    std::vector<double> betas{0.3};
    std::vector<Metric> metrics{Metric::er_total, Metric::r_out, Metric::p_out, Metric::case_freqs};
    std::vector<Engine> engines{Engine::closed};
    std::uint64_t mc_trials = 1000000;
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;
};

struct SweepRow {
    SweepVariable variable;
    double value = 0.0;
    double beta = 0.0;
    Engine engine = Engine::closed;
    std::string metric;
    double result = 0.0;
    double stderr_ = 0.0;
};

/// Configuration at one sweep point: base with beta and the swept variable
/// replaced.
SystemConfig point_config(const SystemConfig& base, SweepVariable var, double value, double beta);

/// MC seed for point (beta index, grid index).
std::uint64_t point_seed(std::uint64_t seed, std::size_t beta_index, std::size_t grid_index);

/// Rows ordered beta, value, engine, metric. Points run on up to `threads`
/// workers (0 = hardware); the order does not depend on completion order.
std::vector<SweepRow> run_sweep(const SystemConfig& base, const SweepSpec& spec,
                                unsigned threads = 0);

inline constexpr const char* kCsvHeader = "variable,value,beta,engine,metric,result,stderr";

/// CSV text: a "# config ..." line echoing the resolved base config and
/// spec, the header, then one line per row. LF endings, %.17g floats.
std::string sweep_csv(const SystemConfig& base, const SweepSpec& spec,
                      const std::vector<SweepRow>& rows);

std::string format_double(double x);

}  // namespace starris
