#pragma once

#include <string>

#include "json.hpp"

namespace starris {

/// Physical and protocol parameters. Defaults are the reference scenario:
/// P_p = 10 dBm, P_s = 30 dBm, sigma^2 = -60 dB, N = 400 elements, m = 3,
/// alpha = 0.7, beta = 0.3, gamma_p_target = 3, omega = 0.2.
/// Powers are in watts, distances in metres, everything else dimensionless.
struct SystemConfig {
    double P_p = 0.01;
    double P_s = 1.0;
    double sigma2 = 1e-6;
    double eta = 2.0;
    double C0 = 0.01;  // path loss at d0 = 1 m, as a power ratio
    int N = 400;
    double beta = 0.3;
    double alpha = 0.7;
    double gamma_p_target = 3.0;
    double m = 3.0;
    double Omega = 1.0;
    double d_total = 30.0;
    double omega = 0.2;
    double d_br = 10.0;  // surface to base station; not fixed by the reference scenario
    double rho_r = 1.0;
    double rho_t = 1.0;
    // When set, the secondary user's gain in the outage regime is taken over
    // all N elements (whole surface in transmission mode) instead of N_t.
    bool case3_full_surface = false;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    int N_r() const;
    int N_t() const;
};

SystemConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SystemConfig& cfg);

/// Parses a JSON document. Syntax errors are reported as ConfigError with
/// the line and column of the offending byte.
SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::string& path);

double dbm_to_watts(double dbm);
double db_to_linear(double db);

}  // namespace starris
