#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "starris/config.hpp"
#include "starris/error.hpp"

namespace starris {

namespace {

using nlohmann::json;

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col;
    return os.str();
}

double get_number(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_number()) throw ConfigError("field '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("field '" + key + "' must be finite");
    return x;
}

void set_power(const json& doc, const std::string& watts_key, const std::string& db_key,
               double (*convert)(double), double& out) {
    const bool has_w = doc.contains(watts_key);
    const bool has_db = doc.contains(db_key);
    if (has_w && has_db)
        throw ConfigError("fields '" + watts_key + "' and '" + db_key + "' are mutually exclusive");
    if (has_w) out = get_number(doc, watts_key);
    if (has_db) out = convert(get_number(doc, db_key));
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void SystemConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("field '") + name + "' must be positive");
    };
    auto fraction = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError(std::string("field '") + name + "' must lie in [0, 1]");
    };
    positive(P_p, "P_p");
    positive(P_s, "P_s");
    positive(sigma2, "sigma2");
    positive(eta, "eta");
    positive(C0, "C0");
    positive(Omega, "Omega");
    positive(d_total, "d_total");
    positive(d_br, "d_br");
    fraction(beta, "beta");
    fraction(alpha, "alpha");
    fraction(omega, "omega");
    fraction(rho_r, "rho_r");
    fraction(rho_t, "rho_t");
    if (!(rho_r > 0.0)) throw ConfigError("field 'rho_r' must be positive");
    if (!(rho_t > 0.0)) throw ConfigError("field 'rho_t' must be positive");
    if (!(gamma_p_target >= 0.0) || !std::isfinite(gamma_p_target))
        throw ConfigError("field 'gamma_p_target' must be nonnegative");
    if (!(m >= 0.5)) throw ConfigError("field 'm' must be >= 0.5");
    if (N < 2) throw ConfigError("field 'N' must be >= 2");
    if (N_r() < 1 || N_t() < 1)
        throw ConfigError("field 'beta' leaves one side of the surface without elements");
}

int SystemConfig::N_r() const { return static_cast<int>(std::lround(beta * N)); }
int SystemConfig::N_t() const { return N - N_r(); }

SystemConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    static const std::set<std::string> known = {
        "P_p",   "P_s",   "sigma2",  "P_p_dBm", "P_s_dBm",        "sigma2_dB",
        "eta",   "C0",    "N",       "beta",    "alpha",          "gamma_p_target",
        "m",     "Omega", "d_total", "omega",   "d_br",           "rho_r",
        "rho_t", "case3_full_surface"};
    for (const auto& item : doc.items())
        if (!known.count(item.key())) throw ConfigError("unknown field '" + item.key() + "'");

    SystemConfig cfg;
    set_power(doc, "P_p", "P_p_dBm", dbm_to_watts, cfg.P_p);
    set_power(doc, "P_s", "P_s_dBm", dbm_to_watts, cfg.P_s);
    set_power(doc, "sigma2", "sigma2_dB", db_to_linear, cfg.sigma2);
    auto num = [&](const char* key, double& out) {
        if (doc.contains(key)) out = get_number(doc, key);
    };
    num("eta", cfg.eta);
    num("C0", cfg.C0);
    num("beta", cfg.beta);
    num("alpha", cfg.alpha);
    num("gamma_p_target", cfg.gamma_p_target);
    num("m", cfg.m);
    num("Omega", cfg.Omega);
    num("d_total", cfg.d_total);
    num("omega", cfg.omega);
    num("d_br", cfg.d_br);
    num("rho_r", cfg.rho_r);
    num("rho_t", cfg.rho_t);
    if (doc.contains("N")) {
        const json& v = doc.at("N");
        if (!v.is_number_integer()) throw ConfigError("field 'N' must be an integer");
        cfg.N = v.get<int>();
    }
    if (doc.contains("case3_full_surface")) {
        const json& v = doc.at("case3_full_surface");
        if (!v.is_boolean()) throw ConfigError("field 'case3_full_surface' must be a boolean");
        cfg.case3_full_surface = v.get<bool>();
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const SystemConfig& cfg) {
    json j = json::object();
    j["P_p"] = cfg.P_p;
    j["P_s"] = cfg.P_s;
    j["sigma2"] = cfg.sigma2;
    j["eta"] = cfg.eta;
    j["C0"] = cfg.C0;
    j["N"] = cfg.N;
    j["beta"] = cfg.beta;
    j["alpha"] = cfg.alpha;
    j["gamma_p_target"] = cfg.gamma_p_target;
    j["m"] = cfg.m;
    j["Omega"] = cfg.Omega;
    j["d_total"] = cfg.d_total;
    j["omega"] = cfg.omega;
    j["d_br"] = cfg.d_br;
    j["rho_r"] = cfg.rho_r;
    j["rho_t"] = cfg.rho_t;
    j["case3_full_surface"] = cfg.case3_full_surface;
    return j;
}

SystemConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte is 1-based and points at the offending character
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        throw ConfigError("malformed JSON at " + line_col(text, byte) + ": " + e.what());
    }
    try {
        return config_from_json(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace starris
