#include "starris/channel.hpp"

#include <algorithm>
#include <cmath>

#include "starris/error.hpp"
#include "starris/specfun.hpp"

namespace starris {

double pathloss(double d, const SystemConfig& cfg) {
    if (!(d > 0.0)) throw DomainError("pathloss: distance must be positive");
    return cfg.C0 * std::pow(d, -cfg.eta);
}

EffectivePowers effective_powers(const SystemConfig& cfg) {
    const double d_pr = cfg.omega * cfg.d_total;
    const double d_sr = (1.0 - cfg.omega) * cfg.d_total;
    if (!(d_pr > 0.0) || !(d_sr > 0.0))
        throw DomainError("effective_powers: omega places a user on the surface");
    const double l_br = pathloss(cfg.d_br, cfg);
    EffectivePowers L;
    L.L_p = cfg.P_p * pathloss(d_pr, cfg) * l_br / cfg.sigma2;
    L.L_s = cfg.P_s * pathloss(d_sr, cfg) * l_br / cfg.sigma2;
    return L;
}

double nakagami_moment(int n, double m, double Omega) {
    if (n < 0) throw DomainError("nakagami_moment: negative order");
    if (!(m >= 0.5)) throw DomainError("nakagami_moment: m must be >= 0.5");
    if (!(Omega > 0.0)) throw DomainError("nakagami_moment: Omega must be positive");
    if (n == 0) return 1.0;
    if (n == 2) return Omega;
    const double h = 0.5 * n;
    return std::exp(specfun::ln_gamma(m + h) - specfun::ln_gamma(m) + h * std::log(Omega / m));
}

SumMoments coherent_sum_moments(int n, double m, double Omega) {
    if (n < 1) throw DomainError("coherent_sum_moments: need at least one element");
    const double e1 = nakagami_moment(1, m, Omega);
    const double e2 = nakagami_moment(2, m, Omega);
    const double e3 = nakagami_moment(3, m, Omega);
    const double e4 = nakagami_moment(4, m, Omega);
    const double N = n;
    SumMoments s;
    s.I1 = N * e2 + N * (N - 1) * e1 * e1;
    s.I2 = N * e4 + 4.0 * N * (N - 1) * e3 * e1 + 3.0 * N * (N - 1) * e2 * e2 +
           6.0 * N * (N - 1) * (N - 2) * e2 * e1 * e1 +
           N * (N - 1) * (N - 2) * (N - 3) * e1 * e1 * e1 * e1;
    return s;
}

GammaFit gamma_fit(int n, double m, double Omega, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("gamma_fit: rho must lie in (0, 1]");
    const SumMoments s = coherent_sum_moments(n, m, Omega);
    // var(S^2) from the cumulants of S = sum |h_i|; I2 - I1^2 cancels badly at large n
    const double e1 = nakagami_moment(1, m, Omega);
    const double e2 = nakagami_moment(2, m, Omega);
    const double e3 = nakagami_moment(3, m, Omega);
    const double e4 = nakagami_moment(4, m, Omega);
    const double c2 = e2 - e1 * e1;
    const double c3 = e3 - 3.0 * e2 * e1 + 2.0 * e1 * e1 * e1;
    const double c4 = e4 - 4.0 * e3 * e1 + 6.0 * e2 * e1 * e1 - 3.0 * e1 * e1 * e1 * e1 - 3.0 * c2 * c2;
    const double N = n;
    const double mu = N * e1;
    const double var = 4.0 * mu * mu * N * c2 + 4.0 * mu * N * c3 + 2.0 * N * N * c2 * c2 + N * c4;
    if (!(var > 0.0)) throw DegenerateError("gamma_fit: nonpositive variance");
    GammaFit g;
    g.I1 = s.I1;
    g.I2 = s.I2;
    g.k_real = s.I1 * s.I1 / var;
    g.k_int = std::max(1, static_cast<int>(std::lround(g.k_real)));
    g.theta_unit = var / s.I1;
    g.theta = rho * rho * g.theta_unit;
    return g;
}

}  // namespace starris
