#pragma once

#include "starris/config.hpp"

namespace starris {

/// Moment-matched Gamma law for the squared coherent sum over one side.
struct GammaFit {
    double I1 = 0.0;        // E[(sum |h_i|)^2]
    double I2 = 0.0;        // E[(sum |h_i|)^4]
    double k_real = 0.0;
    int k_int = 1;
    double theta = 0.0;       // at the requested rho
    double theta_unit = 0.0;  // at rho = 1
};

/// Noise-normalized effective power factors.
struct EffectivePowers {
    double L_p = 0.0;
    double L_s = 0.0;
};

struct SumMoments {
    double I1 = 0.0;
    double I2 = 0.0;
};

double pathloss(double d, const SystemConfig& cfg);
EffectivePowers effective_powers(const SystemConfig& cfg);

/// E[|h|^n] for |h| ~ Nakagami(m, Omega).
double nakagami_moment(int n, double m, double Omega);

/// Second and fourth moments of sum_{i=1}^{n} |h_i| for i.i.d. Nakagami amplitudes.
SumMoments coherent_sum_moments(int n, double m, double Omega);

GammaFit gamma_fit(int n, double m, double Omega, double rho);

}  // namespace starris
