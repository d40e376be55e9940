#pragma once

#include "starris/rates.hpp"

namespace starris {

/// Tolerances for the oracle integrals. `tail_cut` is the integrand level,
/// relative to its peak, below which the semi-infinite tails are dropped.
/// `abs_tol` applies to the peak-normalized integrand.
struct QuadratureControl {
    double abs_tol = 1e-14;
    double rel_tol = 1e-11;
    int max_subdivisions = 2000;
    double tail_cut = 1e-12;

    void validate() const;
};

/// Which Gamma shapes the oracle integrates against.
enum class ShapeMode { integer, real };

struct Estimate {
    double value = 0.0;
    double ln_value = 0.0;   // natural log of value; finite even when value underflows
    double rel_error = 0.0;  // estimated relative error
};

struct OutageEstimate {
    double p_out = 0.0;
    double ln_success = 0.0;  // ln(1 - p_out), integrated separately
    double rel_error = 0.0;
};

// Rates in bits/s/Hz.
Estimate er1_quad(const ClosedFormParams& p, const QuadratureControl& q = {},
                  ShapeMode mode = ShapeMode::integer);
/// Nested: inner integral over the PU gain across the Case II band, outer over
/// the SU gain.
Estimate er2_quad(const ClosedFormParams& p, const QuadratureControl& q = {},
                  ShapeMode mode = ShapeMode::integer);
Estimate er3_quad(const ClosedFormParams& p, const QuadratureControl& q = {},
                  ShapeMode mode = ShapeMode::integer);
OutageEstimate pout_quad(const ClosedFormParams& p, const QuadratureControl& q = {},
                         ShapeMode mode = ShapeMode::integer);

/// E[R_s] as one integral of the piecewise rate against both densities over
/// the whole quadrant (no incomplete-gamma functions involved).
Estimate ergodic_rate_2d(const ClosedFormParams& p, const QuadratureControl& q = {},
                         ShapeMode mode = ShapeMode::integer);

struct RegionProbabilities {
    double case1 = 0.0;
    double case2 = 0.0;
    double case3 = 0.0;
};

/// Probability mass of each case region under the Gamma model, by 2-D quadrature.
RegionProbabilities region_probabilities_2d(const ClosedFormParams& p,
                                            const QuadratureControl& q = {},
                                            ShapeMode mode = ShapeMode::integer);

struct QuadBreakdown {
    Estimate er1, er2, er3;
    OutageEstimate outage;
    double er_total = 0.0;
    double r_out = 0.0;
};

QuadBreakdown evaluate_quad(const ClosedFormParams& p, const QuadratureControl& q = {},
                            ShapeMode mode = ShapeMode::integer);

}  // namespace starris
