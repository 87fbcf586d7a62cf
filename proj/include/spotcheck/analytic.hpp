#pragma once

#include <optional>

#include "spotcheck/core.hpp"

namespace spotcheck {

// Summary statistics in shifted units (X >= 0).
struct MomentSpec {
    double theta_e = 0.0;
    double sigma2_e = 0.0;
    std::optional<double> m3_abs;
    std::optional<double> m4;

    void validate() const;
};

enum class GapRegime { Feasible, InfeasibleT };

struct GapBound {
    double value = 0.0;
    double b_factor = 0.0;
    GapRegime regime = GapRegime::Feasible;
};

// B(z) = omega^2 e^z / (1 - (1-omega) e^z)^2 on [0, ln(1/(1-omega))).
double b_function(double z0, double omega);

// Power from mean/variance: sqrt(2 omega ln(1/eps) / (sigma2 n (1-omega))).
double moment_beta(double sigma2, double omega, double epsilon, double n);

// Smallest n for which e^{beta theta_e} <= 1/(1-omega) under moment_beta.
double moment_threshold(const MomentSpec& ms, double omega, double epsilon);

// Shifted factors (b = 0). Use ExtremalEF::from_shifted for raw data.
ExtremalEF moment_ef(const MomentSpec& ms, double omega, double epsilon, double n);
ExtremalEF tightness_ef(double theta_e, double sigma2, double omega, double epsilon, double n);
// Calibration-free variant for X in [0, u]: theta_e = u/2, sigma2 = u^2/4.
ExtremalEF tightness_ef_bounded(double u, double omega, double epsilon, double n);

// Largest delta_th accepted by gap_ef.
double gap_ceiling(double theta_e, double sigma2_e, double omega);
ExtremalEF gap_ef(double theta_e, double sigma2_e, double omega, double delta_th);
// Trial estimate 2 ln(1/eps) (sigma2 + delta^2) / (omega (1-omega) delta^2).
double gap_trials_estimate(double sigma2, double omega, double epsilon, double delta_th);

// Upper bound on E(S_U - S_lb) for the moment-built factor under i.i.d.
// trials with mean theta and variance sigma2_true.
GapBound expected_gap_bound(double theta, const MomentSpec& ms, double omega, double epsilon, double n,
                            double sigma2_true);

// Large-n form sigma sqrt(2 n (1-omega) ln(1/eps) / omega).
double expected_gap_limit(double sigma2, double omega, double epsilon, double n);

// Bound on E(Delta)/n when n omega = ns_bar stays fixed.
double constant_ns_gap_bound(double theta, double sigma, double ns_bar, double epsilon, double n);

// Leading-order gap for varying past-conditional variances bounded by sigma^2.
double tightness_gap_bound(double theta, double theta_e, double sigma, double omega, double epsilon,
                           double n);

}  // namespace spotcheck
