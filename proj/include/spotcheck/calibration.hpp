#pragma once

#include <cstddef>
#include <vector>

#include "spotcheck/core.hpp"

namespace spotcheck {

enum class Estimator { Pooled, Split };

struct CalibrationResult {
    double theta_e = 0.0;
    double sigma2_e = 0.0;
    std::size_t n_used = 0;
    Estimator estimator = Estimator::Pooled;
    std::size_t n_a = 0;
    std::size_t n_v = 0;
};

struct RegularizedMoments {
    double theta_tilde = 0.0;
    double sigma2_tilde = 0.0;
    double beta_tilde = 0.0;
    double theta_u = 0.0;
    double r2 = 0.0;

    // Shifted factor with power beta_tilde and t = e^{beta_tilde theta_tilde}.
    ExtremalEF ef(double omega) const;
};

struct CalibrationPlan {
    std::size_t n_a = 1;
    std::size_t n_v = 1;
    double r2 = 0.0;
    double bound = 0.0;
    double limit = 0.0;
    double inflation = 0.0;
};

struct PlanInputs {
    double theta_hint = 0.0;
    double sigma2_lower = 0.0;
    double sigma2_upper = 0.0;
    double m3_abs = 0.0;
    double m4 = 0.0;
    double omega = 0.1;
    double epsilon = 0.01;
    double n = 1.0;
};

CalibrationResult estimate_pooled(const std::vector<double>& samples);
CalibrationResult estimate_split(const std::vector<double>& samples, std::size_t n_a, std::size_t n_v);

double regularization_theta_u(double r2, double omega, double epsilon, double n);
RegularizedMoments regularize(const CalibrationResult& cr, double r2, double omega, double epsilon, double n);

// c(n_v) = (m4 + sigma^4) / (2 n_v r2 (sigma^2 + r2)).
double calibration_c(double sigma2, double m4, double r2, double n_v);

// Planning bound on the expected gap in units of sqrt(n/omega); pass
// infinite n_a / n_v for the well-calibrated limit.
double calibration_gap_bound(double theta, double sigma2, double m3_abs, double m4, double r2, double omega,
                             double epsilon, double n, double n_a, double n_v);
// Same bound in the limit n -> inf with n omega = ns_bar.
double calibration_gap_bound_constant_ns(double theta, double sigma2, double m3_abs, double m4, double r2,
                                         double epsilon, double ns_bar, double n_a, double n_v);

// Smallest n_a = n_v = 2^k (k <= 20) whose planning bound exceeds its
// limit by at most max_inflation (relative). r2 = sigma2_lower / 4.
CalibrationPlan plan_calibration(const PlanInputs& in, double max_inflation);

}  // namespace spotcheck
