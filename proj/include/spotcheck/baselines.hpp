#pragma once

#include <cstdint>
#include <vector>

#include "spotcheck/core.hpp"

namespace spotcheck {

struct BinaryRange {
    double x_lb = 0.0;
    double x_ub = 1.0;
    double theta_max = 1.0;

    void validate() const;
};

struct GocaninTrials {
    std::uint64_t n = 0;
    bool divergent = false;
};

double kl_div(double p, double q);

// Divergence level -ln((eps^{1/n} - (1-omega))/omega); +inf when eps <= (1-omega)^n.
double gocanin_level(double omega, double epsilon, double n);

// Smallest q in [0, p] with D(p|q) <= d.
double gocanin_f(double p, double d);

double gocanin_theta_lb(double p_obs, const BinaryRange& br, double omega, double epsilon, double n);

// From sufficient statistics: n trials, c_n unchecked, k_ub checked trials at x_ub.
ConfidenceReport gocanin_bound_counts(std::uint64_t n, std::uint64_t c_n, std::uint64_t k_ub,
                                      const BinaryRange& br, double omega, double epsilon);
ConfidenceReport gocanin_bound(const std::vector<TrialRecord>& records, const BinaryRange& br, double omega,
                               double epsilon);

GocaninTrials gocanin_min_trials(double theta, const BinaryRange& br, double omega, double epsilon,
                                 double delta_th);

// Bounds the sum of X over unchecked trials rather than of conditional means.
double serfling_penalty(double n, double x_lb, double x_ub, double omega, double epsilon);
ConfidenceReport serfling_bound_sum(std::uint64_t n, std::uint64_t c_n, double checked_sum, double x_lb,
                                    double x_ub, double omega, double epsilon);
ConfidenceReport serfling_bound(const std::vector<TrialRecord>& records, double x_lb, double x_ub, double omega,
                                double epsilon);

std::uint64_t serfling_min_trials(double theta, double x_lb, double x_ub, double omega, double epsilon,
                                  double delta_th);

}  // namespace spotcheck
