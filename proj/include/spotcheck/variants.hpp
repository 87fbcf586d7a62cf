#pragma once

#include <cstdint>
#include <utility>

#include "spotcheck/core.hpp"

namespace spotcheck {

// Spot-check probability known only to lie in [omega_lo, omega_hi].
struct BiasModel {
    double omega_hi = 0.1;
    double omega_lo = 0.1;

    double delta_max() const { return omega_hi - omega_lo; }
    void validate() const;
};

// Y = 0 checked, Y = 1 unchecked, Y = 2 neither (factor fixed at 1).
struct MultiChoiceModel {
    double w0 = 0.1;
    double w1 = 0.9;
    double w2 = 0.0;

    void validate() const;
};

// Shifted data (x >= 0).
double biased_ef_value(double beta, double t, const BiasModel& bm, double x, int y);

// E[T e^{-beta [Y=1] X}] for the biased factor when the actual probability is omega_true.
double biased_inequality_lhs(double beta, double t, const BiasModel& bm, const ReferenceDistribution& dist,
                             double omega_true);

double bias_correction(double t, double omega, double delta_max);

std::pair<double, double> multi_choice_reduce(const MultiChoiceModel& mc);

// Direct three-valued factor: (1 - w1 t1 e^{-beta x} - w2)/w0, t1, or 1.
double three_valued_ef_value(double beta, double t1, const MultiChoiceModel& mc, double x, int y);

double three_valued_inequality_lhs(double beta, double t1, const MultiChoiceModel& mc,
                                   const ReferenceDistribution& dist);

std::uint64_t early_stop_n(std::uint64_t m, double omega, double gamma);

double conditional_coverage(double epsilon, double gamma);

}  // namespace spotcheck
