#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spotcheck/errors.hpp"

namespace spotcheck {

// One trial. y = 0 means spot-checked (x observed); y = 1 unchecked;
// y = 2 is the third outcome of a multi-choice model (no x, factor 1).
struct TrialRecord {
    std::uint64_t index = 0;
    int y = 1;
    std::optional<double> x;

    void validate(std::optional<double> b = std::nullopt) const;
};

struct SpotModel {
    double omega = 0.1;
    double b = 0.0;
    double epsilon = 0.01;
    std::uint64_t n = 1;

    void validate() const;
};

// T(x, 0) = (1 - (1-omega) t e^{-beta x}) / omega, T(., 1) = t, for x >= b.
// t is expressed for raw (unshifted) x; the shifted factor is t e^{-beta b}.
struct ExtremalEF {
    double beta = 0.0;
    double t = 1.0;
    double omega = 0.5;
    double b = 0.0;

    double shifted_t() const;
    void validate() const;
    // Builds the raw-x factor from one constructed on x - b.
    static ExtremalEF from_shifted(double beta, double t_shifted, double omega, double b);
};

class ReferenceDistribution {
public:
    ReferenceDistribution() = default;
    // Merges duplicate values, drops zero-probability atoms, checks the sum.
    static ReferenceDistribution from_pairs(std::vector<std::pair<double, double>> pairs);
    static ReferenceDistribution point_mass(double x);
    static ReferenceDistribution empirical(const std::vector<double>& samples);
    static ReferenceDistribution mixture(const ReferenceDistribution& a,
                                         const ReferenceDistribution& c, double lambda);

    const std::vector<std::pair<double, double>>& support() const { return support_; }
    double mean() const;
    double variance() const;
    double central_moment(int k) const;
    double min() const;
    double max() const;
    ReferenceDistribution shifted(double b) const;

private:
    std::vector<std::pair<double, double>> support_;
};

struct ConfidenceReport {
    double s_lb = 0.0;
    std::uint64_t c_n = 0;
    double average_lb = 0.0;
    double log_ef_sum = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    // Set when some factor evaluated to exactly zero (s_lb = -inf).
    bool zero_factor = false;
};

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double ef_value(const ExtremalEF& ef, double x, int y);

ConfidenceReport confidence_bound(const std::vector<TrialRecord>& records,
                                  const std::vector<ExtremalEF>& efs, double epsilon);
ConfidenceReport confidence_bound(const std::vector<TrialRecord>& records,
                                  const ExtremalEF& ef, double epsilon);

// One-pass accumulator used by the simulators; memory is O(1).
class BoundAccumulator {
public:
    explicit BoundAccumulator(const ExtremalEF& ef) : ef_(ef) {}
    void add(int y, double x = 0.0);
    // count identical trials at once; y = 0 requires x.
    void add_many(int y, double x, std::uint64_t count);
    ConfidenceReport report(double epsilon) const;

private:
    ExtremalEF ef_;
    CompensatedSum log_sum_;
    std::uint64_t c_n_ = 0;
    bool zero_ = false;
};

ConfidenceReport assemble_report(double log_ef_sum, bool zero_factor, std::uint64_t c_n,
                                 double beta, double epsilon, double b);

// E[T e^{-beta [Y=1] X}] with P(Y=0) = omega independent of X.
double ef_inequality_lhs(const ExtremalEF& ef, const ReferenceDistribution& dist, double omega);

// Same expectation with X in the exponent and with E(X) in the exponent.
std::pair<double, double> u_equivalence_check(const ExtremalEF& ef,
                                              const ReferenceDistribution& dist, double omega);

}  // namespace spotcheck
