#include "spotcheck/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace spotcheck {

const char* error_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NonPositiveFactor: return "NonPositiveFactor";
        case ErrorKind::MixedPower: return "MixedPower";
        case ErrorKind::NoFeasibleBeta: return "NoFeasibleBeta";
        case ErrorKind::Divergent: return "Divergent";
        case ErrorKind::BelowThreshold: return "BelowThreshold";
        case ErrorKind::GapTooLarge: return "GapTooLarge";
        case ErrorKind::PreconditionFailed: return "PreconditionFailed";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::InfeasiblePlan: return "InfeasiblePlan";
        case ErrorKind::NonBinaryValue: return "NonBinaryValue";
    }
    return "Unknown";
}

namespace {

constexpr double kClampSlack = 1e-12;

double below_b_tolerance(double b) { return 1e-12 * (1.0 + std::abs(b)); }

// Checked branch on shifted data, before clamping.
double checked_branch(double beta, double t_shifted, double omega, double xs) {
    return (1.0 - (1.0 - omega) * t_shifted * std::exp(-beta * xs)) / omega;
}

}  // namespace

void TrialRecord::validate(std::optional<double> b) const {
    if (y < 0) throw Error(ErrorKind::InvalidInput, "negative spot-check indicator");
    if ((y == 0) != x.has_value())
        throw Error(ErrorKind::InvalidInput,
                    "x must be present exactly when y = 0 (trial " + std::to_string(index) + ")");
    if (x && !std::isfinite(*x)) throw Error(ErrorKind::InvalidInput, "non-finite x");
    if (x && b && *x < *b - below_b_tolerance(*b))
        throw Error(ErrorKind::InvalidInput,
                    "observed x below the declared lower bound (trial " + std::to_string(index) + ")");
}

void SpotModel::validate() const {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0,1)");
    if (n < 1) throw Error(ErrorKind::InvalidInput, "n must be positive");
    if (!std::isfinite(b)) throw Error(ErrorKind::InvalidInput, "b must be finite");
}

double ExtremalEF::shifted_t() const { return t * std::exp(-beta * b); }

void ExtremalEF::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidInput, "beta must be positive");
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    const double ts = shifted_t();
    if (!(ts >= 0.0) || ts > (1.0 + 1e-12) / (1.0 - omega))
        throw Error(ErrorKind::DomainError, "t e^{-beta b} must lie in [0, 1/(1-omega)]");
}

ExtremalEF ExtremalEF::from_shifted(double beta, double t_shifted, double omega, double b) {
    return ExtremalEF{beta, t_shifted * std::exp(beta * b), omega, b};
}

ReferenceDistribution ReferenceDistribution::from_pairs(std::vector<std::pair<double, double>> pairs) {
    std::map<double, double> merged;
    double total = 0.0;
    for (const auto& [x, p] : pairs) {
        if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "non-finite support value");
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidInput, "negative probability");
        total += p;
        if (p > 0.0) merged[x] += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw Error(ErrorKind::InvalidInput, "probabilities must sum to 1");
    ReferenceDistribution d;
    d.support_.assign(merged.begin(), merged.end());
    return d;
}

ReferenceDistribution ReferenceDistribution::point_mass(double x) { return from_pairs({{x, 1.0}}); }

ReferenceDistribution ReferenceDistribution::empirical(const std::vector<double>& samples) {
    if (samples.empty()) throw Error(ErrorKind::TooFewSamples, "empty sample");
    std::map<double, std::size_t> counts;
    for (double x : samples) {
        if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "non-finite sample");
        ++counts[x];
    }
    ReferenceDistribution d;
    const double n = static_cast<double>(samples.size());
    for (const auto& [x, c] : counts) d.support_.emplace_back(x, static_cast<double>(c) / n);
    return d;
}

ReferenceDistribution ReferenceDistribution::mixture(const ReferenceDistribution& a,
                                                     const ReferenceDistribution& c, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::InvalidInput, "lambda must lie in [0,1]");
    std::map<double, double> merged;
    for (const auto& [x, p] : a.support_) merged[x] += lambda * p;
    for (const auto& [x, p] : c.support_) merged[x] += (1.0 - lambda) * p;
    ReferenceDistribution d;
    for (const auto& [x, p] : merged)
        if (p > 0.0) d.support_.emplace_back(x, p);
    return d;
}

double ReferenceDistribution::mean() const {
    CompensatedSum s;
    for (const auto& [x, p] : support_) s.add(x * p);
    return s.value();
}

double ReferenceDistribution::central_moment(int k) const {
    const double m = mean();
    CompensatedSum s;
    for (const auto& [x, p] : support_) s.add(std::pow(x - m, k) * p);
    return s.value();
}

double ReferenceDistribution::variance() const { return central_moment(2); }

double ReferenceDistribution::min() const {
    if (support_.empty()) throw Error(ErrorKind::InvalidInput, "empty distribution");
    return support_.front().first;
}

double ReferenceDistribution::max() const {
    if (support_.empty()) throw Error(ErrorKind::InvalidInput, "empty distribution");
    return support_.back().first;
}

ReferenceDistribution ReferenceDistribution::shifted(double b) const {
    ReferenceDistribution d;
    for (const auto& [x, p] : support_) d.support_.emplace_back(x - b, p);
    return d;
}

void CompensatedSum::add(double v) {
    const double s = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
        comp_ += (sum_ - s) + v;
    else
        comp_ += (v - s) + sum_;
    sum_ = s;
}

double ef_value(const ExtremalEF& ef, double x, int y) {
    if (y == 1) return ef.t;
    if (y >= 2) return 1.0;
    if (y < 0) throw Error(ErrorKind::InvalidInput, "negative spot-check indicator");
    if (x < ef.b - below_b_tolerance(ef.b))
        throw Error(ErrorKind::InvalidInput, "observed x below the lower bound b");
    const double xs = std::max(0.0, x - ef.b);
    const double v = checked_branch(ef.beta, ef.shifted_t(), ef.omega, xs);
    if (v < -kClampSlack) throw Error(ErrorKind::NonPositiveFactor, "checked-branch factor is negative");
    return std::max(v, 0.0);
}

ConfidenceReport assemble_report(double log_ef_sum, bool zero_factor, std::uint64_t c_n,
                                 double beta, double epsilon, double b) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0,1]");
    ConfidenceReport r;
    r.c_n = c_n;
    r.beta = beta;
    r.epsilon = epsilon;
    r.zero_factor = zero_factor;
    r.log_ef_sum = zero_factor ? -std::numeric_limits<double>::infinity() : log_ef_sum;
    r.s_lb = (r.log_ef_sum + std::log(epsilon)) / beta;
    r.average_lb = c_n == 0 ? b : r.s_lb / static_cast<double>(c_n);
    return r;
}

ConfidenceReport confidence_bound(const std::vector<TrialRecord>& records,
                                  const std::vector<ExtremalEF>& efs, double epsilon) {
    if (efs.empty()) throw Error(ErrorKind::InvalidInput, "at least one estimation factor is required");
    if (efs.size() != 1 && efs.size() != records.size())
        throw Error(ErrorKind::InvalidInput, "need one estimation factor per trial");
    const double beta = efs.front().beta;
    for (const auto& ef : efs) {
        if (ef.beta != beta) throw Error(ErrorKind::MixedPower, "all estimation factors must share beta");
        ef.validate();
    }
    CompensatedSum log_sum;
    std::uint64_t c_n = 0;
    bool zero = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ExtremalEF& ef = efs.size() == 1 ? efs.front() : efs[i];
        const auto& rec = records[i];
        rec.validate(ef.b);
        if (rec.y == 1) ++c_n;
        const double v = ef_value(ef, rec.x.value_or(0.0), rec.y);
        if (v == 0.0)
            zero = true;
        else
            log_sum.add(std::log(v));
    }
    return assemble_report(log_sum.value(), zero, c_n, beta, epsilon, efs.front().b);
}

ConfidenceReport confidence_bound(const std::vector<TrialRecord>& records, const ExtremalEF& ef,
                                  double epsilon) {
    return confidence_bound(records, std::vector<ExtremalEF>{ef}, epsilon);
}

void BoundAccumulator::add(int y, double x) { add_many(y, x, 1); }

void BoundAccumulator::add_many(int y, double x, std::uint64_t count) {
    if (count == 0) return;
    if (y == 1) c_n_ += count;
    const double v = ef_value(ef_, x, y);
    if (v == 0.0)
        zero_ = true;
    else
        log_sum_.add(static_cast<double>(count) * std::log(v));
}

ConfidenceReport BoundAccumulator::report(double epsilon) const {
    return assemble_report(log_sum_.value(), zero_, c_n_, ef_.beta, epsilon, ef_.b);
}

double ef_inequality_lhs(const ExtremalEF& ef, const ReferenceDistribution& dist, double omega) {
    const double ts = ef.shifted_t();
    CompensatedSum s;
    for (const auto& [x, p] : dist.support()) {
        const double xs = x - ef.b;
        const double checked = std::max(0.0, checked_branch(ef.beta, ts, ef.omega, xs));
        s.add(p * (omega * checked + (1.0 - omega) * ts * std::exp(-ef.beta * xs)));
    }
    return s.value();
}

std::pair<double, double> u_equivalence_check(const ExtremalEF& ef, const ReferenceDistribution& dist,
                                              double omega) {
    const double ts = ef.shifted_t();
    CompensatedSum checked;
    for (const auto& [x, p] : dist.support())
        checked.add(p * std::max(0.0, checked_branch(ef.beta, ts, ef.omega, x - ef.b)));
    const double lhs_x = ef_inequality_lhs(ef, dist, omega);
    const double lhs_mean =
        omega * checked.value() + (1.0 - omega) * ts * std::exp(-ef.beta * (dist.mean() - ef.b));
    return {lhs_x, lhs_mean};
}

}  // namespace spotcheck
