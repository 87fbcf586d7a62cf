#include "spotcheck/variants.hpp"

#include <algorithm>
#include <cmath>

namespace spotcheck {

namespace {

double clamp_factor(double v) {
    if (v < -1e-12) throw Error(ErrorKind::NonPositiveFactor, "checked-branch factor is negative");
    return std::max(v, 0.0);
}

}  // namespace

void BiasModel::validate() const {
    if (!(omega_lo > 0.0 && omega_lo <= omega_hi && omega_hi < 1.0))
        throw Error(ErrorKind::InvalidInput, "need 0 < omega_lo <= omega_hi < 1");
}

void MultiChoiceModel::validate() const {
    if (!(w0 > 0.0 && w1 > 0.0 && w2 >= 0.0)) throw Error(ErrorKind::InvalidInput, "need w0, w1 > 0 and w2 >= 0");
    if (std::abs(w0 + w1 + w2 - 1.0) > 1e-12) throw Error(ErrorKind::InvalidInput, "weights must sum to 1");
}

double biased_ef_value(double beta, double t, const BiasModel& bm, double x, int y) {
    bm.validate();
    if (y == 1) return t;
    if (y != 0) throw Error(ErrorKind::InvalidInput, "y must be 0 or 1");
    const double e = t * std::exp(-beta * x);
    const double lo = (1.0 - (1.0 - bm.omega_lo) * e) / bm.omega_lo;
    const double hi = (1.0 - (1.0 - bm.omega_hi) * e) / bm.omega_hi;
    return clamp_factor(std::min(lo, hi));
}

double biased_inequality_lhs(double beta, double t, const BiasModel& bm, const ReferenceDistribution& dist,
                             double omega_true) {
    CompensatedSum s;
    for (const auto& [x, p] : dist.support()) {
        const double checked = std::max(0.0, [&] {
            const double e = t * std::exp(-beta * x);
            return std::min((1.0 - (1.0 - bm.omega_lo) * e) / bm.omega_lo,
                            (1.0 - (1.0 - bm.omega_hi) * e) / bm.omega_hi);
        }());
        s.add(p * (omega_true * checked + (1.0 - omega_true) * t * std::exp(-beta * x)));
    }
    return s.value();
}

double bias_correction(double t, double omega, double delta_max) {
    if (!(t >= 0.0)) throw Error(ErrorKind::InvalidInput, "t must be nonnegative");
    return std::max(1.0 + delta_max * (t - 1.0) / omega, 1.0);
}

std::pair<double, double> multi_choice_reduce(const MultiChoiceModel& mc) {
    mc.validate();
    return {mc.w0 / (mc.w0 + mc.w1), 1.0};
}

double three_valued_ef_value(double beta, double t1, const MultiChoiceModel& mc, double x, int y) {
    mc.validate();
    if (y == 1) return t1;
    if (y == 2) return 1.0;
    if (y != 0) throw Error(ErrorKind::InvalidInput, "y must be 0, 1 or 2");
    return clamp_factor((1.0 - mc.w1 * t1 * std::exp(-beta * x) - mc.w2) / mc.w0);
}

double three_valued_inequality_lhs(double beta, double t1, const MultiChoiceModel& mc,
                                   const ReferenceDistribution& dist) {
    CompensatedSum s;
    for (const auto& [x, p] : dist.support()) {
        const double e = std::exp(-beta * x);
        const double checked = std::max(0.0, (1.0 - mc.w1 * t1 * e - mc.w2) / mc.w0);
        s.add(p * (mc.w0 * checked + mc.w1 * t1 * e + mc.w2));
    }
    return s.value();
}

std::uint64_t early_stop_n(std::uint64_t m, double omega, double gamma) {
    if (m < 1) throw Error(ErrorKind::InvalidInput, "m must be positive");
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidInput, "gamma must be positive");
    const double mq = static_cast<double>(m) * (1.0 - omega);
    const double n = static_cast<double>(m) / (1.0 - omega) *
                     (1.0 + (gamma + std::sqrt(gamma * gamma + 8.0 * mq * gamma)) / (4.0 * mq));
    return static_cast<std::uint64_t>(std::ceil(n));
}

double conditional_coverage(double epsilon, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidInput, "gamma must be positive");
    return epsilon / -std::expm1(-gamma);
}

}  // namespace spotcheck
