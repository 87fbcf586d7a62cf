#include "spotcheck/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spotcheck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inverse_or_zero(double v) { return std::isinf(v) ? 0.0 : 1.0 / v; }

// Shared bracket; `scale` multiplies the finite-n correction term.
double planning_bracket(double theta, double sigma2, double m3_abs, double m4, double r2, double n_a,
                        double n_v, double correction_scale) {
    const double s2r = sigma2 + r2;
    const double c = std::isinf(n_v) ? 0.0 : calibration_c(sigma2, m4, r2, n_v);
    const double ia = inverse_or_zero(n_a);
    const double first = 1.0 - r2 / (2.0 * s2r);
    const double second = 0.5 * (1.0 - r2 / s2r) * (ia + c * ia / 2.0 + c / 2.0);
    const double third = correction_scale / std::pow(s2r, 1.5) *
                         (theta * sigma2 + theta * sigma2 * ia + m3_abs * ia * ia) * (1.0 + c);
    return first + second + third;
}

}  // namespace

ExtremalEF RegularizedMoments::ef(double omega) const {
    return ExtremalEF{beta_tilde, std::exp(beta_tilde * theta_tilde), omega, 0.0};
}

CalibrationResult estimate_pooled(const std::vector<double>& samples) {
    if (samples.size() < 2) throw Error(ErrorKind::TooFewSamples, "need at least two calibration samples");
    CompensatedSum s;
    for (double x : samples) s.add(x);
    const double n = static_cast<double>(samples.size());
    const double mean = s.value() / n;
    CompensatedSum ss;
    for (double x : samples) ss.add((x - mean) * (x - mean));
    CalibrationResult r;
    r.theta_e = mean;
    r.sigma2_e = ss.value() / (n - 1.0);
    r.n_used = samples.size();
    r.estimator = Estimator::Pooled;
    return r;
}

CalibrationResult estimate_split(const std::vector<double>& samples, std::size_t n_a, std::size_t n_v) {
    if (n_a < 1 || n_v < 1) throw Error(ErrorKind::InvalidInput, "n_a and n_v must be positive");
    if (samples.size() < n_a + 2 * n_v)
        throw Error(ErrorKind::TooFewSamples, "need n_a + 2 n_v calibration samples");
    CompensatedSum s;
    for (std::size_t i = 0; i < n_a; ++i) s.add(samples[i]);
    CompensatedSum v;
    for (std::size_t i = 0; i < n_v; ++i) {
        const double d = samples[n_a + 2 * i + 1] - samples[n_a + 2 * i];
        v.add(d * d);
    }
    CalibrationResult r;
    r.theta_e = s.value() / static_cast<double>(n_a);
    r.sigma2_e = v.value() / (2.0 * static_cast<double>(n_v));
    r.n_used = n_a + 2 * n_v;
    r.estimator = Estimator::Split;
    r.n_a = n_a;
    r.n_v = n_v;
    return r;
}

double regularization_theta_u(double r2, double omega, double epsilon, double n) {
    return 0.25 * std::sqrt(r2 * n * omega * (1.0 - omega) / (2.0 * -std::log(epsilon)));
}

RegularizedMoments regularize(const CalibrationResult& cr, double r2, double omega, double epsilon, double n) {
    if (!(r2 > 0.0)) throw Error(ErrorKind::InvalidInput, "r2 must be positive");
    if (!(omega > 0.0 && omega < 1.0) || !(epsilon > 0.0 && epsilon < 1.0))
        throw Error(ErrorKind::InvalidInput, "omega and epsilon must lie in (0,1)");
    RegularizedMoments m;
    m.r2 = r2;
    m.sigma2_tilde = cr.sigma2_e + r2;
    m.beta_tilde = std::sqrt(2.0 * omega * -std::log(epsilon) / (m.sigma2_tilde * n * (1.0 - omega)));
    m.theta_u = regularization_theta_u(r2, omega, epsilon, n);
    m.theta_tilde = std::min(cr.theta_e, m.theta_u);
    return m;
}

double calibration_c(double sigma2, double m4, double r2, double n_v) {
    return (m4 + sigma2 * sigma2) / (2.0 * n_v * r2 * (sigma2 + r2));
}

double calibration_gap_bound(double theta, double sigma2, double m3_abs, double m4, double r2, double omega,
                             double epsilon, double n, double n_a, double n_v) {
    const double lg = -std::log(epsilon);
    const double scale = 2.0 * std::sqrt(1.0 / (omega * n)) * std::sqrt(2.0 * lg / (1.0 - omega));
    return std::sqrt(2.0 * (1.0 - omega) * lg) * std::sqrt(sigma2 + r2) *
           planning_bracket(theta, sigma2, m3_abs, m4, r2, n_a, n_v, scale);
}

double calibration_gap_bound_constant_ns(double theta, double sigma2, double m3_abs, double m4, double r2,
                                         double epsilon, double ns_bar, double n_a, double n_v) {
    const double lg = -std::log(epsilon);
    const double scale = 2.0 * std::sqrt(2.0 * lg / ns_bar);
    return std::sqrt(2.0 * lg) * std::sqrt(sigma2 + r2) *
           planning_bracket(theta, sigma2, m3_abs, m4, r2, n_a, n_v, scale);
}

CalibrationPlan plan_calibration(const PlanInputs& in, double max_inflation) {
    if (!(in.sigma2_lower > 0.0)) throw Error(ErrorKind::InvalidInput, "lower variance bound must be positive");
    if (!(in.sigma2_upper >= in.sigma2_lower)) throw Error(ErrorKind::InvalidInput, "variance range is empty");
    if (!(max_inflation > 0.0)) throw Error(ErrorKind::InvalidInput, "max_inflation must be positive");
    if (!(in.omega > 0.0 && in.omega < 1.0) || !(in.epsilon > 0.0 && in.epsilon < 1.0))
        throw Error(ErrorKind::InvalidInput, "omega and epsilon must lie in (0,1)");

    CalibrationPlan plan;
    plan.r2 = in.sigma2_lower / 4.0;
    const double theta_u = regularization_theta_u(plan.r2, in.omega, in.epsilon, in.n);
    if (theta_u < in.theta_hint) {
        const double ns_needed =
            32.0 * in.theta_hint * in.theta_hint * -std::log(in.epsilon) / (plan.r2 * (1.0 - in.omega));
        std::ostringstream os;
        os.precision(17);
        os << "theta_u = " << theta_u << " is below the mean hint; need n*omega >= " << ns_needed;
        throw Error(ErrorKind::InfeasiblePlan, os.str());
    }
    auto bound = [&](double na, double nv) {
        return calibration_gap_bound(in.theta_hint, in.sigma2_upper, in.m3_abs, in.m4, plan.r2, in.omega,
                                     in.epsilon, in.n, na, nv);
    };
    plan.limit = bound(kInf, kInf);
    for (int k = 0; k <= 20; ++k) {
        const double size = std::ldexp(1.0, k);
        const double b = bound(size, size);
        const double inflation = b / plan.limit - 1.0;
        if (inflation <= max_inflation) {
            plan.n_a = plan.n_v = static_cast<std::size_t>(size);
            plan.bound = b;
            plan.inflation = inflation;
            return plan;
        }
    }
    throw Error(ErrorKind::InfeasiblePlan, "no calibration size up to 2^20 meets the inflation target");
}

}  // namespace spotcheck
