#include "spotcheck/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spotcheck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_common(double omega, double epsilon) {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0,1)");
}

double z_infinity(double omega) { return -std::log1p(-omega); }

}  // namespace

void MomentSpec::validate() const {
    if (!(sigma2_e >= 0.0)) throw Error(ErrorKind::InvalidInput, "sigma2_e must be nonnegative");
    if (m4) {
        if (!(*m4 >= 0.0)) throw Error(ErrorKind::InvalidInput, "m4 must be nonnegative");
        if (m3_abs && *m3_abs > std::sqrt(*m4) * std::sqrt(sigma2_e) + 1e-9)
            throw Error(ErrorKind::InvalidInput, "m3_abs exceeds sqrt(m4) sigma");
    }
}

double b_function(double z0, double omega) {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(z0 >= 0.0) || z0 >= z_infinity(omega))
        throw Error(ErrorKind::DomainError, "B(z) is defined only on [0, ln(1/(1-omega)))");
    const double den = 1.0 - (1.0 - omega) * std::exp(z0);
    return omega * omega * std::exp(z0) / (den * den);
}

double moment_beta(double sigma2, double omega, double epsilon, double n) {
    return std::sqrt(2.0 * omega * -std::log(epsilon) / (sigma2 * n * (1.0 - omega)));
}

double moment_threshold(const MomentSpec& ms, double omega, double epsilon) {
    const double l = z_infinity(omega);
    return 2.0 * omega * ms.theta_e * ms.theta_e * -std::log(epsilon) / ((1.0 - omega) * ms.sigma2_e * l * l);
}

ExtremalEF moment_ef(const MomentSpec& ms, double omega, double epsilon, double n) {
    check_common(omega, epsilon);
    ms.validate();
    if (!(ms.sigma2_e > 0.0)) throw Error(ErrorKind::DomainError, "sigma2_e must be positive");
    if (ms.theta_e < 0.0) throw Error(ErrorKind::DomainError, "theta_e must be nonnegative in shifted units");
    const double n_th = moment_threshold(ms, omega, epsilon);
    if (n < n_th) {
        std::ostringstream os;
        os.precision(17);
        os << "n = " << n << " is below the threshold " << n_th;
        throw Error(ErrorKind::BelowThreshold, os.str());
    }
    const double beta = moment_beta(ms.sigma2_e, omega, epsilon, n);
    const double t = std::min(std::exp(beta * ms.theta_e), 1.0 / (1.0 - omega));
    return ExtremalEF{beta, t, omega, 0.0};
}

ExtremalEF tightness_ef(double theta_e, double sigma2, double omega, double epsilon, double n) {
    check_common(omega, epsilon);
    if (!(sigma2 > 0.0)) throw Error(ErrorKind::DomainError, "sigma2 must be positive");
    if (!(theta_e >= 0.0)) throw Error(ErrorKind::DomainError, "theta_e must be nonnegative");
    const double beta_1 = moment_beta(sigma2, omega, epsilon, n);
    const double beta_ub = theta_e > 0.0 ? z_infinity(omega) / theta_e : kInf;
    const double beta = std::min(beta_1, beta_ub);
    const double t = std::min(std::exp(beta * theta_e), 1.0 / (1.0 - omega));
    return ExtremalEF{beta, t, omega, 0.0};
}

ExtremalEF tightness_ef_bounded(double u, double omega, double epsilon, double n) {
    if (!(u > 0.0)) throw Error(ErrorKind::InvalidInput, "u must be positive");
    return tightness_ef(u / 2.0, u * u / 4.0, omega, epsilon, n);
}

double gap_ceiling(double theta_e, double sigma2_e, double omega) {
    if (theta_e <= 0.0) return kInf;
    return sigma2_e * z_infinity(omega) / (omega * theta_e);
}

ExtremalEF gap_ef(double theta_e, double sigma2_e, double omega, double delta_th) {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(sigma2_e > 0.0)) throw Error(ErrorKind::DomainError, "sigma2_e must be positive");
    if (!(delta_th > 0.0)) throw Error(ErrorKind::InvalidInput, "delta_th must be positive");
    const double ceiling = gap_ceiling(theta_e, sigma2_e, omega);
    if (delta_th > ceiling) {
        std::ostringstream os;
        os.precision(17);
        os << "delta_th exceeds the ceiling " << ceiling;
        throw Error(ErrorKind::GapTooLarge, os.str());
    }
    const double beta = omega * delta_th / (sigma2_e + delta_th * delta_th);
    return ExtremalEF{beta, std::exp(beta * (theta_e - delta_th)), omega, 0.0};
}

double gap_trials_estimate(double sigma2, double omega, double epsilon, double delta_th) {
    return 2.0 * -std::log(epsilon) * (sigma2 + delta_th * delta_th) /
           (omega * (1.0 - omega) * delta_th * delta_th);
}

GapBound expected_gap_bound(double theta, const MomentSpec& ms, double omega, double epsilon, double n,
                            double sigma2_true) {
    check_common(omega, epsilon);
    ms.validate();
    if (!(ms.sigma2_e > 0.0) || !(sigma2_true > 0.0))
        throw Error(ErrorKind::DomainError, "variances must be positive");
    const double lg = -std::log(epsilon);
    const double sigma = std::sqrt(sigma2_true);
    const double sigma_e = std::sqrt(ms.sigma2_e);
    const double z0 = ms.theta_e / sigma_e * std::sqrt(2.0 * omega * lg / (n * (1.0 - omega)));
    GapBound g;
    if (z0 >= z_infinity(omega)) {
        g.regime = GapRegime::InfeasibleT;
        g.value = kInf;
        g.b_factor = kInf;
        return g;
    }
    g.b_factor = b_function(z0, omega);
    const double d = theta - ms.theta_e;
    g.value = sigma * std::sqrt(n * (1.0 - omega) * lg / (2.0 * omega)) *
              (g.b_factor * (sigma / sigma_e + d * d / (sigma * sigma_e)) + sigma_e / sigma);
    return g;
}

double expected_gap_limit(double sigma2, double omega, double epsilon, double n) {
    return std::sqrt(sigma2) * std::sqrt(2.0 * n * (1.0 - omega) * -std::log(epsilon) / omega);
}

double constant_ns_gap_bound(double theta, double sigma, double ns_bar, double epsilon, double n) {
    if (!(sigma > 0.0) || !(epsilon > 0.0 && epsilon < 1.0))
        throw Error(ErrorKind::InvalidInput, "sigma must be positive and epsilon in (0,1)");
    const double lg = -std::log(epsilon);
    const double ratio = theta / sigma;
    const double ns_lb = 32.0 * ratio * ratio * lg;
    if (!(ns_bar > ns_lb)) {
        std::ostringstream os;
        os.precision(17);
        os << "ns_bar must exceed " << ns_lb;
        throw Error(ErrorKind::PreconditionFailed, os.str());
    }
    const double n_min = ns_bar / (1.0 - ns_lb / ns_bar);
    if (n < n_min) {
        std::ostringstream os;
        os.precision(17);
        os << "n must be at least " << n_min;
        throw Error(ErrorKind::PreconditionFailed, os.str());
    }
    const double c = ratio * std::sqrt(2.0 * lg);
    const double k = theta / (sigma * (std::sqrt(ns_bar) - c));
    return sigma * std::sqrt(2.0 * lg / ns_bar) *
           (1.0 + k * std::sqrt(2.0 * lg) * (1.0 + k * std::sqrt(lg / 2.0)));
}

double tightness_gap_bound(double theta, double theta_e, double sigma, double omega, double epsilon,
                           double n) {
    check_common(omega, epsilon);
    const double d = theta - theta_e;
    return std::sqrt(n * (1.0 - omega) * -std::log(epsilon) / (2.0 * omega)) * (d * d / sigma + 2.0 * sigma);
}

}  // namespace spotcheck
