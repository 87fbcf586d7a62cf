#include "spotcheck/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace spotcheck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTrialCeiling = 1e12;
constexpr double kBinaryTol = 1e-9;

double xlogx_ratio(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); }

void check_probs(double omega, double epsilon) {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0,1]");
}

// Smallest n in [1, ceiling] with pred(n); 0 if none.
template <class P>
std::uint64_t first_true(P&& pred) {
    double hi = 1.0;
    while (!pred(hi)) {
        hi *= 2.0;
        if (hi > kTrialCeiling) {
            if (pred(kTrialCeiling)) {
                hi = kTrialCeiling;
                break;
            }
            return 0;
        }
    }
    double lo = hi == 1.0 ? 0.0 : std::floor(hi / 2.0);
    while (hi - lo > 1.0) {
        const double mid = std::floor((lo + hi) / 2.0);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return static_cast<std::uint64_t>(hi);
}

}  // namespace

void BinaryRange::validate() const {
    if (!(x_lb < x_ub)) throw Error(ErrorKind::InvalidInput, "need x_lb < x_ub");
    if (!(theta_max >= x_lb && theta_max <= x_ub)) throw Error(ErrorKind::InvalidInput, "theta_max outside range");
}

double kl_div(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw Error(ErrorKind::DomainError, "probabilities must lie in [0,1]");
    if (p == q) return 0.0;
    if (q == 0.0 || q == 1.0) throw Error(ErrorKind::DomainError, "q must lie in (0,1) unless p = q");
    return xlogx_ratio(p, q) + xlogx_ratio(1.0 - p, 1.0 - q);
}

double gocanin_level(double omega, double epsilon, double n) {
    const double e = std::expm1(std::log(epsilon) / n);  // eps^{1/n} - 1
    const double arg = e / omega;
    if (arg <= -1.0) return kInf;
    return -std::log1p(arg);
}

double gocanin_f(double p, double d) {
    if (p <= 0.0) return 0.0;
    if (d <= 0.0) return p;
    if (p < 1.0 && d >= -std::log1p(-p)) return 0.0;
    // D(p|q) decreases in q on (0, p]; find the q where it crosses d.
    double lo = 0.0;
    double hi = p;
    for (int it = 0; it < 53; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) break;
        if (kl_div(p, mid) > d)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double gocanin_theta_lb(double p_obs, const BinaryRange& br, double omega, double epsilon, double n) {
    br.validate();
    check_probs(omega, epsilon);
    if (!(p_obs >= 0.0 && p_obs <= 1.0)) throw Error(ErrorKind::InvalidInput, "p_obs must lie in [0,1]");
    const double d = gocanin_level(omega, epsilon, n);
    if (std::isinf(d) || p_obs == 0.0) return br.x_lb;
    return gocanin_f(p_obs, d) * (br.x_ub - br.x_lb) + br.x_lb;
}

ConfidenceReport gocanin_bound_counts(std::uint64_t n, std::uint64_t c_n, std::uint64_t k_ub,
                                      const BinaryRange& br, double omega, double epsilon) {
    const std::uint64_t checked = n - c_n;
    const double p_obs = checked == 0 ? 0.0 : static_cast<double>(k_ub) / static_cast<double>(checked);
    const double theta_lb = gocanin_theta_lb(p_obs, br, omega, epsilon, static_cast<double>(n));
    ConfidenceReport r;
    r.c_n = c_n;
    r.epsilon = epsilon;
    r.beta = std::numeric_limits<double>::quiet_NaN();
    r.log_ef_sum = std::numeric_limits<double>::quiet_NaN();
    r.s_lb = static_cast<double>(n) * theta_lb - static_cast<double>(checked) * br.theta_max;
    r.average_lb = c_n == 0 ? br.x_lb : r.s_lb / static_cast<double>(c_n);
    return r;
}

ConfidenceReport gocanin_bound(const std::vector<TrialRecord>& records, const BinaryRange& br, double omega,
                               double epsilon) {
    br.validate();
    std::uint64_t c_n = 0;
    std::uint64_t k_ub = 0;
    for (const auto& rec : records) {
        rec.validate();
        if (rec.y == 1) {
            ++c_n;
        } else if (rec.y == 0) {
            const double x = *rec.x;
            if (std::abs(x - br.x_ub) <= kBinaryTol)
                ++k_ub;
            else if (std::abs(x - br.x_lb) > kBinaryTol)
                throw Error(ErrorKind::NonBinaryValue,
                            "observed x is neither x_lb nor x_ub (trial " + std::to_string(rec.index) + ")");
        } else {
            throw Error(ErrorKind::InvalidInput, "the hypothesis-test baseline needs y in {0,1}");
        }
    }
    return gocanin_bound_counts(records.size(), c_n, k_ub, br, omega, epsilon);
}

GocaninTrials gocanin_min_trials(double theta, const BinaryRange& br, double omega, double epsilon,
                                 double delta_th) {
    br.validate();
    check_probs(omega, epsilon);
    if (!(theta >= br.x_lb && theta <= br.x_ub)) throw Error(ErrorKind::InvalidInput, "theta outside range");
    const double width = br.x_ub - br.x_lb;
    const double p_theta = (theta - br.x_lb) / width;
    const double target = ((1.0 - omega) * (theta - delta_th) + omega * br.theta_max - br.x_lb) / width;
    GocaninTrials out;
    if (target >= p_theta) {
        out.divergent = true;
        return out;
    }
    const std::uint64_t n = first_true([&](double n) {
        const double d = gocanin_level(omega, epsilon, n);
        if (std::isinf(d)) return target <= 0.0;
        return gocanin_f(p_theta, d) >= target;
    });
    if (n == 0)
        out.divergent = true;
    else
        out.n = n;
    return out;
}

double serfling_penalty(double n, double x_lb, double x_ub, double omega, double epsilon) {
    return std::sqrt(n * (1.0 - omega + 1.0 / n) * -std::log(epsilon) / (2.0 * omega)) * (x_ub - x_lb);
}

ConfidenceReport serfling_bound_sum(std::uint64_t n, std::uint64_t c_n, double checked_sum, double x_lb,
                                    double x_ub, double omega, double epsilon) {
    check_probs(omega, epsilon);
    ConfidenceReport r;
    r.c_n = c_n;
    r.epsilon = epsilon;
    r.beta = std::numeric_limits<double>::quiet_NaN();
    r.log_ef_sum = std::numeric_limits<double>::quiet_NaN();
    r.s_lb = (1.0 - omega) / omega * checked_sum -
             serfling_penalty(static_cast<double>(n), x_lb, x_ub, omega, epsilon);
    r.average_lb = c_n == 0 ? x_lb : r.s_lb / static_cast<double>(c_n);
    return r;
}

ConfidenceReport serfling_bound(const std::vector<TrialRecord>& records, double x_lb, double x_ub, double omega,
                                double epsilon) {
    if (!(x_lb < x_ub)) throw Error(ErrorKind::InvalidInput, "need x_lb < x_ub");
    std::uint64_t c_n = 0;
    CompensatedSum sum;
    for (const auto& rec : records) {
        rec.validate();
        if (rec.y == 1) {
            ++c_n;
        } else if (rec.y == 0) {
            if (*rec.x < x_lb - kBinaryTol || *rec.x > x_ub + kBinaryTol)
                throw Error(ErrorKind::InvalidInput, "observed x outside [x_lb, x_ub]");
            sum.add(*rec.x);
        } else {
            throw Error(ErrorKind::InvalidInput, "the Serfling baseline needs y in {0,1}");
        }
    }
    return serfling_bound_sum(records.size(), c_n, sum.value(), x_lb, x_ub, omega, epsilon);
}

std::uint64_t serfling_min_trials(double theta, double x_lb, double x_ub, double omega, double epsilon,
                                  double delta_th) {
    (void)theta;  // the expected gap does not depend on the mean
    check_probs(omega, epsilon);
    if (!(delta_th > 0.0)) throw Error(ErrorKind::InvalidInput, "delta_th must be positive");
    const std::uint64_t n = first_true([&](double n) {
        return serfling_penalty(n, x_lb, x_ub, omega, epsilon) <= n * (1.0 - omega) * delta_th;
    });
    if (n == 0) throw Error(ErrorKind::Divergent, "minimum trials exceeds 1e12");
    return n;
}

}  // namespace spotcheck
