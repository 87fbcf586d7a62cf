#include "spotcheck/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <limits>
#include <vector>

#include "spotcheck/numeric.hpp"

namespace spotcheck {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBetaFloor = 1e-12;
constexpr double kTrialCeiling = 1e12;

}  // namespace

void ObjectiveContext::validate() const {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0,1]");
    if (!(n >= 1.0)) throw Error(ErrorKind::InvalidInput, "n must be at least 1");
    if (dist.support().empty()) throw Error(ErrorKind::InvalidInput, "empty reference distribution");
    if (dist.min() < 0.0) throw Error(ErrorKind::InvalidInput, "reference distribution must be shifted to [0,inf)");
}

double binary_entropy(double omega) {
    return -(1.0 - omega) * std::log1p(-omega) - omega * std::log(omega);
}

double objective(const ObjectiveContext& ctx, double beta, double t) {
    const double w = ctx.omega;
    if (!(beta > 0.0) || !(t > 0.0)) return kNegInf;
    double acc = 0.0;
    for (const auto& [x, p] : ctx.dist.support()) {
        if ((1.0 - w) * t * std::exp(-beta * x) >= 1.0) return kNegInf;
        // ln((1 - (1-w) t e^{-beta x}) / w), written to keep precision near beta = 0
        const double u = t * std::expm1(-beta * x) + (t - 1.0);
        acc += p * std::log1p(-(1.0 - w) * u / w);
    }
    const double num = w * acc + (1.0 - w) * std::log(t) + std::log(ctx.epsilon) / ctx.n;
    return num / beta;
}

double optimal_t(const ObjectiveContext& ctx, double beta) {
    const double w = ctx.omega;
    const double t_sup = std::exp(beta * ctx.dist.min()) / (1.0 - w);
    const double hi = std::min(1.0 / (1.0 - w), t_sup - 1e-12);
    auto g = [&](double t) {
        double s = 0.0;
        for (const auto& [x, p] : ctx.dist.support()) s += p * w * t / (std::exp(beta * x) - (1.0 - w) * t);
        return s - 1.0;
    };
    if (hi <= 1.0) return 1.0;
    if (g(hi) <= 0.0) return hi;
    return numeric::bisect_increasing(g, 1.0, hi, 1e-12);
}

OptResult optimize_ef(const ObjectiveContext& ctx, bool strict) {
    ctx.validate();
    auto h = [&](double beta) { return objective(ctx, beta, optimal_t(ctx, beta)); };

    OptResult best;
    best.objective = kNegInf;
    auto consider = [&](double beta, double value) {
        if (value > best.objective || (value == best.objective && beta < best.beta)) {
            best.beta = beta;
            best.objective = value;
        }
    };
    for (double seed : {1e-4, 1e-2, 1.0}) consider(seed, h(seed));
    if (!(best.objective > 0.0)) {
        for (int k = -120; k <= 40; ++k) {
            const double beta = std::pow(10.0, k / 10.0);
            consider(beta, h(beta));
        }
    }
    if (!(best.objective > 0.0)) {
        if (strict)
            throw Error(ErrorKind::NoFeasibleBeta,
                        "no power gives a positive expected bound; increase n or epsilon");
        best.t = optimal_t(ctx, best.beta);
        best.converged = false;
        return best;
    }

    // Any beta beating the best value lies inside [beta_lo, beta_cut].
    const double numerator = binary_entropy(ctx.omega) + std::log(ctx.epsilon) / ctx.n;
    const double beta_cut = numerator / best.objective;
    const double headroom = (1.0 - ctx.omega) * ctx.dist.mean() - best.objective;
    double beta_lo = kBetaFloor;
    if (headroom > 0.0 && ctx.epsilon < 1.0)
        beta_lo = std::max(kBetaFloor, -std::log(ctx.epsilon) / (ctx.n * headroom));
    beta_lo = std::min(beta_lo, beta_cut);

    const double la = std::log(beta_lo);
    const double lc = std::log(beta_cut);
    const int points = std::max(64, static_cast<int>(std::ceil((lc - la) / std::log(10.0) * 12.0)));
    std::vector<double> grid(points + 1);
    int arg = 0;
    double arg_value = kNegInf;
    for (int i = 0; i <= points; ++i) {
        grid[i] = la + (lc - la) * i / points;
        const double v = h(std::exp(grid[i]));
        if (v > arg_value) {
            arg_value = v;
            arg = i;
        }
        consider(std::exp(grid[i]), v);
    }
    const double left = grid[std::max(arg - 1, 0)];
    const double right = grid[std::min(arg + 1, points)];
    const auto [lb, value] = numeric::golden_max([&](double lbeta) { return h(std::exp(lbeta)); }, left,
                                                 right, 1e-10);
    consider(std::exp(lb), value);

    best.t = optimal_t(ctx, best.beta);
    best.objective = objective(ctx, best.beta, best.t);
    best.converged = true;
    return best;
}

double log_factor_mean(const ReferenceDistribution& dist, double omega, double delta_th, double beta) {
    const double theta = dist.mean();
    double acc = 0.0;
    for (const auto& [x, p] : dist.support()) {
        const double z = x - theta + delta_th;
        if ((1.0 - omega) * std::exp(-beta * z) >= 1.0) return kNegInf;
        acc += p * std::log1p(-(1.0 - omega) * std::expm1(-beta * z) / omega);
    }
    return acc;
}

double min_trials_gap(const ReferenceDistribution& dist, double omega, double epsilon, double delta_th,
                      double n) {
    const ObjectiveContext ctx{dist, omega, epsilon, n};
    const OptResult r = optimize_ef(ctx);
    return (1.0 - omega) * dist.mean() - r.objective - (1.0 - omega) * delta_th;
}

MinTrialsResult min_trials(const ReferenceDistribution& dist, double omega, double epsilon, double delta_th,
                           MinTrialsForm form) {
    if (!(delta_th > 0.0)) throw Error(ErrorKind::InvalidInput, "delta_th must be positive");
    ObjectiveContext ctx{dist, omega, epsilon, 1.0};
    ctx.validate();
    const double theta = dist.mean();
    MinTrialsResult out;

    if (form == MinTrialsForm::ConvexProgram) {
        const double theta_e = theta - delta_th;
        double beta_star = 0.0;
        double phi_star = kNegInf;
        if (theta_e <= 0.0) {
            // Every exponent is nonnegative, so the log-factor increases towards
            // ln(1/omega) times the mass strictly above theta_e.
            double mass = 0.0;
            for (const auto& [x, p] : dist.support())
                if (x - theta_e > 0.0) mass += p;
            phi_star = mass * -std::log(omega);
            beta_star = 1.0;
            while (log_factor_mean(dist, omega, delta_th, beta_star) < phi_star * (1.0 - 1e-9) && beta_star < 1e6)
                beta_star *= 2.0;
        } else {
            const double beta_ub = -std::log1p(-omega) / theta_e;
            auto phi = [&](double beta) { return log_factor_mean(dist, omega, delta_th, beta); };
            std::tie(beta_star, phi_star) = numeric::golden_max(phi, 0.0, beta_ub, beta_ub * 1e-13, 400);
            if (phi(beta_ub) > phi_star) {
                beta_star = beta_ub;
                phi_star = phi(beta_ub);
            }
        }
        if (!(phi_star > 0.0)) throw Error(ErrorKind::Divergent, "expected log-factor is never positive");
        const double n_real = -std::log(epsilon) / (omega * phi_star);
        if (!(n_real <= kTrialCeiling)) throw Error(ErrorKind::Divergent, "minimum trials exceeds 1e12");
        out.n_min = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n_real)));
        ctx.n = static_cast<double>(out.n_min);
        out.opt.beta = beta_star;
        out.opt.t = std::exp(beta_star * theta_e);
        out.opt.objective = objective(ctx, out.opt.beta, out.opt.t);
        out.opt.converged = true;
        return out;
    }

    auto gap = [&](double n) { return min_trials_gap(dist, omega, epsilon, delta_th, n); };
    double hi = 1.0;
    while (gap(hi) > 0.0) {
        hi *= 2.0;
        if (hi > kTrialCeiling) throw Error(ErrorKind::Divergent, "minimum trials exceeds 1e12");
    }
    double lo = std::floor(hi / 2.0);
    if (hi == 1.0) lo = 0.0;
    // invariant: gap(lo) > 0 (or lo = 0), gap(hi) <= 0
    while (hi - lo > 1.0) {
        const double mid = std::floor((lo + hi) / 2.0);
        if (gap(mid) <= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    out.n_min = static_cast<std::uint64_t>(hi);
    ctx.n = hi;
    out.opt = optimize_ef(ctx);
    return out;
}

}  // namespace spotcheck
