#pragma once

#include <cstdint>

#include "spotcheck/core.hpp"

namespace spotcheck {

// Reference distribution on shifted values (support in [0, inf)).
struct ObjectiveContext {
    ReferenceDistribution dist;
    double omega = 0.1;
    double epsilon = 0.01;
    double n = 1.0;

    void validate() const;
};

struct OptResult {
    double beta = 0.0;
    double t = 1.0;  // shifted factor, in [1, 1/(1-omega)]
    double objective = 0.0;
    bool converged = false;
};

// Natural-log binary entropy of omega.
double binary_entropy(double omega);

// Expected lower bound per trial; -inf when some support point makes the
// checked branch nonpositive.
double objective(const ObjectiveContext& ctx, double beta, double t);

double optimal_t(const ObjectiveContext& ctx, double beta);

// Maximizes objective(beta, optimal_t(beta)). When no positive objective
// exists the best value is returned with converged = false, unless strict
// is set, in which case NoFeasibleBeta is thrown.
OptResult optimize_ef(const ObjectiveContext& ctx, bool strict = false);

enum class MinTrialsForm { ConvexProgram, Numerical };

struct MinTrialsResult {
    std::uint64_t n_min = 0;
    OptResult opt;  // beta and shifted t at n_min
};

// Expected log-factor with t = e^{beta (theta - delta)}; concave in beta.
double log_factor_mean(const ReferenceDistribution& dist, double omega, double delta_th, double beta);

// Smallest n whose expected gap per unchecked trial is at most delta_th.
// Throws Divergent when no n <= 1e12 qualifies.
MinTrialsResult min_trials(const ReferenceDistribution& dist, double omega, double epsilon,
                           double delta_th, MinTrialsForm form = MinTrialsForm::ConvexProgram);

// G(n) = (1-omega) theta - O*(n) - (1-omega) delta_th.
double min_trials_gap(const ReferenceDistribution& dist, double omega, double epsilon,
                      double delta_th, double n);

}  // namespace spotcheck
