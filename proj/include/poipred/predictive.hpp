#pragma once

#include "poipred/model.hpp"

namespace poipred {

// Prediction of the increment z(tau+delta) - z(tau) from z(tau) = x. The
// defaults tau = 0, delta = 1 are the original problem: x observed under
// exposures r, the target y under exposures s.
struct PredictiveQuery {
    ExposurePair exposures;
    PriorSpec prior;
    CountVector x;
    double tau = 0.0;
    double delta = 1.0;

    PredictiveQuery(ExposurePair e, PriorSpec p, CountVector x_in, double tau_in = 0.0,
                    double delta_in = 1.0);
    std::size_t dim() const { return x.dim(); }
};

// log of the product-negative-binomial predictive density under the power
// prior.
double log_pred_power(const PredictiveQuery& query, const CountVector& y);

// log of the shrinkage-prior predictive density: the power-prior density times
// K(t(tau+delta) gamma, x+y+beta, alpha) / K(t(tau) gamma, x+beta, alpha).
double log_pred_shrink(const PredictiveQuery& query, const CountVector& y);

// Dispatch on the prior variant.
double log_pred(const PredictiveQuery& query, const CountVector& y);

// Sums the predictive pmf over a truncated lattice whose omitted mass is
// certified below tail_mass; the result should sit within tail_mass * dim of
// 1. tail_mass must lie in (0, 1e-4].
double normalization_check(const PredictiveQuery& query, double tail_mass);

}  // namespace poipred
