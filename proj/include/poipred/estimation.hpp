#pragma once

#include "poipred/model.hpp"

namespace poipred {

// Posterior-mean query: counts z observed under current exposures t_i (for the
// harmonic schedule, t_i = t_i(tau)).
struct EstimateQuery {
    std::vector<double> t;
    PriorSpec prior;
    CountVector z;

    EstimateQuery(std::vector<double> t_in, PriorSpec p, CountVector z_in);
    std::size_t dim() const { return z.dim(); }
};

// (z_i + beta_i) / t_i.
LambdaVector posterior_mean_power(const EstimateQuery& query);

// Power-prior mean times the shrinkage factor
// f_i = K(t gamma, z+beta+e_i, alpha) / K(t gamma, z+beta, alpha) in (0,1).
LambdaVector posterior_mean_shrink(const EstimateQuery& query);

LambdaVector posterior_mean(const EstimateQuery& query);

}  // namespace poipred
