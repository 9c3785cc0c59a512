#include "poipred/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "poipred/kfun.hpp"

namespace poipred {

EstimateQuery::EstimateQuery(std::vector<double> t_in, PriorSpec p, CountVector z_in)
    : t(std::move(t_in)), prior(std::move(p)), z(std::move(z_in)) {
    if (t.size() != z.dim() || dim_of(prior) != z.dim())
        throw std::invalid_argument("EstimateQuery: dimension mismatch");
    for (double v : t) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("EstimateQuery: exposures must be positive");
    }
}

LambdaVector posterior_mean_power(const EstimateQuery& q) {
    const auto* pp = std::get_if<PowerPrior>(&q.prior);
    if (pp == nullptr)
        throw std::invalid_argument("posterior_mean_power: query prior is not a power prior");
    std::vector<double> out(q.dim());
    for (std::size_t i = 0; i < q.dim(); ++i) out[i] = (q.z[i] + pp->beta[i]) / q.t[i];
    return LambdaVector(std::move(out));
}

LambdaVector posterior_mean_shrink(const EstimateQuery& q) {
    const auto* sp = std::get_if<ShrinkagePrior>(&q.prior);
    if (sp == nullptr)
        throw std::invalid_argument("posterior_mean_shrink: query prior is not a shrinkage prior");
    if (!(sp->alpha < vec_sum(sp->beta)))
        throw std::domain_error("posterior_mean_shrink: requires alpha < sum(beta)");

    std::vector<double> gamma_t(q.dim()), x(q.dim());
    for (std::size_t i = 0; i < q.dim(); ++i) {
        gamma_t[i] = q.t[i] * sp->gamma[i];
        x[i] = q.z[i] + sp->beta[i];
    }
    std::vector<double> out(q.dim());
    for (std::size_t i = 0; i < q.dim(); ++i) {
        const double f = shrink_factor(gamma_t, x, sp->alpha, i);
        out[i] = (q.z[i] + sp->beta[i]) / q.t[i] * f;
    }
    return LambdaVector(std::move(out));
}

LambdaVector posterior_mean(const EstimateQuery& q) {
    if (std::holds_alternative<PowerPrior>(q.prior)) return posterior_mean_power(q);
    return posterior_mean_shrink(q);
}

}  // namespace poipred
