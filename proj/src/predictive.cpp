#include "poipred/predictive.hpp"

#include <cmath>
#include <stdexcept>

#include "poipred/k_table.hpp"
#include "poipred/kfun.hpp"
#include "poipred/lattice.hpp"
#include "poipred/special.hpp"

namespace poipred {

namespace {

struct Times {
    std::vector<double> t0, t1, dt;
};

Times schedule_times(const PredictiveQuery& q) {
    const HarmonicSchedule sched(q.exposures);
    Times out;
    out.t0 = sched.at(q.tau).t;
    out.t1 = sched.at(q.tau + q.delta).t;
    out.dt = sched.increment(q.tau, q.delta);
    return out;
}

std::vector<double> scaled(const std::vector<double>& t, const std::vector<double>& gamma) {
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] * gamma[i];
    return out;
}

std::vector<double> counts_plus(const CountVector& a, const std::vector<double>& offset) {
    std::vector<double> out(offset.size());
    for (std::size_t i = 0; i < offset.size(); ++i) out[i] = a[i] + offset[i];
    return out;
}

}  // namespace

PredictiveQuery::PredictiveQuery(ExposurePair e, PriorSpec p, CountVector x_in, double tau_in,
                                 double delta_in)
    : exposures(std::move(e)), prior(std::move(p)), x(std::move(x_in)), tau(tau_in), delta(delta_in) {
    if (exposures.dim() != x.dim() || dim_of(prior) != x.dim())
        throw std::invalid_argument("PredictiveQuery: dimension mismatch");
    if (!(tau >= 0.0) || !(tau < 1.0))
        throw std::domain_error("PredictiveQuery: tau must lie in [0,1)");
    if (!(delta > 0.0) || !(delta <= 1.0 - tau))
        throw std::domain_error("PredictiveQuery: delta must lie in (0, 1-tau]");
}

double log_pred_power(const PredictiveQuery& q, const CountVector& y) {
    if (y.dim() != q.dim()) throw std::invalid_argument("log_pred_power: dimension mismatch");
    const std::vector<double>& beta = beta_of(q.prior);
    const Times tm = schedule_times(q);
    double lp = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) {
        const double a = q.x[i] + beta[i];
        lp += log_gamma(a + y[i]) - log_gamma(a) - log_factorial(y[i]) + a * std::log(tm.t0[i]) +
              y[i] * std::log(tm.dt[i]) - (a + y[i]) * std::log(tm.t1[i]);
    }
    return lp;
}

double log_pred_shrink(const PredictiveQuery& q, const CountVector& y) {
    const auto* sp = std::get_if<ShrinkagePrior>(&q.prior);
    if (sp == nullptr)
        throw std::invalid_argument("log_pred_shrink: query prior is not a shrinkage prior");
    if (!(sp->alpha < vec_sum(sp->beta)))
        throw std::domain_error("log_pred_shrink: requires alpha < sum(beta)");
    const Times tm = schedule_times(q);
    std::vector<double> xy_beta = counts_plus(q.x, sp->beta);
    for (std::size_t i = 0; i < q.dim(); ++i) xy_beta[i] += y[i];
    const LogK num = k_eval(KArgs(scaled(tm.t1, sp->gamma), std::move(xy_beta), sp->alpha));
    const LogK den = k_eval(KArgs(scaled(tm.t0, sp->gamma), counts_plus(q.x, sp->beta), sp->alpha));
    return log_pred_power(q, y) + num.log_value - den.log_value;
}

double log_pred(const PredictiveQuery& q, const CountVector& y) {
    if (std::holds_alternative<PowerPrior>(q.prior)) return log_pred_power(q, y);
    return log_pred_shrink(q, y);
}

double normalization_check(const PredictiveQuery& q, double tail_mass) {
    if (!(tail_mass > 0.0) || !(tail_mass <= 1e-4))
        throw std::domain_error("normalization_check: tail_mass must lie in (0, 1e-4]");
    const std::vector<double>& beta = beta_of(q.prior);
    const Times tm = schedule_times(q);
    const std::size_t d = q.dim();

    const auto* sp = std::get_if<ShrinkagePrior>(&q.prior);
    double log_den = 0.0;
    if (sp != nullptr) {
        log_den = k_eval(KArgs(scaled(tm.t0, sp->gamma), counts_plus(q.x, sp->beta), sp->alpha))
                      .log_value;
    }

    std::vector<double> a_vec(d), omq(d);
    for (std::size_t i = 0; i < d; ++i) {
        a_vec[i] = q.x[i] + beta[i];
        omq[i] = tm.dt[i] / tm.t1[i];
    }

    // The shrinkage correction K(t1 g, x+y+beta, a)/K(t0 g, x+beta, a) is
    // decreasing in every y_i, so on the region y_i > N_i its supremum sits at
    // y = (N_i+1) e_i; the omitted shrink mass is bounded by
    // sum_i nb_tail_i(N_i) * sup_i. Cutoffs are bumped until that bound
    // drops below tail_mass.
    std::vector<int> cutoff(d);
    for (std::size_t i = 0; i < d; ++i)
        cutoff[i] = nb_cutoff(a_vec[i], omq[i], tail_mass / static_cast<double>(d));
    if (sp != nullptr) {
        auto boundary_sup = [&](std::size_t i) {
            std::vector<double> arg = counts_plus(q.x, sp->beta);
            arg[i] += cutoff[i] + 1.0;
            return std::exp(
                k_eval(KArgs(scaled(tm.t1, sp->gamma), std::move(arg), sp->alpha)).log_value -
                log_den);
        };
        std::vector<double> sup(d);
        for (std::size_t i = 0; i < d; ++i) sup[i] = boundary_sup(i);
        for (int round = 0; round < 200; ++round) {
            double omitted = 0.0;
            std::size_t worst = 0;
            double worst_part = -1.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double part = nb_tail_prob(a_vec[i], omq[i], cutoff[i]) * sup[i];
                omitted += part;
                if (part > worst_part) {
                    worst_part = part;
                    worst = i;
                }
            }
            if (omitted <= tail_mass) break;
            cutoff[worst] += cutoff[worst] / 10 + 5;
            sup[worst] = boundary_sup(worst);
        }
    }

    std::vector<std::vector<double>> pmf(d);
    double total_points = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        pmf[i].resize(cutoff[i] + 1);
        for (int y = 0; y <= cutoff[i]; ++y) pmf[i][y] = std::exp(nb_log_pmf(y, a_vec[i], omq[i]));
        total_points *= cutoff[i] + 1.0;
    }

    if (sp == nullptr) {
        // power prior: the pmf is a product of 1-d negative binomials
        double total = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (double p : pmf[i]) s += p;
            total *= s;
        }
        return total;
    }

    if (total_points > 5e7)
        throw std::domain_error("normalization_check: lattice exceeds 5e7 terms");
    std::vector<int> dims(d);
    for (std::size_t i = 0; i < d; ++i) dims[i] = cutoff[i] + 1;
    const KTable knum =
        build_k_table(scaled(tm.t1, sp->gamma), counts_plus(q.x, sp->beta), sp->alpha, dims);

    double total = 0.0;
    std::vector<int> y(d, 0);
    do {
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) w *= pmf[i][y[i]];
        total += w * std::exp(knum.at(y.data()) - log_den);
    } while (next_point(y, cutoff));
    return total;
}

}  // namespace poipred
