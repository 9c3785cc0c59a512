#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "poipred/model.hpp"

namespace poipred {

// Exact evaluation over certified-truncated count lattices.
struct ExactTruncated {
    double tail_mass;
};

// Outer Monte Carlo over x with exact-truncated inner sums over y.
struct MonteCarloX {
    long n_samples;
    std::uint64_t seed;
    double tail_mass_y;
};

using RiskMethod = std::variant<ExactTruncated, MonteCarloX>;

struct RiskQuery {
    ExposurePair exposures;
    LambdaVector lambda;
    PriorSpec prior;
    RiskMethod method;

    RiskQuery(ExposurePair e, LambdaVector l, PriorSpec p, RiskMethod m);
};

struct RiskReport {
    double risk;       // nats
    double err_bound;  // certified truncation bound plus MC standard error
    long n_k_evals;    // K-integral evaluations behind this report
    std::string method;
};

struct ValueWithBound {
    double value;
    double err_bound;
};

// KL divergence from p(y|lambda) to the predictive density given observed x,
// summed over the certified-truncated y lattice.
double kl_predictive(const ExposurePair& exposures, const LambdaVector& lambda,
                     const PriorSpec& prior, const CountVector& x, double tail_mass);

// KL divergence from p(y|lambda) to the plug-in density p(y|plug), through the
// same lattice machinery (testing hook; zero when plug == lambda).
double kl_plugin(const ExposurePair& exposures, const LambdaVector& lambda,
                 const LambdaVector& plug, double tail_mass);

RiskReport risk_eval(const RiskQuery& query);

// Exact risk of predicting z(tau+delta) - z(tau) from z(tau); tau=0, delta=1
// reproduces risk_eval's exact path.
ValueWithBound horizon_risk(const ExposurePair& exposures, const LambdaVector& lambda,
                            const PriorSpec& prior, double tau, double delta, double tail_mass);

struct IntegrandQuery {
    ExposurePair exposures;
    LambdaVector lambda;
    PriorSpec prior;
    double tau;
    double tail_mass;

    IntegrandQuery(ExposurePair e, LambdaVector l, PriorSpec p, double tau_in, double tail);
};

// Harmonic-time risk integrand
//   E[ sum_i tdot_i { lambda_hat_i(z,tau) - lambda_i
//                     - lambda_i log(lambda_hat_i/lambda_i) } ],
// z ~ prod Poisson(t_i(tau) lambda_i); nonnegative term by term.
double integrand_eval(const IntegrandQuery& query);
ValueWithBound integrand_eval_bounded(const IntegrandQuery& query);

// Same integrand with an arbitrary estimator z -> lambda_hat (testing hook;
// the error field is a heuristic lattice-deficit estimate, not certified).
using EstimatorFn =
    std::function<std::vector<double>(const std::vector<int>&, const std::vector<double>&)>;
ValueWithBound integrand_eval_custom(const ExposurePair& exposures, const LambdaVector& lambda,
                                     double tau, double tail_mass, const EstimatorFn& estimator);

// Integral over tau in [0,1] of the integrand difference between prior_a and
// prior_b (Gauss-Legendre, n_tau nodes); equals risk(a) - risk(b) up to
// quadrature plus truncation error.
ValueWithBound risk_difference_via_integral(const ExposurePair& exposures,
                                            const LambdaVector& lambda, const PriorSpec& prior_a,
                                            const PriorSpec& prior_b, int n_tau,
                                            double tail_mass);

// Power prior and its same-beta shrinkage competitor evaluated on a shared
// lattice or shared Monte Carlo samples; diff = risk(power) - risk(shrink)
// with a paired error bound.
struct PairedRisk {
    RiskReport power;
    RiskReport shrink;
    double diff;
    double diff_err;
};
PairedRisk risk_pair(const ExposurePair& exposures, const LambdaVector& lambda,
                     const PowerPrior& power, const ShrinkagePrior& shrink,
                     const RiskMethod& method);

// Diagonal of the infinitesimal predictive metric,
// g_ii = t_i(tau)^2 / (tdot_i(tau) lambda_i) = r_i (r_i+s_i) / (s_i lambda_i);
// independent of tau on the harmonic schedule.
std::vector<double> predictive_metric_diag(const ExposurePair& exposures,
                                           const LambdaVector& lambda);

// Monte Carlo check of the Poisson shift identity
// E[x_i h(x)] = lambda_i E[h(x + e_i)] per coordinate, at 4 sigma.
struct SteinCheck {
    std::vector<double> z_scores;
    std::vector<double> diffs;
    std::vector<double> std_errs;
    bool pass;
};
SteinCheck stein_identity_check(const LambdaVector& lambda,
                                const std::function<double(const std::vector<int>&)>& h,
                                long n_samples, std::uint64_t seed);

}  // namespace poipred
