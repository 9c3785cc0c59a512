#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace poipred {

// Known positive exposure constants: r_i scales the observed counts, s_i the
// counts to be predicted.
struct ExposurePair {
    std::vector<double> r;
    std::vector<double> s;

    ExposurePair(std::vector<double> r_in, std::vector<double> s_in);
    std::size_t dim() const { return r.size(); }
};

struct CountVector {
    std::vector<int> counts;

    CountVector() = default;
    explicit CountVector(std::vector<int> c);
    std::size_t dim() const { return counts.size(); }
    int operator[](std::size_t i) const { return counts[i]; }
};

struct LambdaVector {
    std::vector<double> lambda;

    explicit LambdaVector(std::vector<double> l);
    std::size_t dim() const { return lambda.size(); }
    double operator[](std::size_t i) const { return lambda[i]; }
};

// Prior lambda_1^{beta_1-1} ... lambda_d^{beta_d-1}.
struct PowerPrior {
    std::vector<double> beta;

    explicit PowerPrior(std::vector<double> b);
};

// Prior prod lambda_i^{beta_i-1} / (sum_i lambda_i/gamma_i)^alpha with
// alpha > 0. alpha == 0 is represented as PowerPrior (use make_prior).
struct ShrinkagePrior {
    double alpha;
    std::vector<double> beta;
    std::vector<double> gamma;

    ShrinkagePrior(double a, std::vector<double> b, std::vector<double> g);
};

using PriorSpec = std::variant<PowerPrior, ShrinkagePrior>;

// Canonicalizing factory: alpha == 0 collapses to PowerPrior since the gamma
// weights drop out of the density.
PriorSpec make_prior(double alpha, std::vector<double> beta, std::vector<double> gamma);

const std::vector<double>& beta_of(const PriorSpec& prior);
std::size_t dim_of(const PriorSpec& prior);
double vec_sum(const std::vector<double>& v);

// Power prior with beta_i = 1/2, proportional to the Jeffreys prior.
PriorSpec jeffreys_prior(std::size_t d);

// Shrinkage prior of the dominance theorem: alpha = sum(beta) - 1 and
// gamma_i = 1/r_i - 1/(r_i+s_i). Requires sum(beta) > 1.
PriorSpec theorem_prior(const ExposurePair& exposures, std::vector<double> beta);

// Harmonic-time schedule: 1/t_i(tau) interpolates linearly between 1/r_i at
// tau=0 and 1/(r_i+s_i) at tau=1, so tdot_i = gamma_i t_i^2 with
// gamma_i = 1/r_i - 1/(r_i+s_i).
struct HarmonicSchedule {
    ExposurePair exposures;
    std::vector<double> gamma;

    explicit HarmonicSchedule(ExposurePair e);

    struct Time {
        std::vector<double> t;
        std::vector<double> tdot;
    };
    Time at(double tau) const;

    // Exposure increment t_i(tau+delta) - t_i(tau) as the exact product
    // delta * gamma_i * t_i(tau) * t_i(tau+delta); no cancellation for small
    // delta.
    std::vector<double> increment(double tau, double delta) const;
};

HarmonicSchedule::Time harmonic_time(const HarmonicSchedule& schedule, double tau);

}  // namespace poipred
