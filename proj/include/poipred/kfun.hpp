#pragma once

#include <cstddef>
#include <vector>

namespace poipred {

// Arguments of the generalized beta integral
//   K(gamma, x, alpha) = int_0^inf u^{alpha-1} prod_i (u/gamma_i + 1)^{-x_i} du.
// Converges iff 0 < alpha < sum(x); x entries are reals (typically z + beta).
struct KArgs {
    std::vector<double> gamma;
    std::vector<double> x;
    double alpha;

    KArgs(std::vector<double> g, std::vector<double> x_in, double a);
    std::size_t dim() const { return gamma.size(); }
    double x_sum() const;
};

struct LogK {
    double log_value;
    double est_rel_err;
};

// Log of K with a closed-form fast path when all gamma_i coincide
// (gamma_1^alpha B(x_sum - alpha, alpha)) and a memoized quadrature path
// otherwise. Thread-safe; concurrent calls with equal arguments return equal
// values.
LogK k_eval(const KArgs& args);

// Quadrature path only, bypassing both the fast path and the cache. Kept
// callable so the closed form and the quadrature can be checked against each
// other.
LogK k_eval_quadrature(const KArgs& args);

// Shrinkage factor f_i = K(gamma_t, x + e_i, alpha) / K(gamma_t, x, alpha),
// strictly inside (0,1).
double shrink_factor(const std::vector<double>& gamma_t, const std::vector<double>& x,
                     double alpha, std::size_t i);

// Cache instrumentation.
std::size_t k_cache_size();
void k_cache_clear();
// Count of quadrature evaluations performed process-wide (cache misses).
std::size_t k_eval_count();

}  // namespace poipred
