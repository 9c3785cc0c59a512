#include "poipred/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "poipred/special.hpp"

namespace poipred {

double poisson_log_pmf(int k, double mean) {
    if (k < 0) return -std::numeric_limits<double>::infinity();
    if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return k * std::log(mean) - mean - log_factorial(k);
}

int poisson_cutoff(double mean, double tail) {
    if (!(mean >= 0.0)) throw std::domain_error("poisson_cutoff: mean must be >= 0");
    if (!(tail > 0.0)) throw std::domain_error("poisson_cutoff: tail must be > 0");
    int n = static_cast<int>(std::ceil(2.0 * mean + 10.0));
    while (poisson_tail_prob(mean, n) > tail) {
        ++n;
        if (n > 100000000) throw std::domain_error("poisson_cutoff: cutoff search overflow");
    }
    return n;
}

double poisson_tail_prob(double mean, int N) {
    const double rho = mean / (N + 2.0);
    if (!(rho < 1.0)) throw std::domain_error("poisson_tail_prob: cutoff below mean");
    return std::exp(poisson_log_pmf(N + 1, mean)) / (1.0 - rho);
}

double poisson_tail_weighted(double mean, int N, double A, double B, double C) {
    const double rho = mean / (N + 2.0);
    if (!(rho < 1.0)) throw std::domain_error("poisson_tail_weighted: cutoff below mean");
    const double p1 = std::exp(poisson_log_pmf(N + 1, mean));
    const double om = 1.0 - rho;
    const double s0 = 1.0 / om;
    const double s1 = rho / (om * om);
    const double s2 = rho * (1.0 + rho) / (om * om * om);
    return p1 * (A * s0 + B * s1 + C * s2);
}

double nb_log_pmf(int y, double a, double omq) {
    if (y < 0) return -std::numeric_limits<double>::infinity();
    return log_gamma(a + y) - log_gamma(a) - log_factorial(y) + a * std::log1p(-omq) +
           y * std::log(omq);
}

int nb_cutoff(double a, double omq, double tail) {
    if (!(a > 0.0)) throw std::domain_error("nb_cutoff: size must be > 0");
    if (!(omq > 0.0 && omq < 1.0)) throw std::domain_error("nb_cutoff: omq must lie in (0,1)");
    if (!(tail > 0.0)) throw std::domain_error("nb_cutoff: tail must be > 0");
    // start beyond the mean and where the pmf ratio envelope is <= (1+omq)/2
    const double c = (1.0 + omq) / (2.0 * omq);  // > 1
    const double mean = a * omq / (1.0 - omq);
    int n = static_cast<int>(std::ceil(std::max({(a + 1.0 - 2.0 * c) / (c - 1.0), 2.0 * mean, 10.0})));
    while (nb_tail_prob(a, omq, n) > tail) {
        ++n;
        if (n > 100000000) throw std::domain_error("nb_cutoff: cutoff search overflow");
    }
    return n;
}

double nb_tail_prob(double a, double omq, int N) {
    const double rho = std::max(omq, (a + N + 1.0) / (N + 2.0) * omq);
    if (!(rho < 1.0)) throw std::domain_error("nb_tail_prob: cutoff too small");
    return std::exp(nb_log_pmf(N + 1, a, omq)) / (1.0 - rho);
}

bool next_point(std::vector<int>& y, const std::vector<int>& cutoff) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < cutoff[i]) {
            ++y[i];
            return true;
        }
        y[i] = 0;
    }
    return false;
}

}  // namespace poipred
