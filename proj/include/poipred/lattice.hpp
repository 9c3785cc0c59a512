#pragma once

#include <vector>

namespace poipred {

double poisson_log_pmf(int k, double mean);

// Smallest cutoff N >= 2*mean + 10 with certified P(Y > N) <= tail. The floor
// keeps the pmf ratio mean/(N+2) <= 1/2 so a geometric envelope certifies all
// tail bounds below.
int poisson_cutoff(double mean, double tail);

// Certified bound on P(Y > N); requires mean/(N+2) < 1.
double poisson_tail_prob(double mean, int N);

// Certified bound on sum_{k > N} pmf(k) * (A + B j + C j^2), j = k - N - 1,
// for nonnegative A, B, C. Uses pmf(N+1+j) <= pmf(N+1) rho^j with
// rho = mean/(N+2).
double poisson_tail_weighted(double mean, int N, double A, double B, double C);

// Negative-binomial pmf with size a and failure probability omq = 1-q:
// log pmf(y) = lgamma(a+y) - lgamma(a) - lgamma(y+1) + a log q + y log omq.
double nb_log_pmf(int y, double a, double omq);

// Cutoff with certified NB tail <= tail under the geometric envelope
// ratio (a+y)/(y+1) * omq.
int nb_cutoff(double a, double omq, double tail);
double nb_tail_prob(double a, double omq, int N);

// Odometer over the box [0,cutoff_1] x ... x [0,cutoff_d]. Returns false when
// the box is exhausted.
bool next_point(std::vector<int>& y, const std::vector<int>& cutoff);

}  // namespace poipred
