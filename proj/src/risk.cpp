#include "poipred/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "poipred/k_table.hpp"
#include "poipred/kfun.hpp"
#include "poipred/lattice.hpp"
#include "poipred/parallel.hpp"
#include "poipred/quadrature.hpp"
#include "poipred/rng.hpp"
#include "poipred/special.hpp"

namespace poipred {

namespace {

constexpr double kMaxExactOuterPoints = 1e5;
constexpr double kMaxExactTotalTerms = 1e8;
constexpr std::size_t kMcChunk = 256;
constexpr std::uint32_t kDomainRiskX = 1;
constexpr std::uint32_t kDomainStein = 2;

// ---------------------------------------------------------------------------
// one-dimensional truncated Poisson marginal

struct Coord1D {
    double mean = 0.0;
    int n = 0;  // inclusive cutoff
    std::vector<double> pmf, log_pmf;
    double tail = 0.0;   // certified P(>n)
    double psum = 0.0;   // sum of pmf over [0,n]
    double mu_hat = 0.0; // sum of pmf * y over [0,n]
};

Coord1D make_coord(double mean, double tail_target) {
    Coord1D c;
    c.mean = mean;
    c.n = poisson_cutoff(mean, tail_target);
    c.tail = poisson_tail_prob(mean, c.n);
    c.pmf.resize(c.n + 1);
    c.log_pmf.resize(c.n + 1);
    for (int k = 0; k <= c.n; ++k) {
        c.log_pmf[k] = poisson_log_pmf(k, mean);
        c.pmf[k] = std::exp(c.log_pmf[k]);
        c.psum += c.pmf[k];
        c.mu_hat += c.pmf[k] * k;
    }
    return c;
}

// ---------------------------------------------------------------------------
// certified affine envelopes

// |log K(g, c + offset, alpha)| <= a0 + sum_j slope_j c_j for all integer
// c >= 0, from the sandwich
//   Gamma(alpha) (sum_j (c_j+offset_j)/g_j)^{-alpha}
//     <= K <= gmax^alpha B(sum(c+offset) - alpha, alpha)
// with |log(base+u)| <= |log base| + u/base and
// |log B(p,alpha)| <= |lgamma(alpha)| + alpha max(|log p|,|log(p+alpha)|)
//                     + alpha/p.
struct AffineCap {
    double a0 = 0.0;
    std::vector<double> slope;
};

AffineCap cap_abs_logk(const std::vector<double>& g, const std::vector<double>& offset,
                       double alpha) {
    const std::size_t d = g.size();
    double base1 = 0.0, off_sum = 0.0, gmax = g[0];
    for (std::size_t j = 0; j < d; ++j) {
        base1 += offset[j] / g[j];
        off_sum += offset[j];
        gmax = std::max(gmax, g[j]);
    }
    const double p0 = off_sum - alpha;
    if (!(p0 > 0.0)) throw std::domain_error("cap_abs_logk: requires alpha < sum(offset)");
    const double alg = std::fabs(log_gamma(alpha));

    const double a_low = alg + alpha * std::fabs(std::log(base1));
    const double a_up = alpha * std::fabs(std::log(gmax)) + alg +
                        alpha * std::max(std::fabs(std::log(p0)), std::fabs(std::log(p0 + alpha))) +
                        alpha / p0;
    AffineCap cap;
    cap.a0 = std::max(a_low, a_up);
    cap.slope.resize(d);
    for (std::size_t j = 0; j < d; ++j)
        cap.slope[j] = std::max(alpha / (base1 * g[j]), alpha / p0);
    return cap;
}

// Uniform bound on -log f_i = log K(g, c+beta, a) - log K(g, c+beta+e_i, a)
// over all integer c >= 0 and all i, from the same sandwich; the bound is
// largest at c = 0.
double neg_log_f_cap(const std::vector<double>& g, double beta_sum, double alpha) {
    double gmax = g[0], gmin = g[0];
    for (double v : g) {
        gmax = std::max(gmax, v);
        gmin = std::min(gmin, v);
    }
    const double p0 = beta_sum - alpha;
    if (!(p0 > 0.0)) throw std::domain_error("neg_log_f_cap: requires alpha < sum(beta)");
    return alpha * std::log(gmax / gmin) + alpha * std::log((beta_sum + 1.0) / p0) + alpha / p0;
}

// ---------------------------------------------------------------------------
// inner KL engine for the horizon problem: observe z(tau) = x (exposures t0),
// score the predictive of the increment (exposures dt) against its true
// Poisson law.

struct InnerVals {
    double kl_power;
    double err_power;
    double corr;      // kl_shrink - kl_power
    double err_corr;
};

struct InnerEngine {
    std::size_t d = 0;
    bool shrink = false;
    std::vector<double> t0, t1, dt, lambda, beta;
    double alpha = 0.0;
    std::vector<double> gnum_vec, gden_vec;
    std::vector<int> xmax;
    std::vector<Coord1D> y;

    std::vector<double> big_l;     // log(lambda_i * t1_i)
    std::vector<double> log_q;     // log(t0_i / t1_i)
    std::vector<double> e_const;   // L*mu_hat - m*psum per coordinate
    std::vector<std::vector<double>> lg;  // lgamma(c + beta_i)

    KTable knum, kden;
    AffineCap capnum;
    double quad_term = 0.0;
    long n_k = 0;

    InnerVals eval(const int* x) const;
    double corr_expect(const int* x) const;  // sum over y box of w(y) log Knum(x+y)
};

InnerEngine make_inner(const ExposurePair& exposures, const LambdaVector& lambda,
                       const PriorSpec& prior, double tau, double delta, double tail,
                       const std::vector<int>& xmax) {
    InnerEngine e;
    e.d = exposures.dim();
    if (lambda.dim() != e.d || dim_of(prior) != e.d || xmax.size() != e.d)
        throw std::invalid_argument("risk engine: dimension mismatch");

    const HarmonicSchedule sched(exposures);
    e.t0 = sched.at(tau).t;
    e.t1 = sched.at(tau + delta).t;
    e.dt = sched.increment(tau, delta);
    e.lambda = lambda.lambda;
    e.beta = beta_of(prior);
    e.xmax = xmax;

    e.y.resize(e.d);
    e.big_l.resize(e.d);
    e.log_q.resize(e.d);
    e.e_const.resize(e.d);
    e.lg.resize(e.d);
    for (std::size_t i = 0; i < e.d; ++i) {
        const double m = e.dt[i] * e.lambda[i];
        e.y[i] = make_coord(m, tail);
        e.big_l[i] = std::log(e.lambda[i] * e.t1[i]);
        e.log_q[i] = std::log(e.t0[i] / e.t1[i]);
        e.e_const[i] = e.big_l[i] * e.y[i].mu_hat - m * e.y[i].psum;
        const int span = xmax[i] + e.y[i].n + 2;
        e.lg[i].resize(span);
        for (int c = 0; c < span; ++c) e.lg[i][c] = log_gamma(c + e.beta[i]);
    }

    if (const auto* sp = std::get_if<ShrinkagePrior>(&prior)) {
        if (!(sp->alpha < vec_sum(sp->beta)))
            throw std::domain_error("risk engine: requires alpha < sum(beta)");
        e.shrink = true;
        e.alpha = sp->alpha;
        e.gnum_vec.resize(e.d);
        e.gden_vec.resize(e.d);
        std::vector<int> num_dims(e.d), den_dims(e.d);
        for (std::size_t i = 0; i < e.d; ++i) {
            e.gnum_vec[i] = e.t1[i] * sp->gamma[i];
            e.gden_vec[i] = e.t0[i] * sp->gamma[i];
            num_dims[i] = xmax[i] + e.y[i].n + 1;
            den_dims[i] = xmax[i] + 1;
        }
        e.knum = build_k_table(e.gnum_vec, e.beta, e.alpha, num_dims);
        e.kden = build_k_table(e.gden_vec, e.beta, e.alpha, den_dims);
        e.capnum = cap_abs_logk(e.gnum_vec, e.beta, e.alpha);
        e.quad_term = 2.0 * (e.knum.max_est + e.kden.max_est);
        e.n_k = e.knum.n_evals + e.kden.n_evals;
    }
    return e;
}

double InnerEngine::corr_expect(const int* x) const {
    // sum over the y box of prod_j pmf_j(y_j) * logK_num(x + y)
    double total = 0.0;
    if (d == 1) {
        const double* tab = knum.logk.data() + x[0];
        const Coord1D& c0 = y[0];
        for (int y0 = 0; y0 <= c0.n; ++y0) total += c0.pmf[y0] * tab[y0];
        return total;
    }
    if (d == 2) {
        const Coord1D& c0 = y[0];
        const Coord1D& c1 = y[1];
        const long s1 = knum.strides[1];
        for (int y1 = 0; y1 <= c1.n; ++y1) {
            const double w1 = c1.pmf[y1];
            const double* tab = knum.logk.data() + (x[1] + y1) * s1 + x[0];
            double row = 0.0;
            for (int y0 = 0; y0 <= c0.n; ++y0) row += c0.pmf[y0] * tab[y0];
            total += w1 * row;
        }
        return total;
    }
    if (d == 3) {
        const Coord1D& c0 = y[0];
        const Coord1D& c1 = y[1];
        const Coord1D& c2 = y[2];
        const long s1 = knum.strides[1], s2 = knum.strides[2];
        for (int y2 = 0; y2 <= c2.n; ++y2) {
            const double w2 = c2.pmf[y2];
            const long base2 = (x[2] + y2) * s2;
            for (int y1 = 0; y1 <= c1.n; ++y1) {
                const double w21 = w2 * c1.pmf[y1];
                const double* tab = knum.logk.data() + base2 + (x[1] + y1) * s1 + x[0];
                double row = 0.0;
                for (int y0 = 0; y0 <= c0.n; ++y0) row += c0.pmf[y0] * tab[y0];
                total += w21 * row;
            }
        }
        return total;
    }
    std::vector<int> yv(d, 0), c(d);
    std::vector<int> cut(d);
    for (std::size_t i = 0; i < d; ++i) cut[i] = y[i].n;
    do {
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            w *= y[i].pmf[yv[i]];
            c[i] = x[i] + yv[i];
        }
        total += w * knum.at(c.data());
    } while (next_point(yv, cut));
    return total;
}

InnerVals InnerEngine::eval(const int* x) const {
    InnerVals out{0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < d; ++i) {
        const Coord1D& ci = y[i];
        const double a = x[i] + beta[i];
        const std::vector<double>& lgi = lg[i];
        double s = 0.0;
        for (int k = 0; k <= ci.n; ++k) s += ci.pmf[k] * lgi[x[i] + k];
        out.kl_power += e_const[i] - (s - ci.psum * lgi[x[i]]) - a * log_q[i] * ci.psum;

        // tail of sum_{y>n} pmf |psi| with
        // |psi(y)| <= |L| y + m + a|log q| + y (max(|log a|, log(a+n+1)) + j/(a+n+1))
        const double m = ci.mean;
        const double rho_a = 1.0 / (a + ci.n + 1.0);
        const double m0 = std::max(std::fabs(std::log(a)), std::log(a + ci.n + 1.0));
        const double abs_l = std::fabs(big_l[i]);
        const double abs_q = std::fabs(log_q[i]);
        const double cap_a = (abs_l + m0) * (ci.n + 1.0) + m + a * abs_q;
        const double cap_b = abs_l + m0 + (ci.n + 1.0) * rho_a;
        out.err_power += poisson_tail_weighted(m, ci.n, cap_a, cap_b, rho_a);
    }

    if (shrink) {
        const double log_den = kden.at(x);
        double p_box = 1.0;
        for (std::size_t i = 0; i < d; ++i) p_box *= y[i].psum;
        const double t = corr_expect(x);
        out.corr = log_den * p_box - t;

        double cap_base = capnum.a0 + std::fabs(log_den);
        for (std::size_t j = 0; j < d; ++j) cap_base += capnum.slope[j] * x[j];
        double cross = 0.0;
        for (std::size_t j = 0; j < d; ++j) cross += capnum.slope[j] * y[j].mean;
        for (std::size_t i = 0; i < d; ++i) {
            const double a0 = cap_base + (cross - capnum.slope[i] * y[i].mean) +
                              capnum.slope[i] * (y[i].n + 1.0);
            out.err_corr += poisson_tail_weighted(y[i].mean, y[i].n, a0, capnum.slope[i], 0.0);
        }
        out.err_corr += quad_term;
    }
    return out;
}

// mean-field cap on E_x[KL_j(x_j)]: bounds the whole-coordinate contribution
// for coordinates away from the truncated one.
double kl_coord_mean_cap(const InnerEngine& e, std::size_t j, double mu_j) {
    const double m = e.y[j].mean;
    const double beta_j = e.beta[j];
    const double abs_q = std::fabs(e.log_q[j]);
    const double e_abs_log = std::fabs(std::log(beta_j)) + std::log1p(mu_j / beta_j);
    return m * (std::fabs(e.big_l[j]) + 1.0) + (mu_j + beta_j) * abs_q + m * e_abs_log +
           (m * m + m) / beta_j;
}

// caps for the omitted outer region x_j > M_j: KL(x) <= sum_l kappa_l(x_l)
// (+ the shrinkage correction cap); assembled per coordinate into the
// (A, B, C) envelope of poisson_tail_weighted.
struct OuterTail {
    double full = 0.0;  // bound for sum_{x notin box} p(x) |KL(x)|
    double diff = 0.0;  // bound for the correction part only
};

OuterTail outer_remainder(const InnerEngine& e, const std::vector<Coord1D>& xc) {
    const std::size_t d = e.d;
    std::vector<double> mu(d);
    for (std::size_t j = 0; j < d; ++j) mu[j] = xc[j].mean;

    std::vector<double> kappa_bar(d);
    for (std::size_t j = 0; j < d; ++j) kappa_bar[j] = kl_coord_mean_cap(e, j, mu[j]);

    AffineCap capden;
    double f0 = 0.0;
    std::vector<double> fslope(d, 0.0);
    if (e.shrink) {
        capden = cap_abs_logk(e.gden_vec, e.beta, e.alpha);
        f0 = capden.a0 + e.capnum.a0;
        for (std::size_t l = 0; l < d; ++l) {
            f0 += e.capnum.slope[l] * e.y[l].mean;
            fslope[l] = capden.slope[l] + e.capnum.slope[l];
        }
    }

    OuterTail out;
    for (std::size_t j = 0; j < d; ++j) {
        const double m = e.y[j].mean;
        const double a0 = xc[j].n + 1.0 + e.beta[j];
        const double abs_q = std::fabs(e.log_q[j]);
        double ka = m * (std::fabs(e.big_l[j]) + 1.0) + a0 * abs_q + m * std::log(a0) +
                    (m * m + m) / a0;
        double kb = abs_q + m / a0;
        for (std::size_t l = 0; l < d; ++l)
            if (l != j) ka += kappa_bar[l];

        double fa = 0.0, fb = 0.0;
        if (e.shrink) {
            fa = f0 + fslope[j] * (xc[j].n + 1.0);
            for (std::size_t l = 0; l < d; ++l)
                if (l != j) fa += fslope[l] * mu[l];
            fb = fslope[j];
            out.diff += poisson_tail_weighted(mu[j], xc[j].n, fa, fb, 0.0);
        }
        out.full += poisson_tail_weighted(mu[j], xc[j].n, ka + fa, kb + fb, 0.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepResult {
    double power = 0.0, err_power = 0.0;
    double shrink = 0.0, err_shrink = 0.0;
    double diff = 0.0, err_diff = 0.0;
    long n_samples = 0;
};

SweepResult exact_sweep(const InnerEngine& e, const std::vector<Coord1D>& xc) {
    const std::size_t d = e.d;
    std::vector<int> cut(d);
    for (std::size_t i = 0; i < d; ++i) cut[i] = xc[i].n;

    SweepResult r;
    std::vector<int> x(d, 0);
    do {
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) w *= xc[i].pmf[x[i]];
        const InnerVals v = e.eval(x.data());
        r.power += w * v.kl_power;
        r.err_power += w * v.err_power;
        if (e.shrink) {
            r.shrink += w * (v.kl_power + v.corr);
            r.err_shrink += w * (v.err_power + v.err_corr);
            r.diff += w * (-v.corr);
            r.err_diff += w * v.err_corr;
        }
    } while (next_point(x, cut));

    const OuterTail tail = outer_remainder(e, xc);
    r.err_power += tail.full;
    r.err_shrink += tail.full;
    r.err_diff += tail.diff;
    return r;
}

std::vector<int> draw_samples(const ExposurePair& exposures, const LambdaVector& lambda,
                              long n, std::uint64_t seed, std::vector<int>& xmax) {
    const std::size_t d = exposures.dim();
    std::vector<int> samples(static_cast<std::size_t>(n) * d);
    parallel_chunks(static_cast<std::size_t>(n), kMcChunk,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t k = begin; k < end; ++k) {
                            RngStream stream(seed, k, kDomainRiskX);
                            for (std::size_t i = 0; i < d; ++i)
                                samples[k * d + i] =
                                    poisson_sample(stream, exposures.r[i] * lambda[i]);
                        }
                    });
    xmax.assign(d, 0);
    for (long k = 0; k < n; ++k)
        for (std::size_t i = 0; i < d; ++i)
            xmax[i] = std::max(xmax[i], samples[static_cast<std::size_t>(k) * d + i]);
    return samples;
}

struct McMoments {
    double vp = 0, vp2 = 0, vs = 0, vs2 = 0, vd = 0, vd2 = 0, ep = 0, ec = 0;
};

SweepResult mc_sweep(const InnerEngine& e, const std::vector<int>& samples, long n) {
    const std::size_t d = e.d;
    const std::size_t n_chunks = (static_cast<std::size_t>(n) + kMcChunk - 1) / kMcChunk;
    std::vector<McMoments> parts(n_chunks);
    parallel_chunks(static_cast<std::size_t>(n), kMcChunk,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                        McMoments acc;
                        for (std::size_t k = begin; k < end; ++k) {
                            const InnerVals v = e.eval(&samples[k * d]);
                            const double p = v.kl_power;
                            const double s = v.kl_power + v.corr;
                            acc.vp += p;
                            acc.vp2 += p * p;
                            acc.ep += v.err_power;
                            if (e.shrink) {
                                acc.vs += s;
                                acc.vs2 += s * s;
                                acc.vd += -v.corr;
                                acc.vd2 += v.corr * v.corr;
                                acc.ec += v.err_corr;
                            }
                        }
                        parts[chunk] = acc;
                    });
    McMoments total;
    for (const McMoments& p : parts) {
        total.vp += p.vp;
        total.vp2 += p.vp2;
        total.vs += p.vs;
        total.vs2 += p.vs2;
        total.vd += p.vd;
        total.vd2 += p.vd2;
        total.ep += p.ep;
        total.ec += p.ec;
    }

    auto mean_se = [n](double s, double s2, double& mean, double& se) {
        mean = s / n;
        if (n > 1) {
            const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
            se = std::sqrt(var / n);
        } else {
            se = 0.0;
        }
    };

    SweepResult r;
    r.n_samples = n;
    double se = 0.0;
    mean_se(total.vp, total.vp2, r.power, se);
    r.err_power = se + total.ep / n;
    if (e.shrink) {
        mean_se(total.vs, total.vs2, r.shrink, se);
        r.err_shrink = se + (total.ep + total.ec) / n;
        mean_se(total.vd, total.vd2, r.diff, se);
        r.err_diff = se + total.ec / n;
    }
    return r;
}

std::string method_string(const RiskMethod& method) {
    char buf[128];
    if (const auto* ex = std::get_if<ExactTruncated>(&method)) {
        std::snprintf(buf, sizeof(buf), "exact(tail_mass=%.3g)", ex->tail_mass);
    } else {
        const auto& mc = std::get<MonteCarloX>(method);
        std::snprintf(buf, sizeof(buf), "mc(n_samples=%ld,seed=%llu,tail_mass_y=%.3g)",
                      mc.n_samples, static_cast<unsigned long long>(mc.seed), mc.tail_mass_y);
    }
    return buf;
}

void check_exact_size(const std::vector<Coord1D>& xc, const InnerEngine& e) {
    double x_points = 1.0, y_points = 1.0;
    for (const Coord1D& c : xc) x_points *= c.n + 1.0;
    for (const Coord1D& c : e.y) y_points *= c.n + 1.0;
    if (x_points > kMaxExactOuterPoints)
        throw std::domain_error(
            "risk_eval: exact x-lattice exceeds 1e5 points; use MonteCarloX");
    if (e.shrink && x_points * y_points > kMaxExactTotalTerms)
        throw std::domain_error(
            "risk_eval: exact lattice exceeds 1e8 terms; use MonteCarloX");
}

}  // namespace

// ---------------------------------------------------------------------------

RiskQuery::RiskQuery(ExposurePair e, LambdaVector l, PriorSpec p, RiskMethod m)
    : exposures(std::move(e)), lambda(std::move(l)), prior(std::move(p)), method(std::move(m)) {
    if (exposures.dim() != lambda.dim() || dim_of(prior) != lambda.dim())
        throw std::invalid_argument("RiskQuery: dimension mismatch");
    const double tail = std::holds_alternative<ExactTruncated>(method)
                            ? std::get<ExactTruncated>(method).tail_mass
                            : std::get<MonteCarloX>(method).tail_mass_y;
    if (!(tail > 0.0) || !(tail <= 1e-4))
        throw std::domain_error("RiskQuery: tail_mass must lie in (0, 1e-4]");
    if (const auto* mc = std::get_if<MonteCarloX>(&method)) {
        if (mc->n_samples < 1) throw std::domain_error("RiskQuery: n_samples must be >= 1");
    }
}

double kl_predictive(const ExposurePair& exposures, const LambdaVector& lambda,
                     const PriorSpec& prior, const CountVector& x, double tail_mass) {
    if (x.dim() != exposures.dim())
        throw std::invalid_argument("kl_predictive: dimension mismatch");
    if (!(tail_mass > 0.0) || !(tail_mass <= 1e-4))
        throw std::domain_error("kl_predictive: tail_mass must lie in (0, 1e-4]");
    const InnerEngine e = make_inner(exposures, lambda, prior, 0.0, 1.0, tail_mass, x.counts);
    const InnerVals v = e.eval(x.counts.data());
    return e.shrink ? v.kl_power + v.corr : v.kl_power;
}

double kl_plugin(const ExposurePair& exposures, const LambdaVector& lambda,
                 const LambdaVector& plug, double tail_mass) {
    if (plug.dim() != exposures.dim()) throw std::invalid_argument("kl_plugin: dimension mismatch");
    if (!(tail_mass > 0.0) || !(tail_mass <= 1e-4))
        throw std::domain_error("kl_plugin: tail_mass must lie in (0, 1e-4]");
    double total = 0.0;
    for (std::size_t i = 0; i < exposures.dim(); ++i) {
        const double m = exposures.s[i] * lambda[i];
        const double mh = exposures.s[i] * plug[i];
        const Coord1D c = make_coord(m, tail_mass);
        double kl = 0.0;
        for (int k = 0; k <= c.n; ++k)
            kl += c.pmf[k] * (c.log_pmf[k] - poisson_log_pmf(k, mh));
        total += kl;
    }
    return total;
}

ValueWithBound horizon_risk(const ExposurePair& exposures, const LambdaVector& lambda,
                            const PriorSpec& prior, double tau, double delta, double tail_mass) {
    const std::size_t d = exposures.dim();
    const HarmonicSchedule sched(exposures);
    const std::vector<double> t0 = sched.at(tau).t;

    std::vector<Coord1D> xc(d);
    std::vector<int> xmax(d);
    for (std::size_t i = 0; i < d; ++i) {
        xc[i] = make_coord(t0[i] * lambda[i], tail_mass);
        xmax[i] = xc[i].n;
    }
    const InnerEngine e = make_inner(exposures, lambda, prior, tau, delta, tail_mass, xmax);
    check_exact_size(xc, e);
    const SweepResult r = exact_sweep(e, xc);
    if (e.shrink) return {r.shrink, r.err_shrink};
    return {r.power, r.err_power};
}

RiskReport risk_eval(const RiskQuery& query) {
    RiskReport report;
    report.method = method_string(query.method);

    if (const auto* ex = std::get_if<ExactTruncated>(&query.method)) {
        const std::size_t d = query.exposures.dim();
        std::vector<Coord1D> xc(d);
        std::vector<int> xmax(d);
        for (std::size_t i = 0; i < d; ++i) {
            xc[i] = make_coord(query.exposures.r[i] * query.lambda[i], ex->tail_mass);
            xmax[i] = xc[i].n;
        }
        const InnerEngine e =
            make_inner(query.exposures, query.lambda, query.prior, 0.0, 1.0, ex->tail_mass, xmax);
        check_exact_size(xc, e);
        const SweepResult r = exact_sweep(e, xc);
        report.risk = e.shrink ? r.shrink : r.power;
        report.err_bound = e.shrink ? r.err_shrink : r.err_power;
        report.n_k_evals = e.n_k;
        return report;
    }

    const auto& mc = std::get<MonteCarloX>(query.method);
    std::vector<int> xmax;
    const std::vector<int> samples =
        draw_samples(query.exposures, query.lambda, mc.n_samples, mc.seed, xmax);
    const InnerEngine e =
        make_inner(query.exposures, query.lambda, query.prior, 0.0, 1.0, mc.tail_mass_y, xmax);
    const SweepResult r = mc_sweep(e, samples, mc.n_samples);
    report.risk = e.shrink ? r.shrink : r.power;
    report.err_bound = e.shrink ? r.err_shrink : r.err_power;
    report.n_k_evals = e.n_k;
    return report;
}

PairedRisk risk_pair(const ExposurePair& exposures, const LambdaVector& lambda,
                     const PowerPrior& power, const ShrinkagePrior& shrink,
                     const RiskMethod& method) {
    if (power.beta != shrink.beta)
        throw std::invalid_argument("risk_pair: priors must share the same beta");
    const PriorSpec shrink_spec = shrink;

    PairedRisk out;
    out.power.method = method_string(method);
    out.shrink.method = out.power.method;

    SweepResult r;
    long n_k = 0;
    if (const auto* ex = std::get_if<ExactTruncated>(&method)) {
        const std::size_t d = exposures.dim();
        std::vector<Coord1D> xc(d);
        std::vector<int> xmax(d);
        for (std::size_t i = 0; i < d; ++i) {
            xc[i] = make_coord(exposures.r[i] * lambda[i], ex->tail_mass);
            xmax[i] = xc[i].n;
        }
        const InnerEngine e =
            make_inner(exposures, lambda, shrink_spec, 0.0, 1.0, ex->tail_mass, xmax);
        check_exact_size(xc, e);
        r = exact_sweep(e, xc);
        n_k = e.n_k;
    } else {
        const auto& mc = std::get<MonteCarloX>(method);
        if (mc.n_samples < 1) throw std::domain_error("risk_pair: n_samples must be >= 1");
        std::vector<int> xmax;
        const std::vector<int> samples =
            draw_samples(exposures, lambda, mc.n_samples, mc.seed, xmax);
        const InnerEngine e =
            make_inner(exposures, lambda, shrink_spec, 0.0, 1.0, mc.tail_mass_y, xmax);
        r = mc_sweep(e, samples, mc.n_samples);
        n_k = e.n_k;
    }

    out.power.risk = r.power;
    out.power.err_bound = r.err_power;
    out.power.n_k_evals = n_k;
    out.shrink.risk = r.shrink;
    out.shrink.err_bound = r.err_shrink;
    out.shrink.n_k_evals = n_k;
    out.diff = r.diff;
    out.diff_err = r.err_diff;
    return out;
}

// ---------------------------------------------------------------------------
// harmonic-time integrand

IntegrandQuery::IntegrandQuery(ExposurePair e, LambdaVector l, PriorSpec p, double tau_in,
                               double tail)
    : exposures(std::move(e)), lambda(std::move(l)), prior(std::move(p)), tau(tau_in),
      tail_mass(tail) {
    if (exposures.dim() != lambda.dim() || dim_of(prior) != lambda.dim())
        throw std::invalid_argument("IntegrandQuery: dimension mismatch");
    if (!(tau >= 0.0) || !(tau <= 1.0))
        throw std::domain_error("IntegrandQuery: tau must lie in [0,1]");
    if (!(tail_mass > 0.0) || !(tail_mass <= 1e-4))
        throw std::domain_error("IntegrandQuery: tail_mass must lie in (0, 1e-4]");
}

namespace {

inline double bregman(double a, double l) { return a - l - l * std::log(a / l); }

struct IntegrandEngine {
    std::size_t d;
    std::vector<double> t, tdot, lambda, beta;
    std::vector<Coord1D> z;
    bool shrink = false;
    double alpha = 0.0;
    std::vector<double> gvec;
    KTable ktab;
    double f_cap = 0.0;
    long n_k = 0;
};

IntegrandEngine make_integrand_engine(const ExposurePair& exposures, const LambdaVector& lambda,
                                      const PriorSpec* prior, double tau, double tail) {
    IntegrandEngine e;
    e.d = exposures.dim();
    const HarmonicSchedule sched(exposures);
    const auto time = sched.at(tau);
    e.t = time.t;
    e.tdot = time.tdot;
    e.lambda = lambda.lambda;
    e.beta = prior ? beta_of(*prior) : std::vector<double>(e.d, 1.0);
    e.z.resize(e.d);
    for (std::size_t i = 0; i < e.d; ++i) e.z[i] = make_coord(e.t[i] * e.lambda[i], tail);

    if (prior != nullptr) {
        if (const auto* sp = std::get_if<ShrinkagePrior>(prior)) {
            if (!(sp->alpha < vec_sum(sp->beta)))
                throw std::domain_error("integrand_eval: requires alpha < sum(beta)");
            e.shrink = true;
            e.alpha = sp->alpha;
            e.gvec.resize(e.d);
            std::vector<int> dims(e.d);
            for (std::size_t i = 0; i < e.d; ++i) {
                e.gvec[i] = e.t[i] * sp->gamma[i];
                dims[i] = e.z[i].n + 2;
            }
            e.ktab = build_k_table(e.gvec, e.beta, e.alpha, dims);
            e.f_cap = neg_log_f_cap(e.gvec, vec_sum(e.beta), e.alpha);
            e.n_k = e.ktab.n_evals;
        }
    }
    return e;
}

// certified remainder for the omitted region z_j > n_j
double integrand_remainder(const IntegrandEngine& e) {
    const std::size_t d = e.d;
    // mean-field cap of tdot_j E[h(lambda_hat_j)] over the full range
    std::vector<double> h_bar(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double mu = e.z[j].mean;
        const double lam = e.lambda[j];
        const double e_a = (mu + e.beta[j]) / e.t[j];
        const double e_abs_log = std::fabs(std::log(e.beta[j] / e.t[j])) +
                                 std::log1p(mu / e.beta[j]) + std::fabs(std::log(lam));
        h_bar[j] = e.tdot[j] * (e_a + lam + lam * e_abs_log);
    }
    double shrink_const = 0.0;
    if (e.shrink) {
        for (std::size_t j = 0; j < d; ++j) shrink_const += e.tdot[j] * e.lambda[j] * e.f_cap;
    }

    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const int n = e.z[j].n;
        const double lam = e.lambda[j];
        const double a0 = (n + 1.0 + e.beta[j]) / e.t[j];
        const double m_log = std::max(std::fabs(std::log(a0)), 0.0) + std::fabs(std::log(lam));
        double cap_a = e.tdot[j] * (a0 + lam + lam * m_log) + shrink_const;
        for (std::size_t l = 0; l < d; ++l)
            if (l != j) cap_a += h_bar[l];
        const double cap_b =
            e.tdot[j] * (1.0 / e.t[j] + lam / (n + 1.0 + e.beta[j]));
        total += poisson_tail_weighted(e.z[j].mean, n, cap_a, cap_b, 0.0);
    }
    if (e.shrink) {
        double sens = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            sens += e.tdot[i] * ((e.z[i].mean + e.beta[i]) / e.t[i] + e.lambda[i]);
        total += 2.0 * e.ktab.max_est * (1.0 + sens);
    }
    return total;
}

ValueWithBound integrand_core(const IntegrandEngine& e, const EstimatorFn* custom) {
    const std::size_t d = e.d;
    std::vector<int> cut(d);
    for (std::size_t i = 0; i < d; ++i) cut[i] = e.z[i].n;

    std::vector<int> z(d, 0), zi(d);
    std::vector<double> lam_hat(d);
    double value = 0.0;
    double max_summand = 0.0;
    do {
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) w *= e.z[i].pmf[z[i]];
        if (custom != nullptr) {
            lam_hat = (*custom)(z, e.t);
        } else {
            for (std::size_t i = 0; i < d; ++i)
                lam_hat[i] = (z[i] + e.beta[i]) / e.t[i];
            if (e.shrink) {
                const double log_den = e.ktab.at(z.data());
                for (std::size_t i = 0; i < d; ++i) {
                    zi = z;
                    ++zi[i];
                    lam_hat[i] *= std::exp(e.ktab.at(zi.data()) - log_den);
                }
            }
        }
        double summand = 0.0;
        for (std::size_t i = 0; i < d; ++i) summand += e.tdot[i] * bregman(lam_hat[i], e.lambda[i]);
        value += w * summand;
        max_summand = std::max(max_summand, std::fabs(summand));
    } while (next_point(z, cut));

    double err;
    if (custom != nullptr) {
        double tails = 0.0;
        for (std::size_t i = 0; i < d; ++i) tails += e.z[i].tail;
        err = 2.0 * tails * std::max(1.0, max_summand);  // heuristic, custom estimators only
    } else {
        err = integrand_remainder(e);
    }
    return {value, err};
}

}  // namespace

ValueWithBound integrand_eval_bounded(const IntegrandQuery& query) {
    const IntegrandEngine e = make_integrand_engine(query.exposures, query.lambda, &query.prior,
                                                    query.tau, query.tail_mass);
    return integrand_core(e, nullptr);
}

double integrand_eval(const IntegrandQuery& query) { return integrand_eval_bounded(query).value; }

ValueWithBound integrand_eval_custom(const ExposurePair& exposures, const LambdaVector& lambda,
                                     double tau, double tail_mass, const EstimatorFn& estimator) {
    if (!(tail_mass > 0.0) || !(tail_mass <= 1e-4))
        throw std::domain_error("integrand_eval_custom: tail_mass must lie in (0, 1e-4]");
    const IntegrandEngine e = make_integrand_engine(exposures, lambda, nullptr, tau, tail_mass);
    return integrand_core(e, &estimator);
}

ValueWithBound risk_difference_via_integral(const ExposurePair& exposures,
                                            const LambdaVector& lambda, const PriorSpec& prior_a,
                                            const PriorSpec& prior_b, int n_tau,
                                            double tail_mass) {
    if (n_tau < 8) throw std::domain_error("risk_difference_via_integral: n_tau must be >= 8");

    auto integrate = [&](int n) {
        std::vector<double> nodes, weights;
        gauss_legendre_01(n, nodes, weights);
        double value = 0.0, err = 0.0;
        for (int k = 0; k < n; ++k) {
            const ValueWithBound ia =
                integrand_eval_bounded(IntegrandQuery(exposures, lambda, prior_a, nodes[k], tail_mass));
            const ValueWithBound ib =
                integrand_eval_bounded(IntegrandQuery(exposures, lambda, prior_b, nodes[k], tail_mass));
            value += weights[k] * (ia.value - ib.value);
            err += weights[k] * (ia.err_bound + ib.err_bound);
        }
        return ValueWithBound{value, err};
    };

    const ValueWithBound full = integrate(n_tau);
    const ValueWithBound half = integrate(std::max(4, n_tau / 2));
    return {full.value, full.err_bound + std::fabs(full.value - half.value)};
}

std::vector<double> predictive_metric_diag(const ExposurePair& exposures,
                                           const LambdaVector& lambda) {
    if (exposures.dim() != lambda.dim())
        throw std::invalid_argument("predictive_metric_diag: dimension mismatch");
    std::vector<double> g(exposures.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = exposures.r[i], s = exposures.s[i];
        g[i] = r * (r + s) / (s * lambda[i]);
    }
    return g;
}

SteinCheck stein_identity_check(const LambdaVector& lambda,
                                const std::function<double(const std::vector<int>&)>& h,
                                long n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::domain_error("stein_identity_check: n_samples must be >= 2");
    const std::size_t d = lambda.dim();
    const std::size_t n_chunks = (static_cast<std::size_t>(n_samples) + kMcChunk - 1) / kMcChunk;
    std::vector<std::vector<double>> sum(n_chunks, std::vector<double>(2 * d, 0.0));

    parallel_chunks(static_cast<std::size_t>(n_samples), kMcChunk,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                        std::vector<int> x(d), xs(d);
                        std::vector<double>& acc = sum[chunk];
                        for (std::size_t k = begin; k < end; ++k) {
                            RngStream stream(seed, k, kDomainStein);
                            for (std::size_t i = 0; i < d; ++i)
                                x[i] = poisson_sample(stream, lambda[i]);
                            const double hx = h(x);
                            for (std::size_t i = 0; i < d; ++i) {
                                xs = x;
                                ++xs[i];
                                const double diff = x[i] * hx - lambda[i] * h(xs);
                                acc[2 * i] += diff;
                                acc[2 * i + 1] += diff * diff;
                            }
                        }
                    });

    SteinCheck out;
    out.z_scores.resize(d);
    out.diffs.resize(d);
    out.std_errs.resize(d);
    out.pass = true;
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            s += sum[c][2 * i];
            s2 += sum[c][2 * i + 1];
        }
        const double mean = s / n_samples;
        const double var = std::max(0.0, (s2 - n_samples * mean * mean) / (n_samples - 1.0));
        const double se = std::sqrt(var / n_samples);
        out.diffs[i] = mean;
        out.std_errs[i] = se;
        out.z_scores[i] = se > 0.0 ? mean / se : (mean == 0.0 ? 0.0 : INFINITY);
        if (!(std::fabs(out.z_scores[i]) <= 4.0)) out.pass = false;
    }
    return out;
}

}  // namespace poipred
