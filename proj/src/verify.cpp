#include "poipred/verify.hpp"

#include <cmath>
#include <cstdio>

#include "poipred/kfun.hpp"
#include "poipred/lattice.hpp"
#include "poipred/model.hpp"
#include "poipred/predictive.hpp"
#include "poipred/risk.hpp"
#include "poipred/rng.hpp"

namespace poipred {

namespace {

constexpr std::uint32_t kDomainVerify = 4;

std::string format(const char* fmt, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, a, b);
    return buf;
}

double uniform(RngStream& g, double lo, double hi) { return lo + (hi - lo) * g.next_double(); }

double log_uniform(RngStream& g, double lo, double hi) {
    return std::exp(uniform(g, std::log(lo), std::log(hi)));
}

// signed sum of terms given as (sign, log magnitude); scaled by the common
// maximum so huge K values stay in range
struct SignedLogSum {
    std::vector<double> logs;
    std::vector<double> signs;
    void add(double sign, double log_mag) {
        signs.push_back(sign);
        logs.push_back(log_mag);
    }
};

// relative discrepancy of two signed-log sums
double signed_log_rel_diff(const SignedLogSum& lhs, const SignedLogSum& rhs) {
    double m = -INFINITY;
    for (double l : lhs.logs) m = std::max(m, l);
    for (double l : rhs.logs) m = std::max(m, l);
    double sl = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < lhs.logs.size(); ++i) sl += lhs.signs[i] * std::exp(lhs.logs[i] - m);
    for (std::size_t i = 0; i < rhs.logs.size(); ++i) sr += rhs.signs[i] * std::exp(rhs.logs[i] - m);
    // guard the scale against cancellation below the K accuracy floor
    const double scale = std::max({std::fabs(sl), std::fabs(sr), 1e-4});
    return std::fabs(sl - sr) / scale;
}

struct RandomKArgs {
    std::vector<double> gamma, x;
    double alpha;
};

RandomKArgs random_k_args(RngStream& g) {
    static const int dims[4] = {1, 2, 3, 5};
    const int d = dims[g.next_u32() % 4];
    RandomKArgs a;
    a.gamma.resize(d);
    a.x.resize(d);
    double xs = 0.0;
    for (int i = 0; i < d; ++i) {
        a.gamma[i] = log_uniform(g, 0.1, 10.0);
        a.x[i] = uniform(g, 0.2, 8.0);
        xs += a.x[i];
    }
    a.alpha = 0.9 * xs * g.next_double();
    if (a.alpha <= 0.0) a.alpha = 0.45 * xs;
    return a;
}

}  // namespace

std::vector<CheckResult> verify_kfun_identities(std::uint64_t seed) {
    std::vector<CheckResult> out;
    RngStream g(seed, 0, kDomainVerify);
    constexpr double kTol = 1e-8;

    double worst1 = 0.0, worst2 = 0.0, worst3 = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const RandomKArgs a = random_k_args(g);
        const std::size_t d = a.gamma.size();
        const double log_k = k_eval(KArgs(a.gamma, a.x, a.alpha)).log_value;

        std::vector<double> log_k_up(d), log_k_up_a1(d);
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> xi = a.x;
            xi[i] += 1.0;
            log_k_up[i] = k_eval(KArgs(a.gamma, xi, a.alpha)).log_value;
            log_k_up_a1[i] = k_eval(KArgs(a.gamma, xi, a.alpha + 1.0)).log_value;
        }

        // (1) alpha K(x,a) = sum_i (x_i/gamma_i) K(x+e_i, a+1)
        {
            SignedLogSum lhs, rhs;
            lhs.add(1.0, std::log(a.alpha) + log_k);
            for (std::size_t i = 0; i < d; ++i)
                rhs.add(1.0, std::log(a.x[i] / a.gamma[i]) + log_k_up_a1[i]);
            worst1 = std::max(worst1, signed_log_rel_diff(lhs, rhs));
        }
        // (2) gamma_i K(x,a) = K(x+e_i, a+1) + gamma_i K(x+e_i, a), random i
        {
            const std::size_t i = g.next_u32() % d;
            SignedLogSum lhs, rhs;
            lhs.add(1.0, std::log(a.gamma[i]) + log_k);
            rhs.add(1.0, log_k_up_a1[i]);
            rhs.add(1.0, std::log(a.gamma[i]) + log_k_up[i]);
            worst2 = std::max(worst2, signed_log_rel_diff(lhs, rhs));
        }
        // (3) sum_i b_i K(x+e_i, a)
        //       = sum_i (b_sum x_i/(a gamma_i) - b_i/gamma_i) K(x+e_i, a+1)
        {
            std::vector<double> b(d);
            double b_sum = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                b[i] = uniform(g, -2.0, 2.0);
                b_sum += b[i];
            }
            SignedLogSum lhs, rhs;
            for (std::size_t i = 0; i < d; ++i) {
                if (b[i] != 0.0)
                    lhs.add(b[i] > 0 ? 1.0 : -1.0, std::log(std::fabs(b[i])) + log_k_up[i]);
                const double coeff = b_sum * a.x[i] / (a.alpha * a.gamma[i]) - b[i] / a.gamma[i];
                if (coeff != 0.0)
                    rhs.add(coeff > 0 ? 1.0 : -1.0, std::log(std::fabs(coeff)) + log_k_up_a1[i]);
            }
            worst3 = std::max(worst3, signed_log_rel_diff(lhs, rhs));
        }
    }
    out.push_back({"lemma4.1 partial-integration recurrence (50 randomized)", worst1 <= kTol,
                   worst1, format("worst rel dev %.3g (tol %.1g)", worst1, kTol)});
    out.push_back({"lemma4.2 index-shift recurrence (50 randomized)", worst2 <= kTol, worst2,
                   format("worst rel dev %.3g (tol %.1g)", worst2, kTol)});
    out.push_back({"lemma4.3 weighted-shift recurrence (50 randomized)", worst3 <= kTol, worst3,
                   format("worst rel dev %.3g (tol %.1g)", worst3, kTol)});

    // equal-gamma closed form vs raw quadrature
    double worst_eq = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + static_cast<int>(g.next_u32() % 4);
        const double gamma = log_uniform(g, 0.1, 10.0);
        std::vector<double> gv(d, gamma), x(d);
        double xs = 0.0;
        for (int i = 0; i < d; ++i) {
            x[i] = uniform(g, 0.3, 8.0);
            xs += x[i];
        }
        const double alpha = uniform(g, 0.05, 0.9) * xs;
        const double closed = k_eval(KArgs(gv, x, alpha)).log_value;
        const double quad = k_eval_quadrature(KArgs(gv, x, alpha)).log_value;
        worst_eq = std::max(worst_eq, std::fabs(closed - quad));
    }
    out.push_back({"equal-gamma closed form vs quadrature (20 randomized)", worst_eq <= 1e-10,
                   worst_eq, format("worst |dlog K| %.3g (tol 1e-10)", worst_eq)});
    return out;
}

std::vector<CheckResult> verify_lemma1() {
    const ExposurePair exposures({1.0, 2.0}, {2.0, 1.0});
    const LambdaVector lambda({1.0, 1.0});
    const std::vector<double> beta{1.0, 1.0};
    const PriorSpec power = PowerPrior(beta);
    const PriorSpec shrink = theorem_prior(exposures, beta);
    const double tail = 1e-10;

    const RiskReport rp = risk_eval(RiskQuery(exposures, lambda, power, ExactTruncated{tail}));
    const RiskReport rs = risk_eval(RiskQuery(exposures, lambda, shrink, ExactTruncated{tail}));
    const double direct = rp.risk - rs.risk;
    const ValueWithBound integral =
        risk_difference_via_integral(exposures, lambda, power, shrink, 16, tail);

    const double dev = std::fabs(direct - integral.value);
    const double combined = rp.err_bound + rs.err_bound + integral.err_bound;
    std::vector<CheckResult> out;
    out.push_back({"lemma1 route agreement (d=2 reference config)", dev <= 1e-3, dev,
                   format("|direct - integral| = %.3g (target 1e-3)", dev)});
    out.push_back({"lemma1 route agreement within combined bounds", dev <= combined, dev,
                   format("deviation %.3g vs bound %.3g", dev, combined)});
    return out;
}

std::vector<CheckResult> verify_lemma5(std::uint64_t seed) {
    const LambdaVector lambda({1.0, 1.0});
    const long n = 1000000;
    std::vector<CheckResult> out;

    struct Case {
        const char* name;
        std::function<double(const std::vector<int>&)> h;
    };
    const Case cases[3] = {
        {"lemma5 h(x) = 1", [](const std::vector<int>&) { return 1.0; }},
        {"lemma5 h(x) = x_1", [](const std::vector<int>& x) { return static_cast<double>(x[0]); }},
        {"lemma5 h(x) = 1/(sum x + 1)",
         [](const std::vector<int>& x) {
             int s = 0;
             for (int v : x) s += v;
             return 1.0 / (s + 1.0);
         }},
    };
    for (int c = 0; c < 3; ++c) {
        const SteinCheck check = stein_identity_check(lambda, cases[c].h, n, seed + c);
        double worst = 0.0;
        for (double z : check.z_scores) worst = std::max(worst, std::fabs(z));
        out.push_back({cases[c].name, check.pass, worst,
                       format("worst |z| = %.3g over coordinates (limit 4)", worst)});
    }
    return out;
}

std::vector<CheckResult> verify_normalization(std::uint64_t seed) {
    RngStream g(seed, 1, kDomainVerify);
    double worst_low = 1.0, worst_high = 1.0;
    int accepted = 0;
    while (accepted < 20) {
        const int d = 1 + static_cast<int>(g.next_u32() % 3);
        std::vector<double> r(d), s(d), beta(d), gamma(d);
        std::vector<int> x(d);
        double beta_sum = 0.0;
        for (int i = 0; i < d; ++i) {
            r[i] = uniform(g, 0.5, 4.0);
            s[i] = uniform(g, 0.5, 4.0);
            beta[i] = uniform(g, 0.3, 2.0);
            gamma[i] = log_uniform(g, 0.2, 3.0);
            x[i] = static_cast<int>(g.next_u32() % 6);
            beta_sum += beta[i];
        }
        // keep the lattice small enough for per-point K quadrature
        double points = 1.0;
        for (int i = 0; i < d; ++i)
            points *= nb_cutoff(x[i] + beta[i], s[i] / (r[i] + s[i]), 1e-8 / d) + 1.0;
        if (points > 2e6) continue;

        const bool use_shrink = (accepted % 2) == 1;
        PriorSpec prior = use_shrink
                              ? PriorSpec(ShrinkagePrior(0.9 * beta_sum * g.next_double() + 1e-6,
                                                         beta, gamma))
                              : PriorSpec(PowerPrior(beta));
        const double tail = use_shrink ? 1e-8 : 1e-10;
        const double total = normalization_check(
            PredictiveQuery(ExposurePair(r, s), prior, CountVector(x)), tail);
        worst_low = std::min(worst_low, total);
        worst_high = std::max(worst_high, total);
        ++accepted;
    }
    const bool pass = worst_low >= 1.0 - 1e-6 && worst_high <= 1.0 + 1e-12;
    std::vector<CheckResult> out;
    out.push_back({"predictive normalization (20 randomized queries)", pass,
                   std::max(1.0 - worst_low, worst_high - 1.0),
                   format("sum range [%.12f, %.12f]", worst_low, worst_high)});
    return out;
}

std::vector<CheckResult> verify_metric() {
    const ExposurePair exposures({1.0, 2.0, 3.0}, {2.0, 1.0, 4.0});
    const LambdaVector lambda({0.7, 1.0, 5.0});
    const std::vector<double> metric = predictive_metric_diag(exposures, lambda);
    const HarmonicSchedule sched(exposures);

    const double taus[3] = {0.0, 0.37, 1.0 - 1e-5};
    const double delta = 1e-5;
    double worst = 0.0;
    for (double tau : taus) {
        const auto t0 = sched.at(tau).t;
        const auto t1 = sched.at(tau + delta).t;
        for (std::size_t i = 0; i < exposures.dim(); ++i) {
            const double fd = delta * t0[i] * t0[i] / ((t1[i] - t0[i]) * lambda[i]);
            worst = std::max(worst, std::fabs(fd - metric[i]) / metric[i]);
        }
    }
    std::vector<CheckResult> out;
    out.push_back({"predictive metric vs finite-difference limit", worst <= 1e-4, worst,
                   format("worst rel dev %.3g (tol 1e-4)", worst)});
    return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace poipred
