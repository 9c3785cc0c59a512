#include "poipred/kfun.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "poipred/quadrature.hpp"
#include "poipred/special.hpp"

// Evaluation scheme. Substituting u = gbar v/(1-v) with gbar the geometric
// mean of gamma gives
//   K = gbar^alpha prod_i gamma_i^{x_i}
//       * int_0^1 v^{alpha-1} (1-v)^{b-1} g(v) dv,   b = x_sum - alpha,
//   log g(v) = -sum_i x_i log(gbar v + gamma_i (1-v)),
// so the endpoint singularities are exactly of beta type and g is smooth and
// positive on [0,1]. The [0,1] integral is split at the beta-kernel mass
// point v* = alpha/(alpha+b); the substitution v = v* w^{1/alpha} on the left
// and 1-v = (1-v*) w^{1/b} on the right turns the singular factor into a
// constant and keeps the remaining factor within a few e-folds on each side:
//   left  = (v*^alpha / alpha)    int_0^1 (1-v(w))^{b-1} g(v(w)) dw,
//   right = ((1-v*)^b / b)        int_0^1 v(w)^{alpha-1} g(v(w)) dw.
// Both halves run through the adaptive log-domain Gauss-Kronrod engine.

namespace poipred {

namespace {

constexpr double kQuadRelTol = 1e-12;
constexpr int kMaxPanels = 600;

std::atomic<std::size_t> g_eval_count{0};

struct CacheShard {
    std::shared_mutex mutex;
    std::unordered_map<std::string, LogK> map;
};

constexpr std::size_t kShards = 64;
std::array<CacheShard, kShards>& cache_shards() {
    static std::array<CacheShard, kShards> shards;
    return shards;
}

// Key rounds every component to 15 significant digits.
std::string cache_key(const KArgs& a) {
    std::string key;
    key.reserve(24 * (2 * a.dim() + 1));
    char buf[32];
    for (double g : a.gamma) {
        std::snprintf(buf, sizeof(buf), "%.15g,", g);
        key += buf;
    }
    key += '|';
    for (double x : a.x) {
        std::snprintf(buf, sizeof(buf), "%.15g,", x);
        key += buf;
    }
    key += '|';
    std::snprintf(buf, sizeof(buf), "%.15g", a.alpha);
    key += buf;
    return key;
}

bool all_gamma_equal(const std::vector<double>& gamma, double& spread_rel) {
    double lo = gamma[0], hi = gamma[0];
    for (double g : gamma) {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    spread_rel = (hi - lo) / lo;
    return spread_rel <= 1e-13;
}

}  // namespace

KArgs::KArgs(std::vector<double> g, std::vector<double> x_in, double a)
    : gamma(std::move(g)), x(std::move(x_in)), alpha(a) {
    if (gamma.empty()) throw std::invalid_argument("KArgs: dimension must be >= 1");
    if (gamma.size() != x.size()) throw std::invalid_argument("KArgs: gamma and x lengths differ");
    for (double v : gamma) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("KArgs: gamma entries must be positive");
    }
    const double xs = x_sum();
    if (!(xs > 0.0)) throw std::domain_error("KArgs: sum(x) must be positive");
    if (!(alpha > 0.0)) throw std::domain_error("KArgs: alpha must be > 0 (integral diverges at 0)");
    if (!(alpha < xs))
        throw std::domain_error("KArgs: alpha must be < sum(x) (integral diverges at infinity)");
}

double KArgs::x_sum() const { return std::accumulate(x.begin(), x.end(), 0.0); }

LogK k_eval_quadrature(const KArgs& a) {
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    const std::size_t d = a.dim();
    const double xs = a.x_sum();
    const double b = xs - a.alpha;

    double log_gbar = 0.0;
    for (double g : a.gamma) log_gbar += std::log(g);
    log_gbar /= static_cast<double>(d);
    const double gbar = std::exp(log_gbar);

    double log_prefactor = a.alpha * log_gbar;
    for (std::size_t i = 0; i < d; ++i) log_prefactor += a.x[i] * std::log(a.gamma[i]);

    auto log_g = [&](double v) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            s -= a.x[i] * std::log(gbar * v + a.gamma[i] * (1.0 - v));
        return s;
    };

    const double split = a.alpha / (a.alpha + b);
    const double inv_alpha = 1.0 / a.alpha;
    auto left = [&](double w) {
        const double v = split * std::pow(w, inv_alpha);
        return (b - 1.0) * std::log1p(-v) + log_g(v);
    };
    const double inv_b = 1.0 / b;
    auto right = [&](double w) {
        const double v = 1.0 - (1.0 - split) * std::pow(w, inv_b);
        return (a.alpha - 1.0) * std::log(v) + log_g(v);
    };

    const LogQuad ql = integrate_log_t(left, 0.0, 1.0, kQuadRelTol, kMaxPanels);
    const LogQuad qr = integrate_log_t(right, 0.0, 1.0, kQuadRelTol, kMaxPanels);

    const double log_left = ql.log_value + a.alpha * std::log(split) - std::log(a.alpha);
    const double log_right = qr.log_value + b * std::log1p(-split) - std::log(b);
    const double log_j = log_sum_exp(log_left, log_right);

    // error shares weighted by each half's contribution
    const double wl = std::exp(log_left - log_j);
    const double wr = std::exp(log_right - log_j);
    const double est = wl * ql.est_rel_err + wr * qr.est_rel_err;

    return LogK{log_prefactor + log_j, est};
}

LogK k_eval(const KArgs& a) {
    double spread_rel = 0.0;
    if (all_gamma_equal(a.gamma, spread_rel)) {
        const double xs = a.x_sum();
        const double log_value =
            a.alpha * std::log(a.gamma[0]) + log_beta(xs - a.alpha, a.alpha);
        return LogK{log_value, 4e-15 + spread_rel * xs};
    }

    const std::string key = cache_key(a);
    CacheShard& shard = cache_shards()[std::hash<std::string>{}(key) % kShards];
    {
        std::shared_lock lock(shard.mutex);
        auto it = shard.map.find(key);
        if (it != shard.map.end()) return it->second;
    }
    const LogK value = k_eval_quadrature(a);
    {
        std::unique_lock lock(shard.mutex);
        shard.map.emplace(key, value);
    }
    return value;
}

double shrink_factor(const std::vector<double>& gamma_t, const std::vector<double>& x,
                     double alpha, std::size_t i) {
    if (i >= gamma_t.size()) throw std::invalid_argument("shrink_factor: index out of range");
    std::vector<double> x_up = x;
    x_up[i] += 1.0;
    const LogK num = k_eval(KArgs(gamma_t, std::move(x_up), alpha));
    const LogK den = k_eval(KArgs(gamma_t, x, alpha));
    return std::exp(num.log_value - den.log_value);
}

std::size_t k_cache_size() {
    std::size_t n = 0;
    for (CacheShard& s : cache_shards()) {
        std::shared_lock lock(s.mutex);
        n += s.map.size();
    }
    return n;
}

void k_cache_clear() {
    for (CacheShard& s : cache_shards()) {
        std::unique_lock lock(s.mutex);
        s.map.clear();
    }
}

std::size_t k_eval_count() { return g_eval_count.load(std::memory_order_relaxed); }

}  // namespace poipred
