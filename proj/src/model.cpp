#include "poipred/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace poipred {

namespace {

void require_positive(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument(std::string(what) + " entries must be positive finite");
    }
}

}  // namespace

ExposurePair::ExposurePair(std::vector<double> r_in, std::vector<double> s_in)
    : r(std::move(r_in)), s(std::move(s_in)) {
    if (r.empty()) throw std::invalid_argument("ExposurePair: dimension must be >= 1");
    if (r.size() != s.size()) throw std::invalid_argument("ExposurePair: r and s lengths differ");
    require_positive(r, "ExposurePair r");
    require_positive(s, "ExposurePair s");
}

CountVector::CountVector(std::vector<int> c) : counts(std::move(c)) {
    if (counts.empty()) throw std::invalid_argument("CountVector: dimension must be >= 1");
    for (int v : counts) {
        if (v < 0) throw std::invalid_argument("CountVector: entries must be nonnegative");
    }
}

LambdaVector::LambdaVector(std::vector<double> l) : lambda(std::move(l)) {
    if (lambda.empty()) throw std::invalid_argument("LambdaVector: dimension must be >= 1");
    require_positive(lambda, "LambdaVector");
}

PowerPrior::PowerPrior(std::vector<double> b) : beta(std::move(b)) {
    if (beta.empty()) throw std::invalid_argument("PowerPrior: dimension must be >= 1");
    require_positive(beta, "PowerPrior beta");
}

ShrinkagePrior::ShrinkagePrior(double a, std::vector<double> b, std::vector<double> g)
    : alpha(a), beta(std::move(b)), gamma(std::move(g)) {
    if (beta.empty()) throw std::invalid_argument("ShrinkagePrior: dimension must be >= 1");
    if (beta.size() != gamma.size())
        throw std::invalid_argument("ShrinkagePrior: beta and gamma lengths differ");
    require_positive(beta, "ShrinkagePrior beta");
    require_positive(gamma, "ShrinkagePrior gamma");
    const double beta_sum = vec_sum(beta);
    if (!(alpha > 0.0) || !(alpha <= beta_sum))
        throw std::invalid_argument("ShrinkagePrior: requires 0 < alpha <= sum(beta)");
}

PriorSpec make_prior(double alpha, std::vector<double> beta, std::vector<double> gamma) {
    if (alpha < 0.0) throw std::invalid_argument("make_prior: alpha must be >= 0");
    if (alpha == 0.0) return PowerPrior(std::move(beta));
    return ShrinkagePrior(alpha, std::move(beta), std::move(gamma));
}

const std::vector<double>& beta_of(const PriorSpec& prior) {
    if (const auto* p = std::get_if<PowerPrior>(&prior)) return p->beta;
    return std::get<ShrinkagePrior>(prior).beta;
}

std::size_t dim_of(const PriorSpec& prior) { return beta_of(prior).size(); }

double vec_sum(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

PriorSpec jeffreys_prior(std::size_t d) {
    if (d == 0) throw std::invalid_argument("jeffreys_prior: dimension must be >= 1");
    return PowerPrior(std::vector<double>(d, 0.5));
}

PriorSpec theorem_prior(const ExposurePair& exposures, std::vector<double> beta) {
    if (beta.size() != exposures.dim())
        throw std::invalid_argument("theorem_prior: beta length does not match exposures");
    require_positive(beta, "theorem_prior beta");
    const double beta_sum = vec_sum(beta);
    if (!(beta_sum > 1.0))
        throw std::domain_error("theorem_prior: requires sum(beta) > 1");
    std::vector<double> gamma(exposures.dim());
    for (std::size_t i = 0; i < gamma.size(); ++i)
        gamma[i] = 1.0 / exposures.r[i] - 1.0 / (exposures.r[i] + exposures.s[i]);
    return ShrinkagePrior(beta_sum - 1.0, std::move(beta), std::move(gamma));
}

HarmonicSchedule::HarmonicSchedule(ExposurePair e) : exposures(std::move(e)) {
    gamma.resize(exposures.dim());
    for (std::size_t i = 0; i < gamma.size(); ++i)
        gamma[i] = 1.0 / exposures.r[i] - 1.0 / (exposures.r[i] + exposures.s[i]);
}

HarmonicSchedule::Time HarmonicSchedule::at(double tau) const {
    if (!(tau >= 0.0) || !(tau <= 1.0))
        throw std::domain_error("HarmonicSchedule: tau must lie in [0,1]");
    Time out;
    out.t.resize(exposures.dim());
    out.tdot.resize(exposures.dim());
    for (std::size_t i = 0; i < exposures.dim(); ++i) {
        const double inv_t = (1.0 - tau) / exposures.r[i] + tau / (exposures.r[i] + exposures.s[i]);
        out.t[i] = 1.0 / inv_t;
        out.tdot[i] = gamma[i] * out.t[i] * out.t[i];
    }
    return out;
}

std::vector<double> HarmonicSchedule::increment(double tau, double delta) const {
    if (!(delta > 0.0)) throw std::domain_error("HarmonicSchedule: delta must be > 0");
    const Time a = at(tau);
    const Time b = at(tau + delta);
    std::vector<double> dt(exposures.dim());
    for (std::size_t i = 0; i < dt.size(); ++i) dt[i] = delta * gamma[i] * a.t[i] * b.t[i];
    return dt;
}

HarmonicSchedule::Time harmonic_time(const HarmonicSchedule& schedule, double tau) {
    return schedule.at(tau);
}

}  // namespace poipred
