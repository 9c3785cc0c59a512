// Command-line front end: K-integral evaluation, predictive densities,
// posterior means, risk reports, dominance sweeps, and identity test suites.
//
// Exit codes: 0 success / all checks pass, 1 configuration error,
// 2 numerical precondition violation, 3 verification failure.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poipred/estimation.hpp"
#include "poipred/kfun.hpp"
#include "poipred/model.hpp"
#include "poipred/parallel.hpp"
#include "poipred/predictive.hpp"
#include "poipred/risk.hpp"
#include "poipred/rng.hpp"
#include "poipred/verify.hpp"

using nlohmann::json;
using namespace poipred;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join17(const std::vector<double>& v, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += fmt17(v[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// prior selection shared by the ad-hoc subcommands

struct PriorOptions {
    std::vector<double> beta;
    bool jeffreys = false;
    bool theorem = false;
    double alpha = -1.0;
    std::vector<double> gamma;
};

void add_prior_options(CLI::App* cmd, PriorOptions& opts) {
    cmd->add_option("--beta", opts.beta, "prior exponents beta_i")->delimiter(',');
    cmd->add_flag("--jeffreys", opts.jeffreys, "use beta_i = 1/2 (Jeffreys)");
    cmd->add_flag("--theorem", opts.theorem,
                  "shrinkage prior with alpha = sum(beta)-1, gamma_i = 1/r_i - 1/(r_i+s_i)");
    cmd->add_option("--alpha", opts.alpha, "explicit shrinkage exponent alpha");
    cmd->add_option("--gamma", opts.gamma, "explicit shrinkage weights gamma_i")->delimiter(',');
}

PriorSpec resolve_prior(const PriorOptions& opts, const ExposurePair& exposures) {
    std::vector<double> beta = opts.beta;
    if (opts.jeffreys) beta.assign(exposures.dim(), 0.5);
    if (beta.empty()) throw std::invalid_argument("prior: --beta or --jeffreys is required");
    if (opts.theorem) return theorem_prior(exposures, beta);
    if (opts.alpha >= 0.0) {
        if (opts.alpha > 0.0 && opts.gamma.empty())
            throw std::invalid_argument("prior: explicit --alpha requires --gamma");
        return make_prior(opts.alpha, beta, opts.gamma);
    }
    return PowerPrior(beta);
}

// for subcommands that take --t directly (no exposures to derive gamma from)
PriorSpec resolve_prior_flat(const PriorOptions& opts, std::size_t d) {
    if (opts.theorem)
        throw std::invalid_argument("prior: --theorem requires --r and --s");
    std::vector<double> beta = opts.beta;
    if (opts.jeffreys) beta.assign(d, 0.5);
    if (beta.empty()) throw std::invalid_argument("prior: --beta or --jeffreys is required");
    if (opts.alpha >= 0.0) {
        if (opts.alpha > 0.0 && opts.gamma.empty())
            throw std::invalid_argument("prior: explicit --alpha requires --gamma");
        return make_prior(opts.alpha, beta, opts.gamma);
    }
    return PowerPrior(beta);
}

// ---------------------------------------------------------------------------
// dominance experiment configuration

struct ExperimentConfig {
    std::vector<double> r, s, beta;
    std::string prior = "jeffreys";  // jeffreys | power | theorem-shrinkage | explicit
    double alpha = -1.0;             // explicit prior only
    std::vector<double> gamma;       // explicit prior only
    std::vector<std::vector<double>> lambda_grid;
    long subsample_count = 0;  // 0 = full grid
    std::uint64_t subsample_seed = 0;
    std::string method = "mc";  // exact | mc
    double tail_mass = 1e-8;
    long n_samples = 50000;
    std::uint64_t seed = 0;
    int n_tau = 16;
    bool cross_check = false;
    std::string output_path = "-";
    std::string format = "csv";  // csv | jsonl
};

std::vector<double> logspace(double from, double to, int n) {
    if (n < 1 || !(from > 0.0) || !(to > 0.0))
        throw std::invalid_argument("config: logspace requires n >= 1 and positive endpoints");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = from;
        return out;
    }
    const double lf = std::log(from), lt = std::log(to);
    for (int i = 0; i < n; ++i) out[i] = std::exp(lf + (lt - lf) * i / (n - 1.0));
    return out;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("exposures")) {
        cfg.r = j.at("exposures").at("r").get<std::vector<double>>();
        cfg.s = j.at("exposures").at("s").get<std::vector<double>>();
    }
    if (j.contains("beta")) cfg.beta = j.at("beta").get<std::vector<double>>();
    if (j.contains("prior")) {
        if (j.at("prior").is_string()) {
            cfg.prior = j.at("prior").get<std::string>();
        } else {
            cfg.prior = "explicit";
            cfg.alpha = j.at("prior").at("alpha").get<double>();
            cfg.gamma = j.at("prior").at("gamma").get<std::vector<double>>();
        }
    }
    if (j.contains("lambda_grid")) {
        for (const json& coord : j.at("lambda_grid")) {
            if (coord.is_array()) {
                cfg.lambda_grid.push_back(coord.get<std::vector<double>>());
            } else {
                const json& ls = coord.at("logspace");
                cfg.lambda_grid.push_back(logspace(ls.at("from").get<double>(),
                                                   ls.at("to").get<double>(),
                                                   ls.at("n").get<int>()));
            }
        }
    }
    if (j.contains("subsample")) {
        cfg.subsample_count = j.at("subsample").at("count").get<long>();
        if (j.at("subsample").contains("seed"))
            cfg.subsample_seed = j.at("subsample").at("seed").get<std::uint64_t>();
    }
    if (j.contains("method")) {
        const json& m = j.at("method");
        if (m.contains("type")) cfg.method = m.at("type").get<std::string>();
        if (m.contains("tail_mass")) cfg.tail_mass = m.at("tail_mass").get<double>();
        if (m.contains("n_samples")) cfg.n_samples = m.at("n_samples").get<long>();
        if (m.contains("seed")) cfg.seed = m.at("seed").get<std::uint64_t>();
    }
    if (j.contains("n_tau")) cfg.n_tau = j.at("n_tau").get<int>();
    if (j.contains("cross_check")) cfg.cross_check = j.at("cross_check").get<bool>();
    if (j.contains("output")) {
        if (j.at("output").contains("path")) cfg.output_path = j.at("output").at("path");
        if (j.at("output").contains("format")) cfg.format = j.at("output").at("format");
    }
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["exposures"] = {{"r", cfg.r}, {"s", cfg.s}};
    j["beta"] = cfg.beta;
    if (cfg.prior == "explicit") {
        j["prior"] = {{"alpha", cfg.alpha}, {"gamma", cfg.gamma}};
    } else {
        j["prior"] = cfg.prior;
    }
    j["lambda_grid"] = cfg.lambda_grid;
    j["subsample"] = {{"count", cfg.subsample_count}, {"seed", cfg.subsample_seed}};
    j["method"] = {{"type", cfg.method},
                   {"tail_mass", cfg.tail_mass},
                   {"n_samples", cfg.n_samples},
                   {"seed", cfg.seed}};
    j["n_tau"] = cfg.n_tau;
    j["cross_check"] = cfg.cross_check;
    j["output"] = {{"path", cfg.output_path}, {"format", cfg.format}};
    return j;
}

void validate_config(ExperimentConfig& cfg) {
    if (cfg.r.empty()) throw std::invalid_argument("config: exposures.r is required");
    const ExposurePair exposures(cfg.r, cfg.s);  // validates shapes
    if (cfg.prior == "jeffreys") {
        cfg.beta.assign(exposures.dim(), 0.5);
    } else if (cfg.beta.size() != exposures.dim()) {
        throw std::invalid_argument("config: beta length must match exposures");
    }
    if (cfg.prior != "jeffreys" && cfg.prior != "power" && cfg.prior != "theorem-shrinkage" &&
        cfg.prior != "explicit")
        throw std::invalid_argument("config: unknown prior selection '" + cfg.prior + "'");
    if (cfg.lambda_grid.size() != exposures.dim())
        throw std::invalid_argument("config: lambda_grid needs one value list per coordinate");
    for (const auto& values : cfg.lambda_grid) {
        if (values.empty()) throw std::invalid_argument("config: empty lambda grid coordinate");
        for (double v : values) {
            if (!(v > 0.0)) throw std::invalid_argument("config: lambda grid values must be > 0");
        }
    }
    if (cfg.method != "exact" && cfg.method != "mc")
        throw std::invalid_argument("config: method.type must be 'exact' or 'mc'");
    if (cfg.format != "csv" && cfg.format != "jsonl")
        throw std::invalid_argument("config: output.format must be 'csv' or 'jsonl'");
    if (cfg.n_tau < 8) throw std::domain_error("config: n_tau must be >= 8");
}

std::vector<std::vector<double>> expand_grid(const ExperimentConfig& cfg) {
    std::size_t total = 1;
    for (const auto& values : cfg.lambda_grid) total *= values.size();

    std::vector<std::size_t> selected(total);
    for (std::size_t i = 0; i < total; ++i) selected[i] = i;
    if (cfg.subsample_count > 0 && static_cast<std::size_t>(cfg.subsample_count) < total) {
        // partial Fisher-Yates over the flattened grid, then restore grid order
        RngStream g(cfg.subsample_seed, 0, 3);
        for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.subsample_count); ++i) {
            const std::size_t j = i + g.next_u32() % (total - i);
            std::swap(selected[i], selected[j]);
        }
        selected.resize(cfg.subsample_count);
        std::sort(selected.begin(), selected.end());
    }

    std::vector<std::vector<double>> points;
    points.reserve(selected.size());
    for (std::size_t flat : selected) {
        std::vector<double> lambda(cfg.lambda_grid.size());
        std::size_t rem = flat;
        for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
            lambda[i] = cfg.lambda_grid[i][rem % cfg.lambda_grid[i].size()];
            rem /= cfg.lambda_grid[i].size();
        }
        points.push_back(std::move(lambda));
    }
    return points;
}

// ---------------------------------------------------------------------------
// subcommand implementations

int run_kfun(const std::vector<double>& gamma, const std::vector<double>& x, double alpha,
             int shrink_index) {
    if (shrink_index >= 0) {
        const double f =
            shrink_factor(gamma, x, alpha, static_cast<std::size_t>(shrink_index));
        std::printf("f_%d=%s\n", shrink_index, fmt17(f).c_str());
        return 0;
    }
    const LogK k = k_eval(KArgs(gamma, x, alpha));
    std::printf("log_k=%s k=%s est_rel_err=%s\n", fmt17(k.log_value).c_str(),
                fmt17(std::exp(k.log_value)).c_str(), fmt17(k.est_rel_err).c_str());
    return 0;
}

int run_dominance(ExperimentConfig cfg, bool dump_config) {
    validate_config(cfg);
    if (dump_config) {
        std::cout << config_to_json(cfg).dump(2) << "\n";
        return 0;
    }

    const ExposurePair exposures(cfg.r, cfg.s);
    const PowerPrior power(cfg.beta);
    PriorSpec shrink_spec =
        cfg.prior == "explicit" ? make_prior(cfg.alpha, cfg.beta, cfg.gamma)
                                : theorem_prior(exposures, cfg.beta);
    const auto* shrink = std::get_if<ShrinkagePrior>(&shrink_spec);
    if (shrink == nullptr)
        throw std::domain_error("dominance: explicit prior with alpha = 0 has nothing to compare");

    const auto points = expand_grid(cfg);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.output_path != "-") {
        file.open(cfg.output_path, std::ios::binary);
        if (!file) throw std::invalid_argument("dominance: cannot open " + cfg.output_path);
        out = &file;
    }

    const std::size_t d = exposures.dim();
    std::ostringstream header;
    header << "# poisson-predict dominance\n";
    header << "# r=" << join17(cfg.r) << " s=" << join17(cfg.s) << " beta=" << join17(cfg.beta)
           << " prior=" << cfg.prior << " alpha=" << fmt17(shrink->alpha)
           << " gamma=" << join17(shrink->gamma) << "\n";
    header << "# method=" << cfg.method << " tail_mass=" << fmt17(cfg.tail_mass)
           << " n_samples=" << cfg.n_samples << " seed=" << cfg.seed << " n_tau=" << cfg.n_tau
           << " subsample_count=" << cfg.subsample_count
           << " subsample_seed=" << cfg.subsample_seed << "\n";

    if (cfg.format == "csv") {
        *out << header.str();
        for (std::size_t i = 1; i <= d; ++i) *out << "lambda_" << i << ",";
        *out << "risk_power,risk_shrink,diff,diff_err,";
        if (cfg.cross_check) *out << "integral_diff,";
        *out << "dominates\n";
    } else {
        json prov;
        prov["provenance"] = {{"r", cfg.r},
                              {"s", cfg.s},
                              {"beta", cfg.beta},
                              {"prior", cfg.prior},
                              {"alpha", shrink->alpha},
                              {"gamma", shrink->gamma},
                              {"method", cfg.method},
                              {"tail_mass", cfg.tail_mass},
                              {"n_samples", cfg.n_samples},
                              {"seed", cfg.seed},
                              {"n_tau", cfg.n_tau}};
        *out << prov.dump() << "\n";
    }

    bool all_dominate = true;
    bool any_error = false;
    for (std::size_t row = 0; row < points.size(); ++row) {
        const LambdaVector lambda(points[row]);
        double risk_p = NAN, risk_s = NAN, diff = NAN, diff_err = NAN, integral = NAN;
        int dominates = 0;
        try {
            RiskMethod method;
            if (cfg.method == "exact") {
                method = ExactTruncated{cfg.tail_mass};
            } else {
                // decorrelate sampling across rows while keeping one config seed
                const std::uint64_t row_seed = cfg.seed ^ (row * 0x9E3779B97F4A7C15ull);
                method = MonteCarloX{cfg.n_samples, row_seed, cfg.tail_mass};
            }
            const PairedRisk pair = risk_pair(exposures, lambda, power, *shrink, method);
            risk_p = pair.power.risk;
            risk_s = pair.shrink.risk;
            diff = pair.diff;
            diff_err = pair.diff_err;
            dominates = (diff > 3.0 * diff_err) ? 1 : 0;
            if (cfg.cross_check)
                integral = risk_difference_via_integral(exposures, lambda, power, shrink_spec,
                                                        cfg.n_tau, std::min(cfg.tail_mass, 1e-8))
                               .value;
        } catch (const std::exception& e) {
            std::cerr << "row " << row << " (lambda=" << join17(points[row])
                      << ") failed: " << e.what() << "\n";
            any_error = true;
        }
        if (dominates == 0) all_dominate = false;

        if (cfg.format == "csv") {
            for (std::size_t i = 0; i < d; ++i) *out << fmt17(points[row][i]) << ",";
            *out << fmt17(risk_p) << "," << fmt17(risk_s) << "," << fmt17(diff) << ","
                 << fmt17(diff_err) << ",";
            if (cfg.cross_check) *out << fmt17(integral) << ",";
            *out << dominates << "\n";
        } else {
            json rowj;
            rowj["lambda"] = points[row];
            rowj["risk_power"] = risk_p;
            rowj["risk_shrink"] = risk_s;
            rowj["diff"] = diff;
            rowj["diff_err"] = diff_err;
            if (cfg.cross_check) rowj["integral_diff"] = integral;
            rowj["dominates"] = dominates;
            *out << rowj.dump() << "\n";
        }
    }
    out->flush();
    return (all_dominate && !any_error) ? 0 : 3;
}

int run_verify(const std::string& suite, std::uint64_t seed) {
    std::vector<CheckResult> results;
    if (suite == "kfun-identities") {
        results = verify_kfun_identities(seed);
    } else if (suite == "lemma1") {
        results = verify_lemma1();
    } else if (suite == "lemma5") {
        results = verify_lemma5(seed);
    } else if (suite == "normalization") {
        results = verify_normalization(seed);
    } else if (suite == "metric") {
        results = verify_metric();
    } else {
        throw std::invalid_argument(
            "verify: unknown suite '" + suite +
            "' (expected kfun-identities | lemma1 | lemma5 | normalization | metric)");
    }
    for (const CheckResult& r : results)
        std::printf("[%s] %s: %s\n", r.pass ? " ok " : "FAIL", r.name.c_str(), r.detail.c_str());
    return all_pass(results) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian predictive densities and Kullback-Leibler risk for independent "
                 "Poisson observables with heterogeneous exposures"};
    app.require_subcommand(1);

    // ---- kfun ----
    std::vector<double> kf_gamma, kf_x;
    double kf_alpha = 0.0;
    int kf_index = -1;
    CLI::App* kfun_cmd = app.add_subcommand("kfun", "evaluate the generalized beta integral K");
    kfun_cmd->add_option("--gamma", kf_gamma, "gamma_i > 0")->required()->delimiter(',');
    kfun_cmd->add_option("--x", kf_x, "exponents x_i")->required()->delimiter(',');
    kfun_cmd->add_option("--alpha", kf_alpha, "0 < alpha < sum(x)")->required();
    kfun_cmd->add_option("--shrink-index", kf_index,
                         "print the shrinkage factor f_i instead of K");

    // ---- predict ----
    std::vector<double> pr_r, pr_s;
    std::vector<int> pr_x, pr_y;
    double pr_tau = 0.0, pr_delta = 1.0, pr_norm_tail = 0.0;
    PriorOptions pr_prior;
    CLI::App* predict_cmd = app.add_subcommand("predict", "evaluate a predictive density");
    predict_cmd->add_option("--r", pr_r, "observation exposures")->required()->delimiter(',');
    predict_cmd->add_option("--s", pr_s, "prediction exposures")->required()->delimiter(',');
    predict_cmd->add_option("--x", pr_x, "observed counts")->required()->delimiter(',');
    predict_cmd->add_option("--y", pr_y, "target counts")->delimiter(',');
    predict_cmd->add_option("--tau", pr_tau, "observation time in [0,1)");
    predict_cmd->add_option("--delta", pr_delta, "prediction horizon in (0, 1-tau]");
    predict_cmd->add_option("--normalization", pr_norm_tail,
                            "sum the pmf over a lattice with this certified tail");
    add_prior_options(predict_cmd, pr_prior);

    // ---- estimate ----
    std::vector<double> es_r, es_s, es_t;
    std::vector<int> es_z;
    double es_tau = 0.0;
    PriorOptions es_prior;
    CLI::App* estimate_cmd = app.add_subcommand("estimate", "posterior mean of lambda");
    estimate_cmd->add_option("--t", es_t, "current exposures t_i")->delimiter(',');
    estimate_cmd->add_option("--r", es_r, "observation exposures")->delimiter(',');
    estimate_cmd->add_option("--s", es_s, "prediction exposures")->delimiter(',');
    estimate_cmd->add_option("--tau", es_tau, "harmonic time in [0,1]");
    estimate_cmd->add_option("--z", es_z, "observed counts")->required()->delimiter(',');
    add_prior_options(estimate_cmd, es_prior);

    // ---- risk ----
    std::vector<double> rk_r, rk_s, rk_lambda;
    std::string rk_method = "exact";
    double rk_tail = 1e-8;
    long rk_n = 50000;
    std::uint64_t rk_seed = 0;
    PriorOptions rk_prior;
    CLI::App* risk_cmd = app.add_subcommand("risk", "Kullback-Leibler risk of a predictive");
    risk_cmd->add_option("--r", rk_r, "observation exposures")->required()->delimiter(',');
    risk_cmd->add_option("--s", rk_s, "prediction exposures")->required()->delimiter(',');
    risk_cmd->add_option("--lambda", rk_lambda, "true intensities")->required()->delimiter(',');
    risk_cmd->add_option("--method", rk_method, "exact | mc");
    risk_cmd->add_option("--tail-mass", rk_tail, "certified lattice tail");
    risk_cmd->add_option("--n-samples", rk_n, "Monte Carlo sample count");
    risk_cmd->add_option("--seed", rk_seed, "Monte Carlo seed");
    add_prior_options(risk_cmd, rk_prior);

    // ---- dominance ----
    std::string dom_config_path;
    bool dom_dump = false;
    std::vector<std::string> dom_grid;
    std::vector<double> dom_r, dom_s, dom_beta;
    std::string dom_prior, dom_method, dom_format, dom_output;
    long dom_n_samples = -1, dom_subsample = -1;
    double dom_tail = -1.0;
    std::uint64_t dom_seed = 0, dom_subseed = 0;
    bool dom_seed_set = false, dom_subseed_set = false, dom_cross = false;
    int dom_n_tau = -1;
    CLI::App* dom_cmd = app.add_subcommand(
        "dominance", "sweep a lambda grid comparing the power prior with its shrinkage competitor");
    dom_cmd->add_option("--config", dom_config_path, "JSON experiment config");
    dom_cmd->add_option("--r", dom_r, "observation exposures")->delimiter(',');
    dom_cmd->add_option("--s", dom_s, "prediction exposures")->delimiter(',');
    dom_cmd->add_option("--beta", dom_beta, "base prior exponents")->delimiter(',');
    dom_cmd->add_option("--prior", dom_prior, "jeffreys | power | theorem-shrinkage");
    dom_cmd->add_option("--lambda-grid", dom_grid,
                        "per-coordinate value lists, e.g. --lambda-grid 0.1,1,5 0.1,1,5");
    dom_cmd->add_option("--subsample-count", dom_subsample, "evaluate only this many grid points");
    dom_cmd->add_option("--subsample-seed", dom_subseed, "grid subsampling seed")
        ->each([&](const std::string&) { dom_subseed_set = true; });
    dom_cmd->add_option("--method", dom_method, "exact | mc");
    dom_cmd->add_option("--tail-mass", dom_tail, "certified lattice tail");
    dom_cmd->add_option("--n-samples", dom_n_samples, "Monte Carlo sample count");
    dom_cmd->add_option("--seed", dom_seed, "Monte Carlo seed")
        ->each([&](const std::string&) { dom_seed_set = true; });
    dom_cmd->add_option("--n-tau", dom_n_tau, "Gauss-Legendre nodes for --cross-check");
    dom_cmd->add_flag("--cross-check", dom_cross, "also emit the integral-route difference");
    dom_cmd->add_option("--format", dom_format, "csv | jsonl");
    dom_cmd->add_option("--output", dom_output, "output path ('-' for stdout)");
    dom_cmd->add_flag("--dump-config", dom_dump, "print the resolved config and exit");

    // ---- verify ----
    std::string verify_suite;
    std::uint64_t verify_seed = 20250801ull;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run a named identity test suite");
    verify_cmd->add_option("suite", verify_suite,
                           "kfun-identities | lemma1 | lemma5 | normalization | metric")
        ->required();
    verify_cmd->add_option("--seed", verify_seed, "randomized-suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (kfun_cmd->parsed()) return run_kfun(kf_gamma, kf_x, kf_alpha, kf_index);

        if (predict_cmd->parsed()) {
            const ExposurePair exposures(pr_r, pr_s);
            const PriorSpec prior = resolve_prior(pr_prior, exposures);
            const PredictiveQuery query(exposures, prior, CountVector(pr_x), pr_tau, pr_delta);
            if (pr_norm_tail > 0.0) {
                const double total = normalization_check(query, pr_norm_tail);
                std::printf("normalization_sum=%s\n", fmt17(total).c_str());
                return 0;
            }
            if (pr_y.empty()) throw std::invalid_argument("predict: --y is required");
            const double lp = log_pred(query, CountVector(pr_y));
            std::printf("log_p=%s p=%s\n", fmt17(lp).c_str(), fmt17(std::exp(lp)).c_str());
            return 0;
        }

        if (estimate_cmd->parsed()) {
            std::vector<double> t = es_t;
            std::optional<ExposurePair> exposures;
            if (!es_r.empty() || !es_s.empty()) exposures.emplace(es_r, es_s);
            if (t.empty()) {
                if (!exposures)
                    throw std::invalid_argument("estimate: provide --t or (--r, --s [, --tau])");
                t = HarmonicSchedule(*exposures).at(es_tau).t;
            }
            const PriorSpec prior = exposures ? resolve_prior(es_prior, *exposures)
                                              : resolve_prior_flat(es_prior, es_z.size());
            const LambdaVector mean = posterior_mean(EstimateQuery(t, prior, CountVector(es_z)));
            std::printf("lambda_hat=%s\n", join17(mean.lambda).c_str());
            return 0;
        }

        if (risk_cmd->parsed()) {
            const ExposurePair exposures(rk_r, rk_s);
            const PriorSpec prior = resolve_prior(rk_prior, exposures);
            RiskMethod method;
            if (rk_method == "exact") {
                method = ExactTruncated{rk_tail};
            } else if (rk_method == "mc") {
                method = MonteCarloX{rk_n, rk_seed, rk_tail};
            } else {
                throw std::invalid_argument("risk: --method must be exact or mc");
            }
            const RiskReport report =
                risk_eval(RiskQuery(exposures, LambdaVector(rk_lambda), prior, method));
            json out = {{"risk", report.risk},
                        {"err_bound", report.err_bound},
                        {"n_k_evals", report.n_k_evals},
                        {"method", report.method}};
            std::cout << out.dump() << "\n";
            return 0;
        }

        if (dom_cmd->parsed()) {
            ExperimentConfig cfg;
            if (!dom_config_path.empty()) {
                std::ifstream in(dom_config_path);
                if (!in)
                    throw std::invalid_argument("dominance: cannot read " + dom_config_path);
                json j;
                in >> j;
                cfg = config_from_json(j);
            }
            if (!dom_r.empty()) cfg.r = dom_r;
            if (!dom_s.empty()) cfg.s = dom_s;
            if (!dom_beta.empty()) cfg.beta = dom_beta;
            if (!dom_prior.empty()) cfg.prior = dom_prior;
            if (!dom_grid.empty()) {
                cfg.lambda_grid.clear();
                for (const std::string& coord : dom_grid) {
                    std::vector<double> values;
                    std::stringstream ss(coord);
                    std::string item;
                    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
                    cfg.lambda_grid.push_back(values);
                }
            }
            if (dom_subsample >= 0) cfg.subsample_count = dom_subsample;
            if (dom_subseed_set) cfg.subsample_seed = dom_subseed;
            if (!dom_method.empty()) cfg.method = dom_method;
            if (dom_tail > 0.0) cfg.tail_mass = dom_tail;
            if (dom_n_samples > 0) cfg.n_samples = dom_n_samples;
            if (dom_seed_set) cfg.seed = dom_seed;
            if (dom_n_tau > 0) cfg.n_tau = dom_n_tau;
            if (dom_cross) cfg.cross_check = true;
            if (!dom_format.empty()) cfg.format = dom_format;
            if (!dom_output.empty()) cfg.output_path = dom_output;
            return run_dominance(std::move(cfg), dom_dump);
        }

        if (verify_cmd->parsed()) return run_verify(verify_suite, verify_seed);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
