#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poipred {

struct CheckResult {
    std::string name;
    bool pass;
    double worst;  // worst deviation (or |z|) observed
    std::string detail;
};

// Lemma-4 recurrences of the K integral, 3 x 50 randomized argument sets at
// relative tolerance 1e-8, plus equal-gamma closed-form agreement at 1e-10.
std::vector<CheckResult> verify_kfun_identities(std::uint64_t seed);

// Direct risk difference vs the harmonic-time integral route on the d=2
// reference configuration.
std::vector<CheckResult> verify_lemma1();

// Poisson shift identity, Monte Carlo at 4 sigma with three test functions.
std::vector<CheckResult> verify_lemma5(std::uint64_t seed);

// Predictive normalization across randomized queries, both prior families.
std::vector<CheckResult> verify_normalization(std::uint64_t seed);

// Infinitesimal predictive metric vs its finite-difference limit definition.
std::vector<CheckResult> verify_metric();

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace poipred
