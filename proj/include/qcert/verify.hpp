#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qcert/testers.hpp"

namespace qcert {

// Randomized invariant suites behind `certlab verify`.  Violations are
// max(0, lhs - rhs) for inequalities and absolute residuals for identities;
// a suite passes when every property stays within 1e-9.
//
// `inject` artificially perturbs the named property (mutation hook for the
// CI gate's smoke test); empty means no injection.

struct PropertyResult {
    std::string name;
    long checks = 0;
    double max_violation = 0.0;
};

struct SuiteResult {
    std::string name;
    std::vector<PropertyResult> properties;

    bool pass(double tol = 1e-9) const;
    double worst() const;
};

SuiteResult run_efron_stein_suite(long instances, std::uint64_t seed,
                                  const std::string& inject = "");
SuiteResult run_distances_suite(long pairs, std::uint64_t seed,
                                const std::string& inject = "");
SuiteResult run_observable_bounds_suite(long instances, std::uint64_t seed,
                                        const Calibration& calibration,
                                        const std::string& inject = "");

// All injection keys understood by the suites.
std::vector<std::string> known_injection_keys();

} // namespace qcert
