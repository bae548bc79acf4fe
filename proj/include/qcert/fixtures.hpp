#pragma once

#include "qcert/simulate.hpp"

namespace qcert {

// Ensemble builders for power experiments and calibration.  Null instances
// average exactly to the hypothesis; far instances hit a requested value of
// the kind's native divergence (Hilbert-Schmidt for A and Z, Bures chi^2 for
// M, classical chi^2 for the two-sample tester).

// rho_avg equals the hypothesis.  Heterogeneous instances spread the sources
// around the average with zero-sum perturbations; iid instances repeat it.
TestInstance null_instance(const ObservableKind& kind, int d, int T,
                           std::uint64_t seed, bool heterogeneous);

// Native divergence of the averaged state(s) equals mu (up to float error).
// `adversarial` pushes classical perturbations onto the least likely symbol
// of q, stressing the gamma-dependent variance terms.
TestInstance far_instance(const ObservableKind& kind, int d, int T, double mu,
                          std::uint64_t seed, bool heterogeneous,
                          bool adversarial = false);

// Hypothesis helpers.
// q on [d] with min entry exactly gamma (gamma <= 1/d), remaining mass uniform.
ClassicalDistribution skewed_hypothesis(int d, double gamma);

// The harshest qubit null for collision statistics: antipodal pure-state
// pairs averaging to I/2 (odd T pads with one maximally mixed source).
ProductEnsemble antipodal_pure_null(int T, std::uint64_t seed);

// Measures the kind's native divergence of an instance (used to verify
// fixtures and to report mu in experiment output).
double native_divergence(const ObservableKind& kind, const TestInstance& instance);

} // namespace qcert
