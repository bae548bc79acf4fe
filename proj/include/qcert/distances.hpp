#pragma once

#include "qcert/states.hpp"

namespace qcert {

// All quantum divergences used by the testers.  bures_chi2 may be +infinity
// when sigma is singular and rho - sigma has support on its kernel; callers
// must branch on std::isinf explicitly.
struct QuantumDivergenceReport {
    double trace_distance = 0.0;
    double hs_sq = 0.0;
    double fidelity = 1.0;
    double infidelity = 0.0;
    double bures_sq = 0.0;
    double bures_chi2 = 0.0;
};

struct ClassicalDivergenceReport {
    double tv = 0.0;
    double chi2 = 0.0;  // +infinity when q lacks support where p has mass
    double hellinger_sq = 0.0;
};

QuantumDivergenceReport quantum_divergences(const DensityMatrix& rho,
                                            const DensityMatrix& sigma);

ClassicalDivergenceReport classical_divergences(const ClassicalDistribution& p,
                                                const ClassicalDistribution& q);

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double hs_sq(const DensityMatrix& rho, const DensityMatrix& sigma);
double bures_chi2(const DensityMatrix& rho, const DensityMatrix& sigma);

// The largest chi^2 variant Tr[sigma^-1 rho^2] - 1; requires full-rank sigma.
// Dominates bures_chi2.
double chi2_upper_variant(const DensityMatrix& rho, const DensityMatrix& sigma);

} // namespace qcert
