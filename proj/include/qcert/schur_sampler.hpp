#pragma once

#include <vector>

#include "qcert/states.hpp"

namespace qcert {

// Exact distribution of the total-spin sector (Schur-Weyl isotypic component)
// of a product of T qubit states, computed by sequential Clebsch-Gordan
// contraction in O(T^3) small-matrix work.  Entry k corresponds to
// twoJ = T % 2 + 2k.
struct SpinSectorDistribution {
    std::vector<int> two_j;
    std::vector<double> probs;
};

SpinSectorDistribution spin_sector_distribution(const std::vector<DensityMatrix>& qubits);

// Eigenvalue of the collision observable (2/T^2) sum_{i<j} S_ij - Id/2 on the
// spin-j sector: the transposition sum acts there as the scalar
// T(T-1)/4 + j(j+1) - 3T/4.
double collision_observable_value(int T, int two_j);

} // namespace qcert
