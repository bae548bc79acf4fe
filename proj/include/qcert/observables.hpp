#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcert/distances.hpp"
#include "qcert/states.hpp"

namespace qcert {

enum class ObservableTag { MM_A, KNOWN_M, UNKNOWN_Z, CLASSICAL_M };

ObservableTag observable_tag_from_string(const std::string& name);
std::string to_string(ObservableTag tag);

// Which tester statistic to build, plus its hypothesis where one is needed.
// KNOWN_M requires a full-rank sigma; CLASSICAL_M a fully supported q.
struct ObservableKind {
    ObservableTag tag;
    std::optional<DensityMatrix> sigma;
    std::optional<ClassicalDistribution> q;

    static ObservableKind mm_a();
    static ObservableKind known_m(DensityMatrix sigma);
    static ObservableKind unknown_z();
    static ObservableKind classical_m(ClassicalDistribution q);

    // Min eigenvalue of sigma / min entry of q; only meaningful for the
    // hypothesis-carrying tags.
    double gamma() const;
};

// Dense Hermitian testing observable on (C^d)^{x T} (A, M), or on
// (C^d)^{x 2T} (Z and the diagonal classical statistic).  Errors if the dense
// dimension exceeds 2^16.
ComplexMatrix build_observable(const ObservableKind& kind, int d, int T);

// Exact mean/variance of a tester statistic together with the paper's bias
// bound and the named variance-bound terms, all computed from d x d traces.
struct MomentReport {
    ObservableTag tag;
    int d = 0;
    int T = 0;
    double gamma = 0.0;  // 0 when the kind carries no hypothesis
    double mu = 0.0;     // the kind's target divergence of the averaged state(s)
    double mean_exact = 0.0;
    double var_exact = 0.0;
    double bias = 0.0;  // mean_exact - mu
    double paper_bias_bound = 0.0;
    std::vector<std::pair<std::string, double>> paper_var_bound_terms;

    double var_bound_sum() const;
};

MomentReport exact_moments(const ObservableKind& kind, const ProductEnsemble& ens,
                           const std::optional<ProductEnsemble>& second = std::nullopt);

// Lemma-style concavity deficit:  avg_t {1 + chi2(rho_t||sigma)}  <=
// sqrt(d/gamma) sqrt(chi2(rho_avg||sigma)) + d.  Asserts and returns both sides.
struct ConcavityDeficit {
    double lhs = 0.0;
    double rhs = 0.0;
};
ConcavityDeficit concavity_deficit_check(const ProductEnsemble& ens,
                                         const DensityMatrix& sigma);

// The four trace inequalities tying C-moments to the Bures chi^2, plus the
// positivity of Tr[R (S/Q)(S/Q)] for random Hermitian S.  Each entry is
// (lhs, rhs) with lhs <= rhs asserted within 1e-9.
struct MiscInequalities {
    std::vector<std::pair<std::string, std::pair<double, double>>> checks;
    double min_threepiece = 0.0;  // smallest positivity witness observed
};
MiscInequalities misc_inequalities_check(const DensityMatrix& rho,
                                         const DensityMatrix& sigma,
                                         std::uint64_t seed = 7);

} // namespace qcert
