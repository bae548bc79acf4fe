#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcert/linalg.hpp"

namespace qcert {

// A d x d positive-semidefinite, unit-trace Hermitian matrix.  Construction
// validates the invariants; eigenvalues in [-1e-10, 0) caused by round-off are
// clipped to zero and the state renormalized.
class DensityMatrix {
public:
    static DensityMatrix from_matrix(const ComplexMatrix& m);
    // Rank-1 projector |psi><psi| from an (unnormalized) amplitude vector.
    static DensityMatrix pure(const Eigen::VectorXcd& psi);
    static DensityMatrix maximally_mixed(int d);
    static DensityMatrix diagonal(const std::vector<double>& probs);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const ComplexMatrix& matrix() const { return matrix_; }

    double purity() const { return trace_product_re(matrix_, matrix_); }
    double min_eigenvalue() const;

private:
    explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {}
    ComplexMatrix matrix_;
};

// Ordered list of T sources of common dimension; the implicit joint state is
// their tensor product, never materialized here.
struct ProductEnsemble {
    int dim = 0;
    std::vector<DensityMatrix> states;

    int size() const { return static_cast<int>(states.size()); }
    static ProductEnsemble of(std::vector<DensityMatrix> states);
};

// Probability distribution on [d].
class ClassicalDistribution {
public:
    static ClassicalDistribution from_probs(std::vector<double> probs);
    static ClassicalDistribution uniform(int d);

    int dim() const { return static_cast<int>(probs_.size()); }
    const std::vector<double>& probs() const { return probs_; }
    double operator[](int j) const { return probs_[j]; }
    double gamma() const;  // min entry

    DensityMatrix as_diagonal_state() const;

private:
    explicit ClassicalDistribution(std::vector<double> p) : probs_(std::move(p)) {}
    std::vector<double> probs_;
};

DensityMatrix average_state(const ProductEnsemble& ens);

enum class EnsembleMode { HaarPure, GinibreMixed, ClassicalDirichlet };

EnsembleMode ensemble_mode_from_string(const std::string& name);

// T independent random states; state t depends only on derive_seed(seed, t).
ProductEnsemble random_ensemble(int d, int T, EnsembleMode mode, std::uint64_t seed);

DensityMatrix random_state(int d, EnsembleMode mode, std::uint64_t seed);

// (1-lambda) rho + lambda I/d.
DensityMatrix depolarize(const DensityMatrix& rho, double lambda);

enum class PerturbStyle { Coherent, Diagonal, PureMix };

PerturbStyle perturb_style_from_string(const std::string& name);

// Builds a heterogeneous ensemble whose average has trace distance exactly
// `target` from sigma.  Coherent/diagonal styles add a rescaled traceless
// Hermitian direction (diagonal restricted to the diagonal); pure_mix mixes
// sigma with a random few-term mixture of pure states.  Individual states are
// spread around the average by +/- pairs that sum to zero.
ProductEnsemble perturb_ensemble(const DensityMatrix& sigma, double target, int T,
                                 PerturbStyle style, std::uint64_t seed);

// T states averaging exactly to `avg`, spread by a zero-sum pattern of a
// random traceless direction, scaled to keep every state positive.  When avg
// is singular the spread degenerates to identical copies.
ProductEnsemble heterogeneous_ensemble_around(const DensityMatrix& avg, int T,
                                              bool diagonal_only,
                                              std::uint64_t seed);

// JSON ensemble format: {"dim": d, "states": [[[re,im], ...], ...]},
// each state a row-major list of d*d entries.
ProductEnsemble ensemble_from_json_text(const std::string& text);
std::string ensemble_to_json_text(const ProductEnsemble& ens);
ProductEnsemble load_ensemble(const std::string& path);
void save_ensemble(const ProductEnsemble& ens, const std::string& path);

} // namespace qcert
