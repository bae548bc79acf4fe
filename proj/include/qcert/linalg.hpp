#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcert/errors.hpp"

namespace qcert {

using cxd = std::complex<double>;

// Dense complex matrix, row-major storage.
using ComplexMatrix =
    Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

// A tensor-product space: per-factor dimensions and their product.
struct TensorSpace {
    std::vector<int> dims;
    long total_dim = 1;

    static TensorSpace of(std::vector<int> dims);

    int factors() const { return static_cast<int>(dims.size()); }
    // Row-major stride of factor i (product of dims to its right).
    long stride(int i) const;
};

ComplexMatrix identity(long n);

// Relative Hermiticity deviation: max_ij |X_ij - conj(X_ji)| / max(1, max|X_ij|).
double hermiticity_error(const ComplexMatrix& x);
bool is_hermitian(const ComplexMatrix& x, double rel_tol = 1e-12);

// Kronecker product (dims multiply).
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor_all(const std::vector<ComplexMatrix>& factors);

// Trace over the factors listed in `traced` (0-based); the result lives on the
// product of the remaining factors, in their original order.
ComplexMatrix partial_trace(const ComplexMatrix& x, const TensorSpace& space,
                            const std::vector<int>& traced);

// Unitary 0/1 operator realizing a permutation of tensor factors:
// P |x_1 ... x_n> = |x_{pi^-1(1)} ... x_{pi^-1(n)}>, i.e. the content of slot i
// moves to slot perm[i].  All factors moved by the permutation must share one
// dimension.
ComplexMatrix permutation_operator(const TensorSpace& space,
                                   const std::vector<int>& perm);

// Entry-wise quotient with the convention 0/0 = 0; x/0 with x != 0 is a
// domain error.
ComplexMatrix hadamard_div(const ComplexMatrix& a, const ComplexMatrix& b);

struct EigH {
    RealVector eigenvalues;  // descending
    ComplexMatrix eigenvectors;  // orthonormal columns, paired with eigenvalues
};

// Spectral decomposition of a Hermitian matrix.  The input is symmetrized as
// (H + H^dagger)/2 before factorization to absorb floating-point drift; inputs
// failing the 1e-12 relative Hermiticity tolerance are rejected.
EigH eig_hermitian(const ComplexMatrix& h, double rel_tol = 1e-12);

// --- small helpers shared across modules ---

inline double real_trace(const ComplexMatrix& x) { return x.trace().real(); }

// Tr[a b], real part (exact for Hermitian a, b).
double trace_product_re(const ComplexMatrix& a, const ComplexMatrix& b);

// Applies a one-factor operator at slot `slot` of a product space to a dense
// vector: v <- (I x ... x op x ... x I) v.
void apply_factor_to_vector(const ComplexMatrix& op, const TensorSpace& space,
                            int slot, Eigen::VectorXcd& v);

// Conjugates a dense operator by a one-factor unitary at `slot`:
// X <- (I x..x U x..x I) X (I x..x U x..x I)^dagger.
void conjugate_factor(const ComplexMatrix& u, const TensorSpace& space,
                      int slot, ComplexMatrix& x);

} // namespace qcert
