#include "qcert/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qcert {

TensorSpace TensorSpace::of(std::vector<int> dims) {
    if (dims.empty()) throw std::invalid_argument("TensorSpace: no factors");
    TensorSpace s;
    s.total_dim = 1;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("TensorSpace: factor dim < 1");
        s.total_dim *= d;
    }
    s.dims = std::move(dims);
    return s;
}

long TensorSpace::stride(int i) const {
    long st = 1;
    for (int k = i + 1; k < factors(); ++k) st *= dims[k];
    return st;
}

ComplexMatrix identity(long n) { return ComplexMatrix::Identity(n, n); }

double hermiticity_error(const ComplexMatrix& x) {
    if (x.rows() != x.cols()) return std::numeric_limits<double>::infinity();
    double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    double dev = (x - x.adjoint()).cwiseAbs().maxCoeff();
    return dev / scale;
}

bool is_hermitian(const ComplexMatrix& x, double rel_tol) {
    return x.rows() == x.cols() && hermiticity_error(x) <= rel_tol;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

ComplexMatrix tensor_all(const std::vector<ComplexMatrix>& factors) {
    if (factors.empty()) throw std::invalid_argument("tensor_all: empty list");
    ComplexMatrix out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& x, const TensorSpace& space,
                            const std::vector<int>& traced) {
    const int n = space.factors();
    if (x.rows() != space.total_dim || x.cols() != space.total_dim)
        throw std::invalid_argument("partial_trace: operator does not live on the space");
    std::vector<bool> is_traced(n, false);
    for (int i : traced) {
        if (i < 0 || i >= n) throw std::out_of_range("partial_trace: factor index out of range");
        if (is_traced[i]) throw std::invalid_argument("partial_trace: repeated factor index");
        is_traced[i] = true;
    }

    std::vector<int> kept;
    for (int i = 0; i < n; ++i)
        if (!is_traced[i]) kept.push_back(i);

    long kept_dim = 1, traced_dim = 1;
    for (int i : kept) kept_dim *= space.dims[i];
    for (int i = 0; i < n; ++i)
        if (is_traced[i]) traced_dim *= space.dims[i];

    // Row-major linear offsets of every kept/traced multi-index combination.
    auto offsets = [&](const std::vector<int>& slots) {
        std::vector<long> off(1, 0);
        for (int s : slots) {
            std::vector<long> next;
            next.reserve(off.size() * space.dims[s]);
            long st = space.stride(s);
            for (long base : off)
                for (int v = 0; v < space.dims[s]; ++v) next.push_back(base + v * st);
            off = std::move(next);
        }
        return off;
    };
    std::vector<int> traced_slots;
    for (int i = 0; i < n; ++i)
        if (is_traced[i]) traced_slots.push_back(i);
    const std::vector<long> kept_off = offsets(kept);
    const std::vector<long> traced_off = offsets(traced_slots);

    ComplexMatrix out = ComplexMatrix::Zero(kept_dim, kept_dim);
    for (long a = 0; a < kept_dim; ++a)
        for (long b = 0; b < kept_dim; ++b) {
            cxd acc = 0.0;
            for (long t = 0; t < traced_dim; ++t)
                acc += x(kept_off[a] + traced_off[t], kept_off[b] + traced_off[t]);
            out(a, b) = acc;
        }
    return out;
}

ComplexMatrix permutation_operator(const TensorSpace& space,
                                   const std::vector<int>& perm) {
    const int n = space.factors();
    if (static_cast<int>(perm.size()) != n)
        throw std::invalid_argument("permutation_operator: permutation size mismatch");
    std::vector<bool> seen(n, false);
    for (int p : perm) {
        if (p < 0 || p >= n || seen[p])
            throw std::invalid_argument("permutation_operator: not a permutation");
        seen[p] = true;
    }
    for (int i = 0; i < n; ++i)
        if (perm[i] != i && space.dims[i] != space.dims[perm[i]])
            throw std::invalid_argument("permutation_operator: permuted factors have unequal dims");

    const long dim = space.total_dim;
    std::vector<long> strides(n);
    for (int i = 0; i < n; ++i) strides[i] = space.stride(i);

    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    std::vector<int> digits(n, 0);
    for (long col = 0; col < dim; ++col) {
        long row = 0;
        for (int i = 0; i < n; ++i) row += static_cast<long>(digits[i]) * strides[perm[i]];
        out(row, col) = 1.0;
        for (int i = n - 1; i >= 0; --i) {
            if (++digits[i] < space.dims[i]) break;
            digits[i] = 0;
        }
    }
    return out;
}

ComplexMatrix hadamard_div(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("hadamard_div: shape mismatch");
    ComplexMatrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (b(i, j) == cxd(0.0, 0.0)) {
                if (a(i, j) != cxd(0.0, 0.0))
                    throw std::domain_error("hadamard_div: nonzero entry divided by zero");
                out(i, j) = 0.0;
            } else {
                out(i, j) = a(i, j) / b(i, j);
            }
        }
    return out;
}

EigH eig_hermitian(const ComplexMatrix& h, double rel_tol) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("eig_hermitian: matrix not square");
    if (hermiticity_error(h) > rel_tol)
        throw std::invalid_argument("eig_hermitian: input not Hermitian within tolerance");
    ComplexMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalViolation("eig_hermitian: eigensolver failed to converge");
    const Eigen::Index n = h.rows();
    EigH out;
    out.eigenvalues = RealVector(n);
    out.eigenvectors = ComplexMatrix(n, n);
    // Eigen sorts ascending; report descending.
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues[k] = solver.eigenvalues()[n - 1 - k];
        out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    return out;
}

double trace_product_re(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows() || a.rows() != b.cols())
        throw std::invalid_argument("trace_product_re: shape mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        acc += a.row(i).dot(b.col(i).conjugate()).real();
    return acc;
}

void apply_factor_to_vector(const ComplexMatrix& op, const TensorSpace& space,
                            int slot, Eigen::VectorXcd& v) {
    const int d = space.dims[slot];
    if (op.rows() != d || op.cols() != d)
        throw std::invalid_argument("apply_factor_to_vector: operator dim mismatch");
    if (v.size() != space.total_dim)
        throw std::invalid_argument("apply_factor_to_vector: vector dim mismatch");
    const long inner = space.stride(slot);        // product of dims right of slot
    const long outer = space.total_dim / (inner * d);
    Eigen::VectorXcd scratch(d);
    for (long a = 0; a < outer; ++a) {
        const long base = a * d * inner;
        for (long b = 0; b < inner; ++b) {
            for (int s = 0; s < d; ++s) scratch[s] = v[base + s * inner + b];
            for (int s = 0; s < d; ++s) {
                cxd acc = 0.0;
                for (int t = 0; t < d; ++t) acc += op(s, t) * scratch[t];
                v[base + s * inner + b] = acc;
            }
        }
    }
}

void conjugate_factor(const ComplexMatrix& u, const TensorSpace& space,
                      int slot, ComplexMatrix& x) {
    const long dim = space.total_dim;
    if (x.rows() != dim || x.cols() != dim)
        throw std::invalid_argument("conjugate_factor: operator dim mismatch");
    Eigen::VectorXcd col(dim);
    for (long j = 0; j < dim; ++j) {
        col = x.col(j);
        apply_factor_to_vector(u, space, slot, col);
        x.col(j) = col;
    }
    Eigen::VectorXcd row(dim);
    const ComplexMatrix u_conj = u.conjugate();
    for (long i = 0; i < dim; ++i) {
        row = x.row(i).transpose();
        apply_factor_to_vector(u_conj, space, slot, row);
        x.row(i) = row.transpose();
    }
}

} // namespace qcert
