#include "qcert/efron_stein.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qcert {

namespace {

constexpr int kMaxFactorsForDecomposition = 12;

// Linear offsets of every joint value of the given slots (ascending slot
// order, row-major digit significance).
std::vector<long> slot_offsets(const TensorSpace& space, const std::vector<int>& slots) {
    std::vector<long> off(1, 0);
    for (int s : slots) {
        std::vector<long> next;
        next.reserve(off.size() * space.dims[s]);
        const long st = space.stride(s);
        for (long base : off)
            for (int v = 0; v < space.dims[s]; ++v) next.push_back(base + v * st);
        off = std::move(next);
    }
    return off;
}

std::vector<int> mask_to_slots(std::uint32_t mask, int n) {
    std::vector<int> slots;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) slots.push_back(i);
    return slots;
}

} // namespace

ESContext ESContext::of(std::vector<DensityMatrix> factor_states) {
    if (factor_states.empty())
        throw std::invalid_argument("ESContext: at least one factor required");
    std::vector<int> dims;
    dims.reserve(factor_states.size());
    for (const auto& s : factor_states) dims.push_back(s.dim());
    TensorSpace space = TensorSpace::of(dims);
    if (space.total_dim > kDenseDimensionCap)
        throw DimensionCapError("ESContext: dense dimension exceeds 2^16");
    return ESContext(std::move(space), std::move(factor_states));
}

const ComplexMatrix& ESContext::joint_state() const {
    if (joint_.size() == 0) {
        std::vector<ComplexMatrix> mats;
        mats.reserve(factor_states_.size());
        for (const auto& s : factor_states_) mats.push_back(s.matrix());
        joint_ = tensor_all(mats);
    }
    return joint_;
}

double ESContext::expectation(const ComplexMatrix& x) const {
    return trace_product_re(joint_state(), x);
}

double ESContext::variance(const ComplexMatrix& x) const {
    const double mean = expectation(x);
    return expectation((x * x).eval()) - mean * mean;
}

double ESContext::inner(const ComplexMatrix& y, const ComplexMatrix& z) const {
    // Tr[varrho Y^dagger Z] = <Y varrho, Z>_Frobenius for Hermitian varrho.
    const ComplexMatrix yr = y * joint_state();
    cxd acc = 0.0;
    for (Eigen::Index i = 0; i < yr.rows(); ++i)
        acc += yr.row(i).dot(z.row(i));  // Eigen dot conjugates its left factor
    return acc.real();
}

ComplexMatrix marginalize(const ComplexMatrix& x, const ESContext& ctx,
                          std::uint32_t index_set) {
    const TensorSpace& space = ctx.space();
    const int n = space.factors();
    if (index_set >= (1u << n))
        throw std::out_of_range("marginalize: index set references missing factors");
    if (x.rows() != space.total_dim || x.cols() != space.total_dim)
        throw std::invalid_argument("marginalize: operator does not live on the space");
    if (index_set == 0) return x;

    const std::vector<int> traced = mask_to_slots(index_set, n);
    std::vector<int> kept;
    for (int i = 0; i < n; ++i)
        if (!(index_set & (1u << i))) kept.push_back(i);

    const std::vector<long> t_off = slot_offsets(space, traced);
    const std::vector<long> k_off = slot_offsets(space, kept);
    const long nt = static_cast<long>(t_off.size());
    const long nk = static_cast<long>(k_off.size());

    std::vector<ComplexMatrix> weights;
    for (int i : traced) weights.push_back(ctx.factor(i).matrix());
    const ComplexMatrix w = tensor_all(weights);  // joint weight over traced slots

    // W[r,s] = sum_{alpha,gamma} w(alpha,gamma) X[gamma+r, alpha+s]
    ComplexMatrix contracted = ComplexMatrix::Zero(nk, nk);
    for (long r = 0; r < nk; ++r)
        for (long s = 0; s < nk; ++s) {
            cxd acc = 0.0;
            for (long a = 0; a < nt; ++a)
                for (long g = 0; g < nt; ++g)
                    acc += w(a, g) * x(t_off[g] + k_off[r], t_off[a] + k_off[s]);
            contracted(r, s) = acc;
        }

    ComplexMatrix out = ComplexMatrix::Zero(space.total_dim, space.total_dim);
    for (long r = 0; r < nk; ++r)
        for (long s = 0; s < nk; ++s)
            for (long a = 0; a < nt; ++a)
                out(k_off[r] + t_off[a], k_off[s] + t_off[a]) = contracted(r, s);
    return out;
}

ComplexMatrix marginalize_iterated(const ComplexMatrix& x, const ESContext& ctx,
                                   std::uint32_t index_set) {
    ComplexMatrix out = x;
    for (int i = 0; i < ctx.factors(); ++i)
        if (index_set & (1u << i)) out = marginalize(out, ctx, 1u << i);
    return out;
}

ComplexMatrix es_deriv(const ComplexMatrix& x, const ESContext& ctx, int i) {
    if (i < 0 || i >= ctx.factors()) throw std::out_of_range("es_deriv: bad factor");
    return x - marginalize(x, ctx, 1u << i);
}

ComplexMatrix es_component(const ComplexMatrix& x, const ESContext& ctx,
                           std::uint32_t subset) {
    const int n = ctx.factors();
    if (subset >= (1u << n))
        throw std::out_of_range("es_component: subset references missing factors");
    const std::uint32_t full = (1u << n) - 1;
    const int size_j = std::popcount(subset);
    ComplexMatrix acc = ComplexMatrix::Zero(ctx.space().total_dim, ctx.space().total_dim);
    std::uint32_t sub = subset;
    while (true) {
        const int sign = ((size_j - std::popcount(sub)) % 2 == 0) ? 1 : -1;
        acc += static_cast<double>(sign) * marginalize(x, ctx, full & ~sub);
        if (sub == 0) break;
        sub = (sub - 1) & subset;
    }
    return acc;
}

ESDecomposition es_decompose(const ComplexMatrix& x, const ESContext& ctx) {
    const int n = ctx.factors();
    if (n > kMaxFactorsForDecomposition)
        throw std::invalid_argument(
            "es_decompose: " + std::to_string(n) +
            " factors would require 2^" + std::to_string(n) +
            " components; hard cap is n <= 12");
    const std::uint32_t full = (1u << n) - 1;

    // One marginalization per mask, then Moebius inversion over subsets.
    std::vector<ComplexMatrix> marg(1u << n);
    for (std::uint32_t m = 0; m <= full; ++m) marg[m] = marginalize(x, ctx, m);

    ESDecomposition dec;
    for (std::uint32_t j = 0; j <= full; ++j) {
        const int size_j = std::popcount(j);
        ComplexMatrix acc =
            ComplexMatrix::Zero(ctx.space().total_dim, ctx.space().total_dim);
        std::uint32_t sub = j;
        while (true) {
            const int sign = ((size_j - std::popcount(sub)) % 2 == 0) ? 1 : -1;
            acc += static_cast<double>(sign) * marg[full & ~sub];
            if (sub == 0) break;
            sub = (sub - 1) & j;
        }
        dec.components.emplace(j, std::move(acc));
    }
    return dec;
}

double local_variance(const ComplexMatrix& x, const ESContext& ctx, int i) {
    const ComplexMatrix di = es_deriv(x, ctx, i);
    const double direct = ctx.expectation((di * di).eval());

    const TensorSpace& space = ctx.space();
    const long dim = space.total_dim;
    if (dim * dim > kDenseDimensionCap)
        throw DimensionCapError("local_variance: doubled space exceeds 2^16");

    std::vector<int> doubled_dims(space.dims);
    doubled_dims.insert(doubled_dims.end(), space.dims.begin(), space.dims.end());
    const TensorSpace doubled = TensorSpace::of(doubled_dims);
    const int n = space.factors();
    std::vector<int> perm(2 * n);
    for (int k = 0; k < 2 * n; ++k) perm[k] = k;
    std::swap(perm[i], perm[n + i]);
    const ComplexMatrix swap_i = permutation_operator(doubled, perm);

    const ComplexMatrix x_ext = tensor(x, identity(dim));
    const ComplexMatrix diff = x_ext - swap_i * x_ext * swap_i;
    const ComplexMatrix joint2 = tensor(ctx.joint_state(), ctx.joint_state());
    const double doubled_route =
        0.5 * trace_product_re(joint2, (diff * diff).eval());

    if (std::abs(direct - doubled_route) > 1e-9 * std::max(1.0, std::abs(direct)))
        throw NumericalViolation("local_variance: direct and doubled-space routes disagree");
    return direct;
}

QesCheck qes_check(const ComplexMatrix& x, const ESContext& ctx) {
    QesCheck out;
    out.variance = ctx.variance(x);
    for (int i = 0; i < ctx.factors(); ++i) {
        const ComplexMatrix di = es_deriv(x, ctx, i);
        out.sum_local += ctx.expectation((di * di).eval());
    }
    out.slack = out.sum_local - out.variance;
    return out;
}

ComplexMatrix embed_on_slots(const ComplexMatrix& y, const TensorSpace& space,
                             const std::vector<int>& slots) {
    long slot_dim = 1;
    for (int s : slots) slot_dim *= space.dims[s];
    if (y.rows() != slot_dim || y.cols() != slot_dim)
        throw std::invalid_argument("embed_on_slots: operator dim mismatch");
    std::vector<int> rest;
    for (int i = 0; i < space.factors(); ++i)
        if (std::find(slots.begin(), slots.end(), i) == slots.end()) rest.push_back(i);
    const std::vector<long> s_off = slot_offsets(space, slots);
    const std::vector<long> r_off = slot_offsets(space, rest);
    ComplexMatrix out = ComplexMatrix::Zero(space.total_dim, space.total_dim);
    for (std::size_t a = 0; a < s_off.size(); ++a)
        for (std::size_t b = 0; b < s_off.size(); ++b) {
            if (y(a, b) == cxd(0.0, 0.0)) continue;
            for (long r : r_off) out(s_off[a] + r, s_off[b] + r) = y(a, b);
        }
    return out;
}

TwoLocalBound two_local_bound(
    const std::map<std::pair<int, int>, ComplexMatrix>& terms,
    const ESContext& ctx) {
    const TensorSpace& space = ctx.space();
    const int n = space.factors();
    const long dim = space.total_dim;

    for (const auto& [key, mat] : terms) {
        auto [i, j] = key;
        if (i == j || i < 0 || j < 0 || i >= n || j >= n)
            throw std::invalid_argument("two_local_bound: bad factor pair");
        if (mat.rows() != dim || mat.cols() != dim)
            throw std::invalid_argument("two_local_bound: term does not live on the space");
        // Locality: reducing to {i,j} and re-embedding must reproduce the term.
        std::vector<int> others;
        std::uint32_t others_mask = 0;
        long others_dim = 1;
        for (int k = 0; k < n; ++k)
            if (k != std::min(i, j) && k != std::max(i, j)) {
                others.push_back(k);
                others_mask |= (1u << k);
                others_dim *= space.dims[k];
            }
        ComplexMatrix reduced = partial_trace(mat, space, others) /
                                static_cast<double>(others_dim);
        ComplexMatrix rebuilt =
            embed_on_slots(reduced, space, {std::min(i, j), std::max(i, j)});
        const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
        if ((mat - rebuilt).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw std::invalid_argument(
                "two_local_bound: term acts outside its declared pair of factors");
    }

    ComplexMatrix x = ComplexMatrix::Zero(dim, dim);
    for (const auto& [key, mat] : terms) x += 2.0 * mat;  // ordered sum, X_ij = X_ji

    TwoLocalBound out;
    out.variance = ctx.variance(x);
    for (int i = 0; i < n; ++i) {
        ComplexMatrix xi = ComplexMatrix::Zero(dim, dim);
        for (const auto& [key, mat] : terms)
            if (key.first == i || key.second == i) xi += mat;
        const ComplexMatrix di = es_deriv(xi, ctx, i);
        out.bound += 4.0 * ctx.expectation((di * di).eval());
    }
    if (out.variance > out.bound + 1e-9)
        throw NumericalViolation("two_local_bound: variance exceeds the two-local bound");
    return out;
}

} // namespace qcert
