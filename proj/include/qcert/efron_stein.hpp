#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qcert/states.hpp"

namespace qcert {

// Product state varrho = rho_1 x ... x rho_n together with its tensor space.
class ESContext {
public:
    static ESContext of(std::vector<DensityMatrix> factor_states);

    const TensorSpace& space() const { return space_; }
    int factors() const { return space_.factors(); }
    const DensityMatrix& factor(int i) const { return factor_states_[i]; }

    // Dense joint state; built on first use.
    const ComplexMatrix& joint_state() const;

    double expectation(const ComplexMatrix& x) const;          // E_varrho[X]
    double variance(const ComplexMatrix& x) const;             // Var_varrho[X]
    // <Y,Z>_varrho = E_varrho[Y^dagger Z]; real part (exact for Hermitian args).
    double inner(const ComplexMatrix& y, const ComplexMatrix& z) const;

private:
    ESContext(TensorSpace space, std::vector<DensityMatrix> states)
        : space_(std::move(space)), factor_states_(std::move(states)) {}
    TensorSpace space_;
    std::vector<DensityMatrix> factor_states_;
    mutable ComplexMatrix joint_;
};

// Components of the orthogonal decomposition X = sum_J X^{=J}, keyed by the
// bitmask of J (bit i set <=> factor i in J), in increasing mask order.
struct ESDecomposition {
    std::map<std::uint32_t, ComplexMatrix> components;
};

// E_I X = Tr_I[(x_{i in I} rho_i) X] tensored with identities on I.  Computed
// as a single multi-slot contraction; marginalize_iterated applies the E_i one
// factor at a time and must agree (the maps commute).
ComplexMatrix marginalize(const ComplexMatrix& x, const ESContext& ctx,
                          std::uint32_t index_set);
ComplexMatrix marginalize_iterated(const ComplexMatrix& x, const ESContext& ctx,
                                   std::uint32_t index_set);

// D_i X = X - E_i X.
ComplexMatrix es_deriv(const ComplexMatrix& x, const ESContext& ctx, int i);

// X^{=J} = sum_{I subset J} (-1)^{|J|-|I|} E_{complement(I)} X.
ComplexMatrix es_component(const ComplexMatrix& x, const ESContext& ctx,
                           std::uint32_t subset);

ESDecomposition es_decompose(const ComplexMatrix& x, const ESContext& ctx);

// E_varrho[(D_i X)^2], evaluated by both routes of the doubled-space identity
// (direct square vs cross-copy swap F_i); the routes must agree within 1e-9.
double local_variance(const ComplexMatrix& x, const ESContext& ctx, int i);

struct QesCheck {
    double variance = 0.0;
    double sum_local = 0.0;
    double slack = 0.0;  // sum_local - variance; >= -1e-9 by the inequality
};

QesCheck qes_check(const ComplexMatrix& x, const ESContext& ctx);

struct TwoLocalBound {
    double variance = 0.0;
    double bound = 0.0;  // 4 sum_i E[(D_i X_i)^2]
};

// X = sum_{i != j} X_{ij} for symmetric two-local terms, given once per
// unordered pair.  Each term must act nontrivially only on its two factors
// (checked by a partial-trace test).
TwoLocalBound two_local_bound(
    const std::map<std::pair<int, int>, ComplexMatrix>& terms,
    const ESContext& ctx);

// Places an operator on the listed slots (ascending) with identity elsewhere.
ComplexMatrix embed_on_slots(const ComplexMatrix& y, const TensorSpace& space,
                             const std::vector<int>& slots);

} // namespace qcert
