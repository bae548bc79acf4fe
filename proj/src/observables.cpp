#include "qcert/observables.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "qcert/rng.hpp"

namespace qcert {

namespace {

constexpr double kFullRankTol = 1e-12;
constexpr double kIneqSlack = 1e-9;

long checked_power(int d, int exponent, const char* what) {
    long dim = 1;
    for (int k = 0; k < exponent; ++k) {
        dim *= d;
        if (dim > kDenseDimensionCap)
            throw DimensionCapError(std::string(what) +
                                    ": dense dimension exceeds 2^16");
    }
    return dim;
}

std::vector<int> digits_of(long x, int T, int d) {
    std::vector<int> out(T);
    for (int k = T - 1; k >= 0; --k) {
        out[k] = static_cast<int>(x % d);
        x /= d;
    }
    return out;
}

long index_of(const std::vector<int>& digits, int d) {
    long x = 0;
    for (int v : digits) x = x * d + v;
    return x;
}

// sigma's eigenbasis: unitary, eigenvalues, and the averaged-eigenvalue matrix Q.
struct SigmaBasis {
    ComplexMatrix u;
    RealVector q;
    Eigen::MatrixXd big_q;  // Q(i,j) = (q_i + q_j) / 2
};

SigmaBasis sigma_basis(const DensityMatrix& sigma) {
    EigH eig = eig_hermitian(sigma.matrix());
    const int d = sigma.dim();
    if (eig.eigenvalues[d - 1] <= kFullRankTol)
        throw std::invalid_argument("KNOWN_M requires a full-rank sigma");
    SigmaBasis b;
    b.u = eig.eigenvectors;
    b.q = eig.eigenvalues;
    b.big_q.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b.big_q(i, j) = 0.5 * (b.q[i] + b.q[j]);
    return b;
}

std::vector<double> classical_probs_of(const DensityMatrix& state) {
    const int d = state.dim();
    std::vector<double> p(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j)
            if (i != j && std::abs(state.matrix()(i, j)) > 1e-10)
                throw std::invalid_argument(
                    "CLASSICAL_M expects diagonal states (classical distributions)");
        p[i] = state.matrix()(i, i).real();
    }
    return p;
}

// Weighted two-slot terms: the statistic is sum_e w_e O_e + shift.
struct Edge {
    int u, v;
    double w;
};

struct EdgeMomentCallbacks {
    std::function<double(int, int)> mean2;              // E[O_{uv}]
    std::function<double(int, int)> sq2;                // E[O_{uv}^2]
    std::function<double(int, int, int)> tri;           // Re E[O_{au} O_{av}], a shared
};

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
};

// Exhaustive enumeration of the overlap patterns between index pairs: disjoint
// edges are independent and drop out; identical edges contribute the square
// moment; edges sharing one slot contribute the three-slot trace.
MeanVar edge_moments(int n_slots, const std::vector<Edge>& edges, double shift,
                     const EdgeMomentCallbacks& cb) {
    std::vector<double> m(edges.size());
    MeanVar out;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        m[e] = cb.mean2(edges[e].u, edges[e].v);
        out.mean += edges[e].w * m[e];
        out.var += edges[e].w * edges[e].w *
                   (cb.sq2(edges[e].u, edges[e].v) - m[e] * m[e]);
    }
    out.mean += shift;

    std::vector<std::vector<int>> incident(n_slots);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        incident[edges[e].u].push_back(static_cast<int>(e));
        incident[edges[e].v].push_back(static_cast<int>(e));
    }
    for (int a = 0; a < n_slots; ++a) {
        const auto& inc = incident[a];
        for (std::size_t x = 0; x < inc.size(); ++x)
            for (std::size_t y = x + 1; y < inc.size(); ++y) {
                const Edge& e = edges[inc[x]];
                const Edge& f = edges[inc[y]];
                const int b = (e.u == a) ? e.v : e.u;
                const int c = (f.u == a) ? f.v : f.u;
                out.var += 2.0 * e.w * f.w * (cb.tri(a, b, c) - m[inc[x]] * m[inc[y]]);
            }
    }
    return out;
}

std::vector<Edge> complete_graph_edges(int T, double w, int offset = 0) {
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(T) * (T - 1) / 2);
    for (int i = 0; i < T; ++i)
        for (int j = i + 1; j < T; ++j) edges.push_back({offset + i, offset + j, w});
    return edges;
}

} // namespace

ObservableTag observable_tag_from_string(const std::string& name) {
    if (name == "mm_a") return ObservableTag::MM_A;
    if (name == "known_m") return ObservableTag::KNOWN_M;
    if (name == "unknown_z") return ObservableTag::UNKNOWN_Z;
    if (name == "classical_m") return ObservableTag::CLASSICAL_M;
    throw std::invalid_argument("unknown observable kind: " + name);
}

std::string to_string(ObservableTag tag) {
    switch (tag) {
        case ObservableTag::MM_A: return "mm_a";
        case ObservableTag::KNOWN_M: return "known_m";
        case ObservableTag::UNKNOWN_Z: return "unknown_z";
        case ObservableTag::CLASSICAL_M: return "classical_m";
    }
    return "?";
}

ObservableKind ObservableKind::mm_a() { return {ObservableTag::MM_A, {}, {}}; }

ObservableKind ObservableKind::known_m(DensityMatrix sigma) {
    EigH eig = eig_hermitian(sigma.matrix());
    if (eig.eigenvalues[sigma.dim() - 1] <= kFullRankTol)
        throw std::invalid_argument("KNOWN_M requires a full-rank sigma (gamma > 0)");
    return {ObservableTag::KNOWN_M, std::move(sigma), {}};
}

ObservableKind ObservableKind::unknown_z() { return {ObservableTag::UNKNOWN_Z, {}, {}}; }

ObservableKind ObservableKind::classical_m(ClassicalDistribution q) {
    if (q.gamma() <= 0.0)
        throw std::invalid_argument("CLASSICAL_M requires a fully supported q");
    return {ObservableTag::CLASSICAL_M, {}, std::move(q)};
}

double ObservableKind::gamma() const {
    switch (tag) {
        case ObservableTag::KNOWN_M: {
            EigH eig = eig_hermitian(sigma->matrix());
            return eig.eigenvalues[sigma->dim() - 1];
        }
        case ObservableTag::CLASSICAL_M: return q->gamma();
        default: return 0.0;
    }
}

ComplexMatrix build_observable(const ObservableKind& kind, int d, int T) {
    if (d < 2 || T < 1) throw std::invalid_argument("build_observable: need d >= 2, T >= 1");
    const double wt = 2.0 / (static_cast<double>(T) * T);

    switch (kind.tag) {
        case ObservableTag::MM_A: {
            const long dim = checked_power(d, T, "build_observable(A)");
            ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
            for (long col = 0; col < dim; ++col) {
                std::vector<int> dig = digits_of(col, T, d);
                for (int i = 0; i < T; ++i)
                    for (int j = i + 1; j < T; ++j) {
                        std::swap(dig[i], dig[j]);
                        a(index_of(dig, d), col) += wt;
                        std::swap(dig[i], dig[j]);
                    }
            }
            a -= (1.0 / d) * ComplexMatrix::Identity(dim, dim);
            return a;
        }
        case ObservableTag::KNOWN_M: {
            if (!kind.sigma || kind.sigma->dim() != d)
                throw std::invalid_argument("build_observable(M): sigma missing or wrong dim");
            const long dim = checked_power(d, T, "build_observable(M)");
            const SigmaBasis basis = sigma_basis(*kind.sigma);
            ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
            for (long col = 0; col < dim; ++col) {
                std::vector<int> dig = digits_of(col, T, d);
                for (int s = 0; s < T; ++s)
                    for (int t = s + 1; t < T; ++t) {
                        const double coeff = wt / basis.big_q(dig[s], dig[t]);
                        std::swap(dig[s], dig[t]);
                        m(index_of(dig, d), col) += coeff;
                        std::swap(dig[s], dig[t]);
                    }
            }
            m -= (static_cast<double>(T - 1) / T) * ComplexMatrix::Identity(dim, dim);
            // Rotate from sigma's eigenbasis back to the computational basis.
            std::vector<int> dims(T, d);
            const TensorSpace space = TensorSpace::of(dims);
            for (int slot = 0; slot < T; ++slot)
                conjugate_factor(basis.u, space, slot, m);
            return m;
        }
        case ObservableTag::UNKNOWN_Z: {
            const long dim = checked_power(d, 2 * T, "build_observable(Z)");
            ComplexMatrix z = ComplexMatrix::Zero(dim, dim);
            for (long col = 0; col < dim; ++col) {
                std::vector<int> dig = digits_of(col, 2 * T, d);
                auto add_swap = [&](int u, int v, double w) {
                    std::swap(dig[u], dig[v]);
                    z(index_of(dig, d), col) += w;
                    std::swap(dig[u], dig[v]);
                };
                for (int i = 0; i < T; ++i)
                    for (int j = i + 1; j < T; ++j) {
                        add_swap(i, j, wt);
                        add_swap(T + i, T + j, wt);
                    }
                for (int i = 0; i < T; ++i)
                    for (int j = 0; j < T; ++j) add_swap(i, T + j, -wt);
            }
            return z;
        }
        case ObservableTag::CLASSICAL_M: {
            if (!kind.q || kind.q->dim() != d)
                throw std::invalid_argument("build_observable(classical): q missing or wrong dim");
            const long dim = checked_power(d, 2 * T, "build_observable(classical)");
            ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
            const double w1 = 1.0 / (static_cast<double>(T) * T);
            for (long x = 0; x < dim; ++x) {
                const std::vector<int> dig = digits_of(x, 2 * T, d);
                double value = -1.0;
                for (int s = 0; s < T; ++s)
                    for (int t = 0; t < T; ++t)
                        if (dig[s] == dig[T + t]) value += w1 / (*kind.q)[dig[s]];
                m(x, x) = value;
            }
            return m;
        }
    }
    throw std::invalid_argument("build_observable: invalid kind");
}

double MomentReport::var_bound_sum() const {
    double acc = 0.0;
    for (const auto& [name, value] : paper_var_bound_terms) acc += value;
    return acc;
}

MomentReport exact_moments(const ObservableKind& kind, const ProductEnsemble& ens,
                           const std::optional<ProductEnsemble>& second) {
    const int d = ens.dim;
    const int T = ens.size();
    if (kind.tag == ObservableTag::UNKNOWN_Z) {
        if (!second)
            throw std::invalid_argument("exact_moments(Z): second ensemble required");
        if (second->dim != d || second->size() != T)
            throw std::invalid_argument("exact_moments(Z): ensembles must match in d and T");
    } else if (second) {
        throw std::invalid_argument("exact_moments: second ensemble only valid for UNKNOWN_Z");
    }

    MomentReport rep;
    rep.tag = kind.tag;
    rep.d = d;
    rep.T = T;
    const double tt = static_cast<double>(T) * T;

    switch (kind.tag) {
        case ObservableTag::MM_A: {
            std::vector<const ComplexMatrix*> tau(T);
            for (int t = 0; t < T; ++t) tau[t] = &ens.states[t].matrix();
            EdgeMomentCallbacks cb;
            cb.mean2 = [&](int u, int v) { return trace_product_re(*tau[u], *tau[v]); };
            cb.sq2 = [&](int, int) { return 1.0; };
            cb.tri = [&](int a, int b, int c) {
                return ((*tau[a]) * (*tau[b]) * (*tau[c])).trace().real();
            };
            MeanVar mv = edge_moments(T, complete_graph_edges(T, 2.0 / tt), -1.0 / d, cb);
            rep.mean_exact = mv.mean;
            rep.var_exact = mv.var;
            rep.mu = hs_sq(average_state(ens), DensityMatrix::maximally_mixed(d));
            rep.paper_bias_bound = 1.0 / T;
            rep.paper_var_bound_terms = {{"mu_over_T", rep.mu / T},
                                         {"one_over_T_sq", 1.0 / tt}};
            break;
        }
        case ObservableTag::KNOWN_M: {
            if (!kind.sigma || kind.sigma->dim() != d)
                throw std::invalid_argument("exact_moments(M): sigma missing or wrong dim");
            const SigmaBasis basis = sigma_basis(*kind.sigma);
            rep.gamma = basis.q[d - 1];
            // All Hadamard-division work happens in sigma's eigenbasis.
            std::vector<ComplexMatrix> rot(T), omega(T);
            std::vector<RealVector> diag(T);
            for (int t = 0; t < T; ++t) {
                rot[t] = basis.u.adjoint() * ens.states[t].matrix() * basis.u;
                omega[t] = ComplexMatrix(d, d);
                diag[t] = RealVector(d);
                for (int i = 0; i < d; ++i) {
                    diag[t][i] = rot[t](i, i).real();
                    for (int j = 0; j < d; ++j)
                        omega[t](i, j) = rot[t](i, j) / basis.big_q(i, j);
                }
            }
            EdgeMomentCallbacks cb;
            cb.mean2 = [&](int u, int v) { return trace_product_re(rot[u], omega[v]); };
            cb.sq2 = [&](int u, int v) {
                double acc = 0.0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        acc += diag[u][i] * diag[v][j] /
                               (basis.big_q(i, j) * basis.big_q(i, j));
                return acc;
            };
            cb.tri = [&](int a, int b, int c) {
                return (rot[a] * omega[b] * omega[c]).trace().real();
            };
            MeanVar mv = edge_moments(T, complete_graph_edges(T, 2.0 / tt),
                                      -static_cast<double>(T - 1) / T, cb);
            rep.mean_exact = mv.mean;
            rep.var_exact = mv.var;
            rep.mu = bures_chi2(average_state(ens), *kind.sigma);
            rep.paper_bias_bound =
                std::sqrt(d / (rep.gamma * T)) * std::sqrt(rep.mu) +
                static_cast<double>(d - 1) / T;
            rep.paper_var_bound_terms = {
                {"mu_over_T", rep.mu / T},
                {"chi_three_halves_over_T",
                 std::sqrt(d / rep.gamma) * std::pow(rep.mu, 1.5) / T},
                {"d_sq_over_T_sq", static_cast<double>(d) * d / tt},
                {"d_mu_over_gamma_T_sq", d * rep.mu / (rep.gamma * tt)}};
            break;
        }
        case ObservableTag::UNKNOWN_Z: {
            std::vector<const ComplexMatrix*> tau(2 * T);
            for (int t = 0; t < T; ++t) {
                tau[t] = &ens.states[t].matrix();
                tau[T + t] = &second->states[t].matrix();
            }
            std::vector<Edge> edges = complete_graph_edges(T, 2.0 / tt);
            std::vector<Edge> b_half = complete_graph_edges(T, 2.0 / tt, T);
            edges.insert(edges.end(), b_half.begin(), b_half.end());
            for (int i = 0; i < T; ++i)
                for (int j = 0; j < T; ++j) edges.push_back({i, T + j, -2.0 / tt});
            EdgeMomentCallbacks cb;
            cb.mean2 = [&](int u, int v) { return trace_product_re(*tau[u], *tau[v]); };
            cb.sq2 = [&](int, int) { return 1.0; };
            cb.tri = [&](int a, int b, int c) {
                return ((*tau[a]) * (*tau[b]) * (*tau[c])).trace().real();
            };
            MeanVar mv = edge_moments(2 * T, edges, 0.0, cb);
            rep.mean_exact = mv.mean;
            rep.var_exact = mv.var;
            rep.mu = hs_sq(average_state(ens), average_state(*second));
            rep.paper_bias_bound = 2.0 / T;
            rep.paper_var_bound_terms = {{"sixteen_mu_over_T", 16.0 * rep.mu / T},
                                         {"one_over_T_sq", 1.0 / tt}};
            break;
        }
        case ObservableTag::CLASSICAL_M: {
            if (!kind.q || kind.q->dim() != d)
                throw std::invalid_argument("exact_moments(classical): q missing or wrong dim");
            rep.gamma = kind.q->gamma();
            std::vector<std::vector<double>> p(T);
            for (int t = 0; t < T; ++t) p[t] = classical_probs_of(ens.states[t]);
            const std::vector<double>& q = kind.q->probs();

            // Covariance case enumeration over ordered pairs (s,t), (s',t'):
            // only shared first samples (s = s') or shared second samples
            // (t = t') contribute; everything aggregates into O(T d^2) sums.
            std::vector<double> s1(d, 0.0), s2(d, 0.0);
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < d; ++j) {
                    s1[j] += p[t][j];
                    s2[j] += p[t][j] * p[t][j];
                }
            Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(d, d);
            for (int t = 0; t < T; ++t)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) m1(i, j) += p[t][i] * p[t][j];
            Eigen::MatrixXd dq_m1 = m1;
            for (int i = 0; i < d; ++i) dq_m1.row(i) /= q[i];
            const double tr2 = (dq_m1 * dq_m1).trace();

            double sum_w2 = 0.0, sum_v = 0.0, mean_sum = 0.0;
            for (int j = 0; j < d; ++j) {
                sum_w2 += s1[j] * s1[j] / (q[j] * q[j]);
                sum_v += s1[j] * (s1[j] * s1[j] - s2[j]) / (q[j] * q[j]);
                mean_sum += s1[j] * s1[j] / q[j];
            }
            double row_sq = 0.0;
            for (int t = 0; t < T; ++t) {
                double row = 0.0;
                for (int j = 0; j < d; ++j) row += p[t][j] * s1[j] / q[j];
                row_sq += row * row;
            }
            rep.mean_exact = mean_sum / tt - 1.0;
            rep.var_exact = (sum_w2 + 2.0 * sum_v - 2.0 * row_sq + tr2) / (tt * tt);

            std::vector<double> p_avg(d, 0.0);
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < d; ++j) p_avg[j] += p[t][j] / T;
            rep.mu = classical_divergences(ClassicalDistribution::from_probs(p_avg),
                                           *kind.q)
                         .chi2;
            rep.paper_bias_bound = 0.0;  // the two-sample statistic is unbiased
            rep.paper_var_bound_terms = {
                {"four_mu_over_gamma_T_sq", 4.0 * rep.mu / (tt * rep.gamma)},
                {"four_d_over_T_sq", 4.0 * d / tt},
                {"two_chi_three_halves_over_T",
                 2.0 * std::pow(rep.mu, 1.5) / (T * std::sqrt(rep.gamma))},
                {"mu_over_T", rep.mu / T}};
            break;
        }
    }

    rep.bias = rep.mean_exact - rep.mu;
    if (std::abs(rep.bias) > rep.paper_bias_bound + kIneqSlack)
        throw NumericalViolation("exact_moments: bias exceeds the paper bound");
    return rep;
}

ConcavityDeficit concavity_deficit_check(const ProductEnsemble& ens,
                                         const DensityMatrix& sigma) {
    const int d = sigma.dim();
    EigH eig = eig_hermitian(sigma.matrix());
    const double gamma = eig.eigenvalues[d - 1];
    if (gamma <= kFullRankTol)
        throw std::invalid_argument("concavity_deficit_check: sigma must be full-rank");
    ConcavityDeficit out;
    for (const auto& rho_t : ens.states)
        out.lhs += 1.0 + bures_chi2(rho_t, sigma);
    out.lhs /= ens.size();
    const double mu = bures_chi2(average_state(ens), sigma);
    out.rhs = std::sqrt(d / gamma) * std::sqrt(mu) + d;
    if (out.lhs > out.rhs + kIneqSlack)
        throw NumericalViolation("concavity_deficit_check: inequality violated");
    return out;
}

MiscInequalities misc_inequalities_check(const DensityMatrix& rho,
                                         const DensityMatrix& sigma,
                                         std::uint64_t seed) {
    const int d = sigma.dim();
    if (rho.dim() != d)
        throw std::invalid_argument("misc_inequalities_check: dimension mismatch");
    const SigmaBasis basis = sigma_basis(sigma);
    const double gamma = basis.q[d - 1];
    const ComplexMatrix rho_rot = basis.u.adjoint() * rho.matrix() * basis.u;
    ComplexMatrix sigma_diag = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) sigma_diag(i, i) = basis.q[i];
    const ComplexMatrix delta = rho_rot - sigma_diag;

    auto over_q = [&](const ComplexMatrix& x) {
        ComplexMatrix out(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out(i, j) = x(i, j) / basis.big_q(i, j);
        return out;
    };
    const ComplexMatrix delta_q = over_q(delta);
    const ComplexMatrix rho_q = over_q(rho_rot);

    const double chi2 = bures_chi2(rho, sigma);
    const double chi32 = std::pow(chi2, 1.5);

    double c_sq = 0.0;  // Tr[(rho x rho) C^2] uses only diagonals
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            c_sq += rho_rot(i, i).real() * rho_rot(j, j).real() /
                    (basis.big_q(i, j) * basis.big_q(i, j));

    MiscInequalities out;
    out.checks = {
        {"sigma_delta_delta",
         {(sigma_diag * delta_q * delta_q).trace().real(), 2.0 * chi2}},
        {"delta_delta_delta",
         {(delta * delta_q * delta_q).trace().real(),
          std::sqrt(d / gamma) * chi32}},
        {"rho_rho_C_sq", {c_sq, 2.0 * d * d + (2.0 * d / gamma) * chi2}},
        {"rho_rho_rho",
         {(rho_rot * rho_q * rho_q).trace().real(),
          1.0 + 4.0 * chi2 + std::sqrt(d / gamma) * chi32}},
    };
    for (const auto& [name, sides] : out.checks)
        if (sides.first > sides.second + kIneqSlack)
            throw NumericalViolation("misc_inequalities_check: '" + name +
                                     "' inequality violated");

    // Positivity of Tr[rho (S/Q)(S/Q)] for random Hermitian S.
    Rng rng(seed);
    out.min_threepiece = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 8; ++rep) {
        ComplexMatrix s(d, d);
        for (int i = 0; i < d; ++i) {
            s(i, i) = rng.gaussian();
            for (int j = i + 1; j < d; ++j) {
                cxd v(rng.gaussian() * 0.5, rng.gaussian() * 0.5);
                s(i, j) = v;
                s(j, i) = std::conj(v);
            }
        }
        const ComplexMatrix s_q = over_q(s);
        const double witness = (rho_rot * s_q * s_q).trace().real();
        out.min_threepiece = std::min(out.min_threepiece, witness);
        if (witness < -kIneqSlack)
            throw NumericalViolation(
                "misc_inequalities_check: three-slot positivity violated");
    }
    return out;
}

} // namespace qcert
