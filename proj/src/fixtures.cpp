#include "qcert/fixtures.hpp"

#include <cmath>
#include <stdexcept>

#include "qcert/rng.hpp"

namespace qcert {

namespace {

ComplexMatrix random_traceless(int d, bool diagonal_only, Rng& rng) {
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) h(i, i) = rng.gaussian();
    if (!diagonal_only) {
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                cxd v(rng.gaussian() * 0.5, rng.gaussian() * 0.5);
                h(i, j) = v;
                h(j, i) = std::conj(v);
            }
    }
    cxd tr = h.trace() / static_cast<double>(d);
    for (int i = 0; i < d; ++i) h(i, i) -= tr;
    return h;
}

bool is_psd(const ComplexMatrix& m) {
    EigH eig = eig_hermitian(m, 1e-10);
    return eig.eigenvalues[m.rows() - 1] >= 0.0;
}

// chi^2 quadratic form of a traceless direction at sigma.
double chi2_form(const ComplexMatrix& delta, const DensityMatrix& sigma) {
    EigH eig = eig_hermitian(sigma.matrix());
    const ComplexMatrix rot = eig.eigenvectors.adjoint() * delta * eig.eigenvectors;
    double acc = 0.0;
    for (int i = 0; i < sigma.dim(); ++i)
        for (int j = 0; j < sigma.dim(); ++j)
            acc += 2.0 * std::norm(rot(i, j)) /
                   (eig.eigenvalues[i] + eig.eigenvalues[j]);
    return acc;
}

// avg = sigma + s * direction with the kind's quadratic divergence equal to mu.
DensityMatrix shifted_average(const DensityMatrix& sigma, double mu,
                              std::uint64_t seed, bool diagonal_only,
                              bool chi2_scaling) {
    const int d = sigma.dim();
    for (int attempt = 0; attempt < 64; ++attempt) {
        Rng rng(derive_seed(seed, attempt));
        ComplexMatrix delta = random_traceless(d, diagonal_only, rng);
        const double form = chi2_scaling ? chi2_form(delta, sigma)
                                         : delta.squaredNorm();
        if (form <= 1e-12) continue;
        const double s = std::sqrt(mu / form);
        ComplexMatrix avg = sigma.matrix() + s * delta;
        if (is_psd(avg)) return DensityMatrix::from_matrix(avg);
    }
    throw std::invalid_argument("far_instance: requested divergence unattainable");
}

ProductEnsemble around(const DensityMatrix& avg, int T, bool diagonal_only,
                       std::uint64_t seed, bool heterogeneous) {
    if (!heterogeneous)
        return ProductEnsemble::of(std::vector<DensityMatrix>(T, avg));
    return heterogeneous_ensemble_around(avg, T, diagonal_only, seed);
}

std::vector<double> classical_probs(const ProductEnsemble& ens, bool averaged) {
    std::vector<double> p(ens.dim, 0.0);
    for (const auto& s : ens.states)
        for (int j = 0; j < ens.dim; ++j) p[j] += s.matrix()(j, j).real();
    for (double& v : p) v /= averaged ? ens.size() : 1.0;
    return p;
}

// p = q + s * delta with classical chi^2(p||q) = mu; delta optionally
// concentrated on the least likely symbol.
DensityMatrix classical_far_average(const ClassicalDistribution& q, double mu,
                                    std::uint64_t seed, bool adversarial) {
    const int d = q.dim();
    int j_min = 0;
    for (int j = 1; j < d; ++j)
        if (q[j] < q[j_min]) j_min = j;

    for (int attempt = 0; attempt < 64; ++attempt) {
        Rng rng(derive_seed(seed, attempt));
        std::vector<double> delta(d, 0.0);
        if (adversarial) {
            delta[j_min] = 1.0;
            for (int j = 0; j < d; ++j)
                if (j != j_min) delta[j] = -1.0 / (d - 1);
        } else if (d == 2) {
            delta[j_min] = -1.0;
            delta[1 - j_min] = 1.0;
        } else {
            // Boost a few random symbols away from the minimum; the mass comes
            // uniformly out of the rest, so the dip per symbol stays shallow.
            // The boost count varies across attempts until p stays nonnegative.
            const int boosts = 1 + attempt % std::min(3, d - 2);
            int placed = 0;
            while (placed < boosts) {
                const int j = static_cast<int>(rng.uniform_index(d));
                if (j == j_min || delta[j] > 0.0) continue;
                delta[j] = 1.0;
                ++placed;
            }
            for (int j = 0; j < d; ++j)
                if (j != j_min && delta[j] == 0.0)
                    delta[j] = -double(boosts) / (d - boosts - 1);
        }
        double form = 0.0;
        for (int j = 0; j < d; ++j) form += delta[j] * delta[j] / q[j];
        if (form <= 1e-12) continue;
        const double s = std::sqrt(mu / form);
        std::vector<double> p(d);
        bool ok = true;
        for (int j = 0; j < d; ++j) {
            p[j] = q[j] + s * delta[j];
            if (p[j] < 0.0) ok = false;
        }
        if (ok) return DensityMatrix::diagonal(p);
    }
    throw std::invalid_argument("far_instance: classical divergence unattainable");
}

} // namespace

TestInstance null_instance(const ObservableKind& kind, int d, int T,
                           std::uint64_t seed, bool heterogeneous) {
    switch (kind.tag) {
        case ObservableTag::MM_A:
            return TestInstance::of(around(DensityMatrix::maximally_mixed(d), T,
                                           false, seed, heterogeneous));
        case ObservableTag::KNOWN_M:
            if (!kind.sigma || kind.sigma->dim() != d)
                throw std::invalid_argument("null_instance: sigma missing or wrong dim");
            return TestInstance::of(
                around(*kind.sigma, T, false, seed, heterogeneous));
        case ObservableTag::UNKNOWN_Z: {
            const DensityMatrix base = depolarize(
                random_state(d, EnsembleMode::GinibreMixed, derive_seed(seed, 100)), 0.25);
            return TestInstance::of(
                around(base, T, false, derive_seed(seed, 101), heterogeneous),
                around(base, T, false, derive_seed(seed, 102), heterogeneous));
        }
        case ObservableTag::CLASSICAL_M:
            if (!kind.q || kind.q->dim() != d)
                throw std::invalid_argument("null_instance: q missing or wrong dim");
            return TestInstance::of(around(kind.q->as_diagonal_state(), T, true,
                                           seed, heterogeneous));
    }
    throw std::invalid_argument("null_instance: invalid kind");
}

TestInstance far_instance(const ObservableKind& kind, int d, int T, double mu,
                          std::uint64_t seed, bool heterogeneous,
                          bool adversarial) {
    if (mu <= 0.0) throw std::invalid_argument("far_instance: mu must be > 0");
    switch (kind.tag) {
        case ObservableTag::MM_A: {
            const DensityMatrix avg = shifted_average(
                DensityMatrix::maximally_mixed(d), mu, seed, false, false);
            return TestInstance::of(around(avg, T, false, derive_seed(seed, 1),
                                           heterogeneous));
        }
        case ObservableTag::KNOWN_M: {
            if (!kind.sigma || kind.sigma->dim() != d)
                throw std::invalid_argument("far_instance: sigma missing or wrong dim");
            const DensityMatrix avg = shifted_average(*kind.sigma, mu, seed, false, true);
            return TestInstance::of(around(avg, T, false, derive_seed(seed, 1),
                                           heterogeneous));
        }
        case ObservableTag::UNKNOWN_Z: {
            // Mixing toward a random pure state keeps the shifted average
            // positive for any attainable Hilbert-Schmidt separation.
            const DensityMatrix base = depolarize(
                random_state(d, EnsembleMode::GinibreMixed, derive_seed(seed, 100)), 0.25);
            DensityMatrix shifted = base;
            bool found = false;
            for (int attempt = 0; attempt < 64 && !found; ++attempt) {
                const DensityMatrix target = random_state(
                    d, EnsembleMode::HaarPure, derive_seed(seed, 200 + attempt));
                const double span = (target.matrix() - base.matrix()).squaredNorm();
                if (mu > span) continue;
                const double w = std::sqrt(mu / span);
                shifted = DensityMatrix::from_matrix(
                    ((1.0 - w) * base.matrix() + w * target.matrix()).eval());
                found = true;
            }
            if (!found)
                throw std::invalid_argument("far_instance: requested divergence unattainable");
            return TestInstance::of(
                around(shifted, T, false, derive_seed(seed, 101), heterogeneous),
                around(base, T, false, derive_seed(seed, 102), heterogeneous));
        }
        case ObservableTag::CLASSICAL_M: {
            if (!kind.q || kind.q->dim() != d)
                throw std::invalid_argument("far_instance: q missing or wrong dim");
            const DensityMatrix avg = classical_far_average(*kind.q, mu, seed, adversarial);
            return TestInstance::of(around(avg, T, true, derive_seed(seed, 1),
                                           heterogeneous));
        }
    }
    throw std::invalid_argument("far_instance: invalid kind");
}

ProductEnsemble antipodal_pure_null(int T, std::uint64_t seed) {
    if (T < 2) throw std::invalid_argument("antipodal_pure_null: T >= 2 required");
    std::vector<DensityMatrix> states;
    states.reserve(T);
    for (int pair = 0; pair < T / 2; ++pair) {
        Rng rng(derive_seed(seed, pair));
        Eigen::VectorXcd psi(2);
        psi[0] = cxd(rng.gaussian(), rng.gaussian());
        psi[1] = cxd(rng.gaussian(), rng.gaussian());
        psi /= psi.norm();
        Eigen::VectorXcd perp(2);
        perp[0] = -std::conj(psi[1]);
        perp[1] = std::conj(psi[0]);
        states.push_back(DensityMatrix::pure(psi));
        states.push_back(DensityMatrix::pure(perp));
    }
    if (T % 2 == 1) states.push_back(DensityMatrix::maximally_mixed(2));
    return ProductEnsemble::of(std::move(states));
}

ClassicalDistribution skewed_hypothesis(int d, double gamma) {
    if (d < 2) throw std::invalid_argument("skewed_hypothesis: d >= 2 required");
    if (gamma <= 0.0 || gamma > 1.0 / d)
        throw std::invalid_argument("skewed_hypothesis: need 0 < gamma <= 1/d");
    std::vector<double> q(d, (1.0 - gamma) / (d - 1));
    q[0] = gamma;
    return ClassicalDistribution::from_probs(q);
}

double native_divergence(const ObservableKind& kind, const TestInstance& instance) {
    switch (kind.tag) {
        case ObservableTag::MM_A:
            return hs_sq(average_state(instance.primary),
                         DensityMatrix::maximally_mixed(instance.primary.dim));
        case ObservableTag::KNOWN_M:
            return bures_chi2(average_state(instance.primary), *kind.sigma);
        case ObservableTag::UNKNOWN_Z:
            if (!instance.second)
                throw std::invalid_argument("native_divergence: missing second ensemble");
            return hs_sq(average_state(instance.primary),
                         average_state(*instance.second));
        case ObservableTag::CLASSICAL_M: {
            std::vector<double> p = classical_probs(instance.primary, true);
            return classical_divergences(ClassicalDistribution::from_probs(p), *kind.q)
                .chi2;
        }
    }
    throw std::invalid_argument("native_divergence: invalid kind");
}

} // namespace qcert
