#include "qcert/distances.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcert {

namespace {

constexpr double kKernelEig = 1e-12;   // sigma eigenvalue treated as zero
constexpr double kKernelMass = 1e-10;  // |Delta| entry treated as zero on the kernel

ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& m) {
    EigH eig = eig_hermitian(m, 1e-10);
    RealVector roots = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.adjoint();
}

} // namespace

QuantumDivergenceReport quantum_divergences(const DensityMatrix& rho,
                                            const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("quantum_divergences: dimension mismatch");
    const int d = rho.dim();
    QuantumDivergenceReport rep;

    const ComplexMatrix delta = rho.matrix() - sigma.matrix();
    EigH delta_eig = eig_hermitian(delta, 1e-10);
    rep.trace_distance = 0.5 * delta_eig.eigenvalues.cwiseAbs().sum();
    rep.hs_sq = delta_eig.eigenvalues.squaredNorm();

    // Fidelity via  F = (Tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2.  Eigenvalues
    // at round-off level are clipped to exact zero: sqrt() would otherwise
    // turn +1e-16 noise into 1e-8 of spurious trace mass.
    const ComplexMatrix sqrt_sigma = matrix_sqrt_psd(sigma.matrix());
    const ComplexMatrix inner = sqrt_sigma * rho.matrix() * sqrt_sigma;
    EigH inner_eig = eig_hermitian(inner, 1e-9);
    const double noise_floor =
        d * 1e-15 * std::max(1e-30, inner_eig.eigenvalues.cwiseAbs().maxCoeff());
    double root_sum = 0.0;
    for (int i = 0; i < d; ++i)
        if (inner_eig.eigenvalues[i] > noise_floor)
            root_sum += std::sqrt(inner_eig.eigenvalues[i]);
    rep.fidelity = std::min(1.0, root_sum * root_sum);
    rep.infidelity = 1.0 - rep.fidelity;
    rep.bures_sq = 2.0 * (1.0 - std::sqrt(rep.fidelity));

    // Bures chi^2 in sigma's eigenbasis.
    EigH sigma_eig = eig_hermitian(sigma.matrix());
    const ComplexMatrix delta_rot =
        sigma_eig.eigenvectors.adjoint() * delta * sigma_eig.eigenvectors;
    double chi2 = 0.0;
    bool infinite = false;
    for (int i = 0; i < d && !infinite; ++i)
        for (int j = 0; j < d; ++j) {
            const double qi = std::max(0.0, sigma_eig.eigenvalues[i]);
            const double qj = std::max(0.0, sigma_eig.eigenvalues[j]);
            const double mass = std::norm(delta_rot(i, j));
            if (qi + qj <= kKernelEig) {
                if (std::sqrt(mass) > kKernelMass) {
                    infinite = true;
                    break;
                }
            } else {
                chi2 += 2.0 * mass / (qi + qj);
            }
        }
    rep.bures_chi2 = infinite ? std::numeric_limits<double>::infinity() : chi2;
    return rep;
}

ClassicalDivergenceReport classical_divergences(const ClassicalDistribution& p,
                                                const ClassicalDistribution& q) {
    if (p.dim() != q.dim())
        throw std::invalid_argument("classical_divergences: dimension mismatch");
    ClassicalDivergenceReport rep;
    double tv = 0.0, chi2 = 0.0, hell = 0.0;
    bool infinite = false;
    for (int j = 0; j < p.dim(); ++j) {
        const double pj = p[j], qj = q[j];
        tv += std::abs(pj - qj);
        const double sd = std::sqrt(pj) - std::sqrt(qj);
        hell += sd * sd;
        if (qj <= 0.0) {
            if (pj > 0.0) infinite = true;
        } else {
            chi2 += (pj - qj) * (pj - qj) / qj;
        }
    }
    rep.tv = 0.5 * tv;
    rep.chi2 = infinite ? std::numeric_limits<double>::infinity() : chi2;
    rep.hellinger_sq = hell;
    return rep;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    EigH eig = eig_hermitian(rho.matrix() - sigma.matrix(), 1e-10);
    return 0.5 * eig.eigenvalues.cwiseAbs().sum();
}

double hs_sq(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return (rho.matrix() - sigma.matrix()).squaredNorm();
}

double bures_chi2(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return quantum_divergences(rho, sigma).bures_chi2;
}

double chi2_upper_variant(const DensityMatrix& rho, const DensityMatrix& sigma) {
    EigH sigma_eig = eig_hermitian(sigma.matrix());
    if (sigma_eig.eigenvalues[sigma.dim() - 1] <= kKernelEig)
        throw std::invalid_argument("chi2_upper_variant: sigma must be full-rank");
    const ComplexMatrix rho_rot =
        sigma_eig.eigenvectors.adjoint() * rho.matrix() * sigma_eig.eigenvectors;
    const ComplexMatrix rho_sq = rho_rot * rho_rot;
    double acc = 0.0;
    for (int i = 0; i < sigma.dim(); ++i)
        acc += rho_sq(i, i).real() / sigma_eig.eigenvalues[i];
    return acc - 1.0;
}

} // namespace qcert
