#include "qcert/states.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qcert/rng.hpp"

namespace qcert {

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kEigFloor = -1e-10;

ComplexMatrix validated_density(const ComplexMatrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("DensityMatrix: matrix not square");
    if (hermiticity_error(m) > kHermTol)
        throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
    if (std::abs(m.trace().real() - 1.0) > kTraceTol || std::abs(m.trace().imag()) > kTraceTol)
        throw std::invalid_argument("DensityMatrix: trace != 1 within 1e-12");
    // Exactly diagonal matrices are validated entry-wise; no eigensolve.
    bool diagonal = true;
    for (Eigen::Index i = 0; i < m.rows() && diagonal; ++i)
        for (Eigen::Index j = 0; j < m.cols() && diagonal; ++j)
            if (i != j && m(i, j) != cxd(0.0, 0.0)) diagonal = false;
    if (diagonal) {
        double min_entry = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            min_entry = std::min(min_entry, m(i, i).real());
        if (min_entry < kEigFloor)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue below -1e-10");
        if (min_entry >= 0.0) return m;
        ComplexMatrix out = m;
        double sum = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out(i, i) = std::max(0.0, m(i, i).real());
            sum += out(i, i).real();
        }
        return out / sum;
    }
    EigH eig = eig_hermitian(m);
    const double min_eig = eig.eigenvalues[m.rows() - 1];
    if (min_eig < kEigFloor)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue below -1e-10");
    if (min_eig >= 0.0) return 0.5 * (m + m.adjoint());
    // Round-off repair: clip the slightly negative tail and renormalize.
    RealVector clipped = eig.eigenvalues.cwiseMax(0.0);
    clipped /= clipped.sum();
    ComplexMatrix out = eig.eigenvectors * clipped.asDiagonal() *
                        eig.eigenvectors.adjoint();
    return 0.5 * (out + out.adjoint());
}

} // namespace

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m) {
    return DensityMatrix(validated_density(m));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    double norm2 = psi.squaredNorm();
    if (norm2 <= 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
    ComplexMatrix m = (psi * psi.adjoint()) / norm2;
    return DensityMatrix(validated_density(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
    if (d < 1) throw std::invalid_argument("maximally_mixed: dim < 1");
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::diagonal(const std::vector<double>& probs) {
    ComplexMatrix m = ComplexMatrix::Zero(probs.size(), probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) m(i, i) = probs[i];
    return DensityMatrix(validated_density(m));
}

double DensityMatrix::min_eigenvalue() const {
    EigH eig = eig_hermitian(matrix_);
    return eig.eigenvalues[dim() - 1];
}

ProductEnsemble ProductEnsemble::of(std::vector<DensityMatrix> states) {
    if (states.empty()) throw std::invalid_argument("ProductEnsemble: T >= 1 required");
    int d = states.front().dim();
    for (const auto& s : states)
        if (s.dim() != d) throw std::invalid_argument("ProductEnsemble: mixed dimensions");
    return ProductEnsemble{d, std::move(states)};
}

ClassicalDistribution ClassicalDistribution::from_probs(std::vector<double> probs) {
    if (probs.empty()) throw std::invalid_argument("ClassicalDistribution: empty");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("ClassicalDistribution: negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("ClassicalDistribution: probabilities do not sum to 1");
    return ClassicalDistribution(std::move(probs));
}

ClassicalDistribution ClassicalDistribution::uniform(int d) {
    if (d < 1) throw std::invalid_argument("ClassicalDistribution: dim < 1");
    return ClassicalDistribution(std::vector<double>(d, 1.0 / d));
}

double ClassicalDistribution::gamma() const {
    return *std::min_element(probs_.begin(), probs_.end());
}

DensityMatrix ClassicalDistribution::as_diagonal_state() const {
    return DensityMatrix::diagonal(probs_);
}

DensityMatrix average_state(const ProductEnsemble& ens) {
    ComplexMatrix acc = ComplexMatrix::Zero(ens.dim, ens.dim);
    for (const auto& s : ens.states) acc += s.matrix();
    return DensityMatrix::from_matrix(acc / static_cast<double>(ens.size()));
}

EnsembleMode ensemble_mode_from_string(const std::string& name) {
    if (name == "haar_pure") return EnsembleMode::HaarPure;
    if (name == "ginibre_mixed") return EnsembleMode::GinibreMixed;
    if (name == "classical_dirichlet") return EnsembleMode::ClassicalDirichlet;
    throw std::invalid_argument("unknown ensemble mode: " + name);
}

DensityMatrix random_state(int d, EnsembleMode mode, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("random_state: d >= 2 required");
    Rng rng(seed);
    switch (mode) {
        case EnsembleMode::HaarPure: {
            Eigen::VectorXcd psi(d);
            for (int i = 0; i < d; ++i) psi[i] = cxd(rng.gaussian(), rng.gaussian());
            return DensityMatrix::pure(psi);
        }
        case EnsembleMode::GinibreMixed: {
            ComplexMatrix g(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) g(i, j) = cxd(rng.gaussian(), rng.gaussian());
            ComplexMatrix m = g * g.adjoint();
            return DensityMatrix::from_matrix(m / m.trace().real());
        }
        case EnsembleMode::ClassicalDirichlet: {
            std::vector<double> p(d);
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                p[i] = rng.exponential();
                sum += p[i];
            }
            for (double& v : p) v /= sum;
            return DensityMatrix::diagonal(p);
        }
    }
    throw std::invalid_argument("random_state: invalid mode");
}

ProductEnsemble random_ensemble(int d, int T, EnsembleMode mode, std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("random_ensemble: T >= 1 required");
    std::vector<DensityMatrix> states;
    states.reserve(T);
    for (int t = 0; t < T; ++t)
        states.push_back(random_state(d, mode, derive_seed(seed, t)));
    return ProductEnsemble::of(std::move(states));
}

DensityMatrix depolarize(const DensityMatrix& rho, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("depolarize: lambda outside [0,1]");
    const int d = rho.dim();
    ComplexMatrix m = (1.0 - lambda) * rho.matrix() +
                      (lambda / d) * ComplexMatrix::Identity(d, d);
    return DensityMatrix::from_matrix(m);
}

PerturbStyle perturb_style_from_string(const std::string& name) {
    if (name == "coherent") return PerturbStyle::Coherent;
    if (name == "diagonal") return PerturbStyle::Diagonal;
    if (name == "pure_mix") return PerturbStyle::PureMix;
    throw std::invalid_argument("unknown perturbation style: " + name);
}

namespace {

double trace_norm(const ComplexMatrix& x) {
    EigH eig = eig_hermitian(x);
    return eig.eigenvalues.cwiseAbs().sum();
}

ComplexMatrix random_traceless_hermitian(int d, bool diagonal_only, Rng& rng) {
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

double min_eig(const ComplexMatrix& h) {
    EigH eig = eig_hermitian(h);
    return eig.eigenvalues[h.rows() - 1];
}

// Average state sitting at trace distance exactly `target` from sigma.
ComplexMatrix perturbed_average(const DensityMatrix& sigma, double target,
                                PerturbStyle style, Rng& rng) {
    const int d = sigma.dim();
    if (target == 0.0) return sigma.matrix();
    for (int attempt = 0; attempt < 64; ++attempt) {
        ComplexMatrix direction;
        if (style == PerturbStyle::PureMix) {
            ComplexMatrix mix = ComplexMatrix::Zero(d, d);
            for (int k = 0; k < 3; ++k) {
                Eigen::VectorXcd psi(d);
                for (int i = 0; i < d; ++i) psi[i] = cxd(rng.gaussian(), rng.gaussian());
                psi /= psi.norm();
                mix += (psi * psi.adjoint()) / 3.0;
            }
            direction = mix - sigma.matrix();
        } else {
            direction = random_traceless_hermitian(
                d, style == PerturbStyle::Diagonal, rng);
        }
        const double dist = 0.5 * trace_norm(direction);
        if (dist <= 1e-12) continue;
        ComplexMatrix avg = sigma.matrix() + (target / dist) * direction;
        if (min_eig(avg) >= 0.0) return avg;
    }
    throw std::invalid_argument(
        "perturb_ensemble: target trace distance unattainable for this style and sigma");
}

} // namespace

ProductEnsemble heterogeneous_ensemble_around(const DensityMatrix& avg, int T,
                                              bool diagonal_only,
                                              std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("heterogeneous_ensemble_around: T >= 1");
    const int d = avg.dim();

    // Zero-sum heterogeneity pattern; all coefficients nonzero.
    std::vector<double> coeff(T, 0.0);
    if (T > 1) {
        if (T % 2 == 0) {
            for (int t = 0; t < T; ++t) coeff[t] = (t % 2 == 0) ? 1.0 : -1.0;
        } else {
            // Odd T: T-1 ones against one balancing coefficient.
            for (int t = 0; t + 1 < T; ++t) coeff[t] = 1.0;
            coeff[T - 1] = -static_cast<double>(T - 1);
        }
    }

    Rng eta_rng(seed);
    ComplexMatrix eta = random_traceless_hermitian(d, diagonal_only, eta_rng);
    const double lam = min_eig(avg.matrix());
    const double eta_norm = eig_hermitian(eta).eigenvalues.cwiseAbs().maxCoeff();
    double max_coeff = 0.0;
    for (double c : coeff) max_coeff = std::max(max_coeff, std::abs(c));
    double scale = 0.0;
    if (T > 1 && lam > 1e-12 && eta_norm > 0.0)
        scale = 0.5 * lam / (eta_norm * max_coeff);

    std::vector<DensityMatrix> states;
    states.reserve(T);
    for (int t = 0; t < T; ++t)
        states.push_back(DensityMatrix::from_matrix(avg.matrix() + (scale * coeff[t]) * eta));
    return ProductEnsemble::of(std::move(states));
}

ProductEnsemble perturb_ensemble(const DensityMatrix& sigma, double target, int T,
                                 PerturbStyle style, std::uint64_t seed) {
    if (target < 0.0) throw std::invalid_argument("perturb_ensemble: negative target");
    if (T < 1) throw std::invalid_argument("perturb_ensemble: T >= 1 required");
    Rng rng(derive_seed(seed, 0));
    ComplexMatrix avg = perturbed_average(sigma, target, style, rng);
    return heterogeneous_ensemble_around(DensityMatrix::from_matrix(avg), T,
                                         style == PerturbStyle::Diagonal,
                                         derive_seed(seed, 1));
}

ProductEnsemble ensemble_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("ensemble JSON: parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("states"))
        throw std::invalid_argument("ensemble JSON: expected object with 'dim' and 'states'");
    if (!j["dim"].is_number_integer())
        throw std::invalid_argument("ensemble JSON: field 'dim' must be an integer");
    const int d = j["dim"].get<int>();
    if (d < 1) throw std::invalid_argument("ensemble JSON: field 'dim' must be >= 1");
    if (!j["states"].is_array() || j["states"].empty())
        throw std::invalid_argument("ensemble JSON: field 'states' must be a nonempty array");

    std::vector<DensityMatrix> states;
    for (std::size_t t = 0; t < j["states"].size(); ++t) {
        const auto& st = j["states"][t];
        const std::string where = "states[" + std::to_string(t) + "]";
        if (!st.is_array() || st.size() != static_cast<std::size_t>(d) * d)
            throw std::invalid_argument("ensemble JSON: " + where + " must hold " +
                                        std::to_string(d * d) + " [re,im] pairs");
        ComplexMatrix m(d, d);
        for (std::size_t k = 0; k < st.size(); ++k) {
            const auto& entry = st[k];
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                !entry[1].is_number())
                throw std::invalid_argument("ensemble JSON: " + where + "[" +
                                            std::to_string(k) + "] must be [re,im]");
            m(k / d, k % d) = cxd(entry[0].get<double>(), entry[1].get<double>());
        }
        try {
            states.push_back(DensityMatrix::from_matrix(m));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("ensemble JSON: " + where + ": " + e.what());
        }
    }
    return ProductEnsemble::of(std::move(states));
}

std::string ensemble_to_json_text(const ProductEnsemble& ens) {
    nlohmann::json j;
    j["dim"] = ens.dim;
    auto states = nlohmann::json::array();
    for (const auto& s : ens.states) {
        auto entries = nlohmann::json::array();
        for (int i = 0; i < ens.dim; ++i)
            for (int k = 0; k < ens.dim; ++k) {
                const cxd v = s.matrix()(i, k);
                entries.push_back({v.real(), v.imag()});
            }
        states.push_back(std::move(entries));
    }
    j["states"] = std::move(states);
    return j.dump(2);
}

ProductEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open ensemble file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return ensemble_from_json_text(buf.str());
}

void save_ensemble(const ProductEnsemble& ens, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write ensemble file: " + path);
    out << ensemble_to_json_text(ens) << "\n";
}

} // namespace qcert
