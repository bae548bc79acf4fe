#include "qcert/schur_sampler.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace qcert {

namespace {

using Mat = Eigen::MatrixXcd;

// Isometry V_{j'} -> V_j (x) C^2 for j' = j + 1/2.  Basis index k encodes
// m = j - k; qubit index 0 is m_s = +1/2.
Mat cg_up(int two_j) {
    const int dim_in = two_j + 1;
    const int dim_out = two_j + 2;
    Mat w = Mat::Zero(dim_out, 2 * dim_in);
    for (int kp = 0; kp < dim_out; ++kp) {
        if (kp <= two_j)
            w(kp, 2 * kp + 0) = std::sqrt(double(two_j + 1 - kp) / (two_j + 1));
        if (kp >= 1)
            w(kp, 2 * (kp - 1) + 1) = std::sqrt(double(kp) / (two_j + 1));
    }
    return w;
}

// Isometry for j' = j - 1/2 (requires two_j >= 1).
Mat cg_down(int two_j) {
    const int dim_in = two_j + 1;
    const int dim_out = two_j;
    Mat w = Mat::Zero(dim_out, 2 * dim_in);
    for (int kp = 0; kp < dim_out; ++kp) {
        w(kp, 2 * (kp + 1) + 0) = -std::sqrt(double(kp + 1) / (two_j + 1));
        w(kp, 2 * kp + 1) = std::sqrt(double(two_j - kp) / (two_j + 1));
    }
    return w;
}

} // namespace

SpinSectorDistribution spin_sector_distribution(
    const std::vector<DensityMatrix>& qubits) {
    if (qubits.empty())
        throw std::invalid_argument("spin_sector_distribution: empty ensemble");
    for (const auto& s : qubits)
        if (s.dim() != 2)
            throw std::invalid_argument("spin_sector_distribution: qubits only (d = 2)");

    // Unnormalized sector states chi_j, keyed by 2j; Tr chi_j is the
    // probability of having observed total spin j so far.
    std::map<int, Mat> sectors;
    sectors[1] = qubits.front().matrix();

    for (std::size_t t = 1; t < qubits.size(); ++t) {
        const Mat& rho = qubits[t].matrix();
        std::map<int, Mat> next;
        auto add = [&](int two_j, const Mat& m) {
            auto it = next.find(two_j);
            if (it == next.end())
                next.emplace(two_j, m);
            else
                it->second += m;
        };
        for (const auto& [two_j, chi] : sectors) {
            const int dim = two_j + 1;
            Mat joint(2 * dim, 2 * dim);
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b)
                    joint.block(2 * a, 2 * b, 2, 2) = chi(a, b) * rho;
            const Mat up = cg_up(two_j);
            add(two_j + 1, up * joint * up.adjoint());
            if (two_j >= 1) {
                const Mat down = cg_down(two_j);
                add(two_j - 1, down * joint * down.adjoint());
            }
        }
        sectors = std::move(next);
    }

    SpinSectorDistribution out;
    double total = 0.0;
    for (const auto& [two_j, chi] : sectors) {
        out.two_j.push_back(two_j);
        const double p = chi.trace().real();
        out.probs.push_back(std::max(0.0, p));
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw NumericalViolation(
            "spin_sector_distribution: sector probabilities do not sum to 1");
    for (double& p : out.probs) p /= total;
    return out;
}

double collision_observable_value(int T, int two_j) {
    const double j = 0.5 * two_j;
    const double transposition_sum = T * (T - 1) / 4.0 + j * (j + 1) - 0.75 * T;
    return (2.0 / (static_cast<double>(T) * T)) * transposition_sum - 0.5;
}

} // namespace qcert
