#include "qcert/testers.hpp"

#include <cmath>
#include <stdexcept>

namespace qcert {

TestDecision decide(double statistic, const ChebyshevRule& rule) {
    if (rule.theta < 0.0) throw std::invalid_argument("decide: theta must be >= 0");
    if (rule.c <= 0.0 || rule.c >= 0.5)
        throw std::invalid_argument("decide: c must lie in (0, 1/2)");
    TestDecision out;
    out.statistic = statistic;
    out.threshold = rule.threshold();
    out.verdict = (statistic >= out.threshold) ? Verdict::FAR : Verdict::CLOSE;
    return out;
}

long required_T(const ObservableKind& kind, double theta, int d, double gamma,
                const Calibration& calibration) {
    if (theta <= 0.0) throw std::invalid_argument("required_T: theta must be > 0");
    if (d < 2) throw std::invalid_argument("required_T: d >= 2 required");
    const double c = calibration.required_constant(kind.tag);
    double formula = 0.0;
    switch (kind.tag) {
        case ObservableTag::MM_A:
        case ObservableTag::UNKNOWN_Z:
            formula = 1.0 / theta;
            break;
        case ObservableTag::KNOWN_M:
            if (gamma <= 0.0)
                throw std::invalid_argument("required_T: KNOWN_M needs gamma > 0");
            formula = std::max(d / theta, std::sqrt(d / (theta * gamma)));
            break;
        case ObservableTag::CLASSICAL_M:
            if (gamma <= 0.0)
                throw std::invalid_argument("required_T: CLASSICAL_M needs gamma > 0");
            formula = std::max(std::sqrt(static_cast<double>(d)) / theta,
                               1.0 / std::sqrt(theta * gamma));
            break;
    }
    return static_cast<long>(std::ceil(c * formula));
}

double epsilon_to_theta(ObservableTag tag, double eps, int d) {
    if (eps <= 0.0) throw std::invalid_argument("epsilon_to_theta: eps must be > 0");
    switch (tag) {
        case ObservableTag::MM_A:
        case ObservableTag::UNKNOWN_Z:
            return 4.0 * eps * eps / d;
        case ObservableTag::KNOWN_M:
            return eps * eps / 1.01;
        case ObservableTag::CLASSICAL_M:
            return 4.0 * eps * eps / 1.01;
    }
    throw std::invalid_argument("epsilon_to_theta: invalid kind");
}

double classical_statistic(const ClassicalSampleBatch& batch,
                           const ClassicalDistribution& q) {
    const int d = q.dim();
    const int T = batch.T;
    if (T < 1 || static_cast<int>(batch.pairs.size()) != T)
        throw std::invalid_argument("classical_statistic: batch size mismatch");
    std::vector<long> count1(d, 0), count2(d, 0);
    for (const auto& [j1, j2] : batch.pairs) {
        if (j1 < 0 || j1 >= d || j2 < 0 || j2 >= d)
            throw std::invalid_argument("classical_statistic: symbol out of range");
        if (q[j1] <= 0.0 || q[j2] <= 0.0)
            throw std::invalid_argument("classical_statistic: symbol outside q's support");
        ++count1[j1];
        ++count2[j2];
    }
    // avg_{s,t} C_st = (1/T^2) sum_j n1(j) n2(j) / q(j).
    double acc = 0.0;
    for (int j = 0; j < d; ++j)
        if (count1[j] > 0 && count2[j] > 0)
            acc += static_cast<double>(count1[j]) * count2[j] / q[j];
    return acc / (static_cast<double>(T) * T) - 1.0;
}

} // namespace qcert
