#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qcert/observables.hpp"

namespace qcert {

// Chebyshev decision rule: compare the measured statistic with (1-c) theta.
// Defaults follow the c = .005, k = 10 instantiation.
struct ChebyshevRule {
    double theta = 0.0;
    double c = 0.005;
    double k = 10.0;

    double threshold() const { return (1.0 - c) * theta; }
};

enum class Verdict { CLOSE, FAR };

struct TestDecision {
    double statistic = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::CLOSE;
    ObservableTag kind = ObservableTag::MM_A;
    int T_used = 0;
};

// FAR iff statistic >= (1-c) theta; ties go FAR.
TestDecision decide(double statistic, const ChebyshevRule& rule);

// Tester sample-size constants per kind, plus the frozen variance-bound
// constants; see data/calibration.json for how the values were produced.
struct Calibration {
    double c_mm_a;
    double c_known_m;
    double c_unknown_z;
    double c_classical;
    double k_mm_a;
    double k_known_m;
    double k_unknown_z;
    double k_classical;

    static Calibration defaults();
    static Calibration from_json_text(const std::string& text);
    static Calibration load(const std::string& path);
    std::string to_json_text() const;

    double required_constant(ObservableTag tag) const;
    double variance_constant(ObservableTag tag) const;
};

// ceil(C_kind * f(theta, d, gamma)) with the kind's sample-size law.
long required_T(const ObservableKind& kind, double theta, int d, double gamma,
                const Calibration& calibration);

// Conversion from trace-distance epsilon to the native robust threshold theta.
double epsilon_to_theta(ObservableTag tag, double eps, int d);

// Two samples per source: pairs[t] = (J1_t, J2_t), symbols in [0, d).
struct ClassicalSampleBatch {
    int T = 0;
    std::vector<std::pair<int, int>> pairs;
};

// M = avg_{s,t in [T]} C_st - 1 over all ordered pairs including s = t
// (the diagonal uses the two independent samples from one source).
double classical_statistic(const ClassicalSampleBatch& batch,
                           const ClassicalDistribution& q);

} // namespace qcert
