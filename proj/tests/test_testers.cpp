#include <doctest.h>

#include <cmath>

#include "qcert/fixtures.hpp"
#include "qcert/simulate.hpp"
#include "test_util.hpp"

using namespace qcert;
using namespace qcert::testing;

TEST_CASE("decide: trivial, boundary, and monotonicity cases") {
    ChebyshevRule rule{1.0, 0.005, 10.0};
    CHECK(decide(0.0, rule).verdict == Verdict::CLOSE);
    // Boundary: ties go FAR.
    CHECK(decide(0.995, rule).verdict == Verdict::FAR);
    CHECK(decide(0.9, rule).verdict == Verdict::CLOSE);

    // Monotone in the statistic and scale-consistent.
    Rng rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        const double theta = 0.1 + rng.uniform();
        const double s = 2.0 * rng.uniform();
        const double lambda = 0.1 + 3.0 * rng.uniform();
        ChebyshevRule r{theta, 0.005, 10.0};
        ChebyshevRule scaled{lambda * theta, 0.005, 10.0};
        CHECK(decide(s, r).verdict == decide(lambda * s, scaled).verdict);
        if (decide(s, r).verdict == Verdict::FAR)
            CHECK(decide(s + 0.1, r).verdict == Verdict::FAR);
    }
}

TEST_CASE("required_T: scaling laws and hand-computed cases") {
    Calibration cal = Calibration::defaults();
    ObservableKind a = ObservableKind::mm_a();
    // Halving theta doubles T for the 1/theta kinds.
    const long t1 = required_T(a, 0.2, 2, 0.0, cal);
    const long t2 = required_T(a, 0.1, 2, 0.0, cal);
    CHECK(t2 == 2 * t1);

    // KNOWN_M with gamma = 1/d: max{d/theta, d/sqrt(theta)} = d/theta for theta <= 1.
    ObservableKind m = ObservableKind::known_m(DensityMatrix::maximally_mixed(4));
    const double theta = 0.5;
    const long tm = required_T(m, theta, 4, 0.25, cal);
    CHECK(tm == static_cast<long>(std::ceil(cal.c_known_m * 4.0 / theta)));

    // Classical at d=100, theta=0.1, gamma=0.01: max{sqrt(100)/0.1, 1/sqrt(0.001)}
    // = max{100, 31.6...} = 100.
    ObservableKind c =
        ObservableKind::classical_m(ClassicalDistribution::uniform(100));
    const long tc = required_T(c, 0.1, 100, 0.01, cal);
    CHECK(tc == static_cast<long>(std::ceil(cal.c_classical * 100.0)));

    CHECK_THROWS_AS(required_T(a, 0.0, 2, 0.0, cal), std::invalid_argument);
}

TEST_CASE("epsilon_to_theta: paper conversions") {
    CHECK(close(epsilon_to_theta(ObservableTag::MM_A, 0.5, 2), 0.5, 1e-15));
    CHECK(close(epsilon_to_theta(ObservableTag::KNOWN_M, 1.0, 5), 1.0 / 1.01, 1e-15));
    // Doubling epsilon quadruples theta.
    for (ObservableTag tag : {ObservableTag::MM_A, ObservableTag::KNOWN_M,
                              ObservableTag::UNKNOWN_Z, ObservableTag::CLASSICAL_M})
        CHECK(close(epsilon_to_theta(tag, 0.6, 3), 4.0 * epsilon_to_theta(tag, 0.3, 3),
                    1e-12));
}

TEST_CASE("classical_statistic: single-source cases") {
    ClassicalDistribution q = ClassicalDistribution::from_probs({0.2, 0.8});
    ClassicalSampleBatch collide{1, {{0, 0}}};
    CHECK(close(classical_statistic(collide, q), 1.0 / 0.2 - 1.0, 1e-15));
    ClassicalSampleBatch miss{1, {{0, 1}}};
    CHECK(close(classical_statistic(miss, q), -1.0, 1e-15));
    ClassicalSampleBatch bad{1, {{0, 3}}};
    CHECK_THROWS_AS(classical_statistic(bad, q), std::invalid_argument);
}

TEST_CASE("classical_statistic: matches the naive double loop") {
    Rng rng(2);
    ClassicalDistribution q = ClassicalDistribution::uniform(5);
    for (int rep = 0; rep < 30; ++rep) {
        ClassicalSampleBatch batch;
        batch.T = 6;
        for (int t = 0; t < 6; ++t)
            batch.pairs.emplace_back(static_cast<int>(rng.uniform_index(5)),
                                     static_cast<int>(rng.uniform_index(5)));
        double naive = 0.0;
        for (int s = 0; s < 6; ++s)
            for (int t = 0; t < 6; ++t)
                if (batch.pairs[s].first == batch.pairs[t].second)
                    naive += 1.0 / q[batch.pairs[s].first];
        naive = naive / 36.0 - 1.0;
        CHECK(close(classical_statistic(batch, q), naive, 1e-12));
    }
}

TEST_CASE("classical_statistic: unbiased estimator of chi2(p_avg||q)") {
    // Empirical mean over many trials within 3 standard errors of mu.
    const int d = 4, T = 6;
    ObservableKind kind = ObservableKind::classical_m(
        ClassicalDistribution::from_probs({0.4, 0.3, 0.2, 0.1}));
    TestInstance far = far_instance(kind, d, T, 0.3, 11, true);
    MomentReport moments = exact_moments(kind, far.primary);
    TrialRunner runner(kind, far, ChebyshevRule{1.0, 0.005, 10.0});

    const long trials = 100000;
    double sum = 0.0;
    for (long i = 0; i < trials; ++i)
        sum += runner.run(derive_seed(321, i)).statistic;
    const double emp_mean = sum / trials;
    const double se = std::sqrt(moments.var_exact / trials);
    CHECK(std::abs(emp_mean - moments.mu) <= 3.0 * se + 1e-9);
}

TEST_CASE("run_trial: classical null accepts, sized far instance rejects") {
    // Example scale from the operation contract: d=50, theta=0.5, far instance
    // chi2 = 1.0 at the calibrated T.
    const int d = 50;
    ClassicalDistribution q = ClassicalDistribution::uniform(d);
    ObservableKind kind = ObservableKind::classical_m(q);
    Calibration cal = Calibration::defaults();
    const double theta = 0.5;
    const long T = required_T(kind, theta, d, q.gamma(), cal);
    ChebyshevRule rule{theta, 0.005, 10.0};

    TestInstance null_inst = null_instance(kind, d, static_cast<int>(T), 5, true);
    TestInstance far_inst = far_instance(kind, d, static_cast<int>(T), 1.0, 6, true);
    CHECK(close(native_divergence(kind, far_inst), 1.0, 1e-9));

    auto [null_rep, far_rep] = estimate_success(kind, null_inst, far_inst, rule,
                                                400, 777);
    CHECK(null_rep.far_rate <= 0.01 + (null_rep.wilson_high - null_rep.far_rate));
    CHECK(1.0 - far_rep.far_rate <= 0.05);
}

TEST_CASE("run_trial: quantum null ensemble accepted whp (T=8, d=2)") {
    // Ensemble averaging exactly to I/2 with theta = 1: the statistic can
    // never reach the threshold, heterogeneous or not.
    ObservableKind kind = ObservableKind::mm_a();
    ChebyshevRule rule{1.0, 0.005, 10.0};
    TestInstance het = null_instance(kind, 2, 8, 9, true);
    long far_count = 0;
    TrialRunner runner(kind, het, rule);
    for (int i = 0; i < 300; ++i)
        if (runner.run(derive_seed(10, i)).verdict == Verdict::FAR) ++far_count;
    CHECK(static_cast<double>(far_count) / 300 <= 0.01);
}

TEST_CASE("heterogeneity blindness of the MM_A tester under the null") {
    // rho_avg = I/2 fixtures with genuinely distinct rho_t are accepted at the
    // same rate (within statistical error) as the iid fixture.
    ObservableKind kind = ObservableKind::mm_a();
    const int d = 2, T = 8;
    ChebyshevRule rule{0.25, 0.005, 10.0};
    TestInstance iid = null_instance(kind, d, T, 20, false);
    TestInstance het = null_instance(kind, d, T, 21, true);
    for (const auto& s : het.primary.states)
        CHECK(trace_distance(s, DensityMatrix::maximally_mixed(2)) > 1e-4);

    const long trials = 4000;
    auto [iid_rep, het_rep] =
        estimate_success(kind, iid, het, rule, trials, 22);
    // Both rates estimated from the same trial count; compare with a
    // two-proportion margin of ~3 standard errors.
    const double p_bar = 0.5 * (iid_rep.far_rate + het_rep.far_rate);
    const double se = std::sqrt(std::max(p_bar * (1 - p_bar), 1e-6) * 2.0 / trials);
    CHECK(std::abs(iid_rep.far_rate - het_rep.far_rate) <= 3.0 * se + 0.01);
}

TEST_CASE("Chebyshev margin guarantee (eqn 3/4) is observable empirically") {
    // Classical tester at a size where the bias/stddev margins of the lemma
    // hold with k = 2; the failure rates must then be at most 1/k^2 plus
    // statistical error.
    // The lemma holds for any 0 < c < 1/2; a loose c keeps the margin-
    // satisfying T at desk scale.
    const int d = 4;
    ClassicalDistribution q = ClassicalDistribution::uniform(d);
    ObservableKind kind = ObservableKind::classical_m(q);
    const double theta = 0.4;
    const double c = 0.2, k = 2.0;
    ChebyshevRule rule{theta, c, k};

    // Null side: mu = 0 <= (1-2c) theta; need stddev <= (c/4k)(mu+theta).
    long T = 500;
    TestInstance null_inst = null_instance(kind, d, static_cast<int>(T), 31, true);
    MomentReport null_m = exact_moments(kind, null_inst.primary);
    while (std::sqrt(null_m.var_exact) > (c / (4 * k)) * (null_m.mu + theta)) {
        T *= 2;
        null_inst = null_instance(kind, d, static_cast<int>(T), 31, true);
        null_m = exact_moments(kind, null_inst.primary);
    }
    CHECK(std::abs(null_m.bias) <= (c / 4) * (null_m.mu + theta));

    // Far side: mu > theta with margins at the same T (grow if needed).
    TestInstance far_inst = far_instance(kind, d, static_cast<int>(T), 1.5 * theta, 32, true);
    MomentReport far_m = exact_moments(kind, far_inst.primary);
    int guard = 0;
    while (std::sqrt(far_m.var_exact) > (c / (4 * k)) * (far_m.mu + theta)) {
        T *= 2;
        REQUIRE(++guard < 12);
        far_inst = far_instance(kind, d, static_cast<int>(T), 1.5 * theta, 32, true);
        far_m = exact_moments(kind, far_inst.primary);
    }
    CHECK(std::abs(far_m.bias) <= (c / 4) * (far_m.mu + theta));

    const long trials = 150;
    TrialRunner null_runner(kind, null_inst, rule);
    TrialRunner far_runner(kind, far_inst, rule);
    long null_fail = 0, far_fail = 0;
    for (long i = 0; i < trials; ++i) {
        if (null_runner.run(derive_seed(33, i)).verdict == Verdict::FAR) ++null_fail;
        if (far_runner.run(derive_seed(34, i)).verdict == Verdict::CLOSE) ++far_fail;
    }
    const double budget = 1.0 / (k * k) + 3.0 * std::sqrt(0.25 / trials);
    CHECK(static_cast<double>(null_fail) / trials <= budget);
    CHECK(static_cast<double>(far_fail) / trials <= budget);
}
