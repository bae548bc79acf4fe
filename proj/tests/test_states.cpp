#include <doctest.h>

#include "qcert/distances.hpp"
#include "qcert/rng.hpp"
#include "qcert/states.hpp"
#include "test_util.hpp"

using namespace qcert;
using namespace qcert::testing;

TEST_CASE("DensityMatrix: invariants enforced") {
    ComplexMatrix not_unit = ComplexMatrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix::from_matrix(not_unit), std::invalid_argument);

    ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix::from_matrix(neg), std::invalid_argument);

    // A -1e-11 eigenvalue is repaired by clipping and renormalizing.
    ComplexMatrix tiny = ComplexMatrix::Zero(2, 2);
    tiny(0, 0) = 1.0 + 1e-11;
    tiny(1, 1) = -1e-11;
    DensityMatrix repaired = DensityMatrix::from_matrix(tiny);
    CHECK(repaired.min_eigenvalue() >= 0.0);
    CHECK(close(repaired.matrix().trace().real(), 1.0, 1e-12));
}

TEST_CASE("average_state: identical copies and basis-projector symmetry") {
    Rng rng(21);
    DensityMatrix rho = random_state(3, EnsembleMode::GinibreMixed, 99);
    ProductEnsemble same = ProductEnsemble::of({rho, rho, rho});
    CHECK(max_abs_diff(average_state(same).matrix(), rho.matrix()) < 1e-13);

    ProductEnsemble basis = ProductEnsemble::of(
        {DensityMatrix::diagonal({1.0, 0.0}), DensityMatrix::diagonal({0.0, 1.0})});
    CHECK(max_abs_diff(average_state(basis).matrix(),
                       DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
}

TEST_CASE("average_state: matches naive summation on random T=5 d=3") {
    ProductEnsemble ens = random_ensemble(3, 5, EnsembleMode::GinibreMixed, 31);
    ComplexMatrix naive = ComplexMatrix::Zero(3, 3);
    for (const auto& s : ens.states) naive += s.matrix() / 5.0;
    CHECK(max_abs_diff(average_state(ens).matrix(), naive) < 1e-14);
}

TEST_CASE("random_ensemble: purity, determinism, mode validation") {
    ProductEnsemble pure = random_ensemble(4, 6, EnsembleMode::HaarPure, 5);
    for (const auto& s : pure.states) CHECK(close(s.purity(), 1.0, 1e-10));

    ProductEnsemble a = random_ensemble(3, 4, EnsembleMode::GinibreMixed, 77);
    ProductEnsemble b = random_ensemble(3, 4, EnsembleMode::GinibreMixed, 77);
    for (int t = 0; t < 4; ++t)
        CHECK(max_abs_diff(a.states[t].matrix(), b.states[t].matrix()) == 0.0);

    CHECK_THROWS_AS(ensemble_mode_from_string("nonsense"), std::invalid_argument);

    ProductEnsemble cls = random_ensemble(4, 3, EnsembleMode::ClassicalDirichlet, 9);
    for (const auto& s : cls.states)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) CHECK(std::abs(s.matrix()(i, j)) == 0.0);
}

TEST_CASE("random_ensemble: ginibre mean concentrates on I/2") {
    ProductEnsemble big = random_ensemble(2, 10000, EnsembleMode::GinibreMixed, 123);
    ComplexMatrix mean = average_state(big).matrix();
    CHECK(max_abs_diff(mean, DensityMatrix::maximally_mixed(2).matrix()) < 0.05);
}

TEST_CASE("depolarize: endpoints and Bures cost bound") {
    DensityMatrix rho = random_state(3, EnsembleMode::HaarPure, 42);
    CHECK(max_abs_diff(depolarize(rho, 0.0).matrix(), rho.matrix()) < 1e-15);
    CHECK(max_abs_diff(depolarize(rho, 1.0).matrix(),
                       DensityMatrix::maximally_mixed(3).matrix()) < 1e-15);
    CHECK_THROWS_AS(depolarize(rho, 1.5), std::invalid_argument);

    // D_B(tau, tau')^2 <= 2 lambda for random pure states.
    Rng rng(7);
    for (int rep = 0; rep < 30; ++rep) {
        DensityMatrix tau = random_state(2, EnsembleMode::HaarPure, 1000 + rep);
        const double lambda = 0.05 + 0.9 * rng.uniform();
        QuantumDivergenceReport div = quantum_divergences(tau, depolarize(tau, lambda));
        CHECK(div.bures_sq <= 2.0 * lambda + 1e-9);
    }

    // Minimum eigenvalue floor lambda/d.
    DensityMatrix mixed = depolarize(rho, 0.3);
    CHECK(mixed.min_eigenvalue() >= 0.3 / 3 - 1e-12);
}

TEST_CASE("depolarize commutes with averaging (channel linearity)") {
    ProductEnsemble ens = random_ensemble(3, 4, EnsembleMode::GinibreMixed, 55);
    const double lambda = 0.37;
    std::vector<DensityMatrix> mapped;
    for (const auto& s : ens.states) mapped.push_back(depolarize(s, lambda));
    ComplexMatrix lhs = average_state(ProductEnsemble::of(mapped)).matrix();
    ComplexMatrix rhs = depolarize(average_state(ens), lambda).matrix();
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
}

TEST_CASE("perturb_ensemble: zero target reproduces sigma exactly but heterogeneously") {
    DensityMatrix sigma = DensityMatrix::maximally_mixed(2);
    ProductEnsemble ens = perturb_ensemble(sigma, 0.0, 6, PerturbStyle::Coherent, 3);
    CHECK(max_abs_diff(average_state(ens).matrix(), sigma.matrix()) < 1e-12);
    for (const auto& s : ens.states)
        CHECK(trace_distance(s, sigma) > 1e-4);  // genuinely spread out
}

TEST_CASE("perturb_ensemble: coherent target is hit within tolerance") {
    DensityMatrix sigma = DensityMatrix::maximally_mixed(2);
    ProductEnsemble ens = perturb_ensemble(sigma, 0.25, 5, PerturbStyle::Coherent, 8);
    const double dist = trace_distance(average_state(ens), sigma);
    CHECK(dist >= 0.245);
    CHECK(dist <= 0.255);
}

TEST_CASE("perturb_ensemble: diagonal style keeps everything diagonal") {
    DensityMatrix sigma = DensityMatrix::maximally_mixed(3);
    ProductEnsemble ens = perturb_ensemble(sigma, 0.2, 4, PerturbStyle::Diagonal, 4);
    for (const auto& s : ens.states)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) CHECK(std::abs(s.matrix()(i, j)) < 1e-14);
    CHECK(close(trace_distance(average_state(ens), sigma), 0.2, 0.02));
}

TEST_CASE("perturb_ensemble: pure_mix style and unattainable target") {
    DensityMatrix sigma = DensityMatrix::maximally_mixed(2);
    ProductEnsemble ens = perturb_ensemble(sigma, 0.3, 4, PerturbStyle::PureMix, 5);
    CHECK(close(trace_distance(average_state(ens), sigma), 0.3, 0.01));

    // For sigma = I/2 no state is farther than 1 - 1/d = 1/2.
    CHECK_THROWS_AS(perturb_ensemble(sigma, 0.8, 4, PerturbStyle::PureMix, 5),
                    std::invalid_argument);
}

TEST_CASE("ensemble JSON: round trip and diagnostics") {
    ProductEnsemble ens = random_ensemble(2, 3, EnsembleMode::GinibreMixed, 10);
    ProductEnsemble back = ensemble_from_json_text(ensemble_to_json_text(ens));
    CHECK(back.dim == 2);
    CHECK(back.size() == 3);
    for (int t = 0; t < 3; ++t)
        CHECK(max_abs_diff(back.states[t].matrix(), ens.states[t].matrix()) < 1e-15);

    CHECK_THROWS_WITH_AS(ensemble_from_json_text("{\"dim\": 2}"),
                         doctest::Contains("states"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        ensemble_from_json_text("{\"dim\": 2, \"states\": [[[1,0],[0,0],[0,0]]]}"),
        doctest::Contains("states[0]"), std::invalid_argument);
    // Valid shape, invalid state (trace 2).
    CHECK_THROWS_WITH_AS(
        ensemble_from_json_text(
            "{\"dim\": 2, \"states\": [[[1,0],[0,0],[0,0],[1,0]]]}"),
        doctest::Contains("states[0]"), std::invalid_argument);
}

TEST_CASE("seed derivation: stable and spread") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}
