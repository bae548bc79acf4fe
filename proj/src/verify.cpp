#include "qcert/verify.hpp"

#include <algorithm>
#include <cmath>

#include "qcert/efron_stein.hpp"
#include "qcert/fixtures.hpp"
#include "qcert/rng.hpp"

namespace qcert {

namespace {

class Tracker {
public:
    explicit Tracker(std::vector<std::string> names) {
        for (auto& n : names) results_.push_back({std::move(n), 0, 0.0});
    }

    void record(const std::string& name, double violation) {
        for (auto& r : results_)
            if (r.name == name) {
                ++r.checks;
                r.max_violation = std::max(r.max_violation, violation);
                return;
            }
        throw std::logic_error("verify: unknown property " + name);
    }

    void inject(const std::string& name) {
        if (name.empty()) return;
        for (auto& r : results_)
            if (r.name == name) {
                r.max_violation += 1e-3;
                return;
            }
        throw std::invalid_argument("verify: unknown injection key '" + name + "'");
    }

    std::vector<PropertyResult> take() { return std::move(results_); }

private:
    std::vector<PropertyResult> results_;
};

double excess(double lhs, double rhs) { return std::max(0.0, lhs - rhs); }

// Fidelity is obtained through a matrix square root whose accuracy degrades
// to ~1e-8 for near-singular inputs; inequalities with a fidelity side get
// this much slack before counting as violations.
constexpr double kFidelitySlack = 3e-8;

} // namespace

bool SuiteResult::pass(double tol) const {
    return std::all_of(properties.begin(), properties.end(),
                       [&](const PropertyResult& p) { return p.max_violation <= tol; });
}

double SuiteResult::worst() const {
    double w = 0.0;
    for (const auto& p : properties) w = std::max(w, p.max_violation);
    return w;
}

SuiteResult run_efron_stein_suite(long instances, std::uint64_t seed,
                                  const std::string& inject) {
    Tracker tracker({"reconstruction", "component_mean_zero", "component_locality",
                     "partial_sum_identity", "orthogonality", "parseval",
                     "variance_identity", "local_variance_identity", "qes_slack",
                     "local_variance_routes"});

    for (long rep = 0; rep < instances; ++rep) {
        const std::uint64_t inst_seed = derive_seed(seed, rep);
        Rng shape_rng(inst_seed);
        const int n = 2 + static_cast<int>(shape_rng.uniform_index(3));  // 2..4
        std::vector<int> dims(n);
        for (int i = 0; i < n; ++i)
            dims[i] = 2 + static_cast<int>(shape_rng.uniform_index(2));  // 2..3

        std::vector<DensityMatrix> states;
        for (int i = 0; i < n; ++i)
            states.push_back(random_state(dims[i], EnsembleMode::GinibreMixed,
                                          derive_seed(inst_seed, 100 + i)));
        ESContext ctx = ESContext::of(states);
        const long dim = ctx.space().total_dim;

        Rng obs_rng(derive_seed(inst_seed, 200));
        ComplexMatrix x(dim, dim);
        for (long i = 0; i < dim; ++i) {
            x(i, i) = obs_rng.gaussian();
            for (long j = i + 1; j < dim; ++j) {
                const cxd v(0.5 * obs_rng.gaussian(), 0.5 * obs_rng.gaussian());
                x(i, j) = v;
                x(j, i) = std::conj(v);
            }
        }

        ESDecomposition dec = es_decompose(x, ctx);
        const std::uint32_t full = (1u << n) - 1;

        ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
        for (const auto& [mask, comp] : dec.components) sum += comp;
        tracker.record("reconstruction", (sum - x).cwiseAbs().maxCoeff());

        for (const auto& [mask, comp] : dec.components)
            for (int j = 0; j < n; ++j)
                if (mask & (1u << j))
                    tracker.record("component_mean_zero",
                                   marginalize(comp, ctx, 1u << j).cwiseAbs().maxCoeff());

        for (const auto& [mask, comp] : dec.components) {
            if (mask == full) continue;
            std::vector<int> slots_j, slots_rest;
            long rest_dim = 1;
            for (int j = 0; j < n; ++j) {
                if (mask & (1u << j)) {
                    slots_j.push_back(j);
                } else {
                    slots_rest.push_back(j);
                    rest_dim *= dims[j];
                }
            }
            if (slots_j.empty()) continue;
            ComplexMatrix reduced =
                partial_trace(comp, ctx.space(), slots_rest) / double(rest_dim);
            tracker.record(
                "component_locality",
                (embed_on_slots(reduced, ctx.space(), slots_j) - comp)
                    .cwiseAbs()
                    .maxCoeff());
        }

        // Partial-sum identity on a few subsets.
        for (std::uint32_t j_mask : {full, full >> 1, 1u}) {
            ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
            std::uint32_t sub = j_mask;
            while (true) {
                acc += dec.components.at(sub);
                if (sub == 0) break;
                sub = (sub - 1) & j_mask;
            }
            tracker.record(
                "partial_sum_identity",
                (acc - marginalize(x, ctx, full & ~j_mask)).cwiseAbs().maxCoeff());
        }

        double parseval = 0.0;
        for (const auto& [mi, ci] : dec.components) {
            parseval += ctx.inner(ci, ci);
            for (const auto& [mj, cj] : dec.components)
                if (mi < mj)
                    tracker.record("orthogonality", std::abs(ctx.inner(ci, cj)));
        }
        tracker.record("parseval",
                       std::abs(parseval - ctx.expectation((x * x).eval())));

        double var_sum = 0.0;
        for (const auto& [mask, comp] : dec.components)
            if (mask != 0) var_sum += ctx.inner(comp, comp);
        const QesCheck qes = qes_check(x, ctx);
        tracker.record("variance_identity", std::abs(var_sum - qes.variance));
        tracker.record("qes_slack", excess(-qes.slack, 0.0));

        for (int i = 0; i < n; ++i) {
            double local_sum = 0.0;
            for (const auto& [mask, comp] : dec.components)
                if (mask & (1u << i)) local_sum += ctx.inner(comp, comp);
            const ComplexMatrix di = es_deriv(x, ctx, i);
            tracker.record("local_variance_identity",
                           std::abs(local_sum - ctx.expectation((di * di).eval())));
        }

        // Doubled-space route agreement; the doubled space is dense, so only
        // the small instances run it.
        if (dim * dim <= 256) {
            const ComplexMatrix d0 = es_deriv(x, ctx, 0);
            const double direct = ctx.expectation((d0 * d0).eval());
            const double both = local_variance(x, ctx, 0);
            tracker.record("local_variance_routes", std::abs(direct - both));
        }
    }

    SuiteResult suite;
    suite.name = "efron-stein";
    tracker.inject(inject);
    suite.properties = tracker.take();
    return suite;
}

SuiteResult run_distances_suite(long pairs, std::uint64_t seed,
                                const std::string& inject) {
    Tracker tracker({"cs_sandwich_lower", "cs_sandwich_upper", "fg_lower", "fg_upper",
                     "infid_le_bures_sq", "bures_sq_le_2_infid", "bures_le_chi2",
                     "chi2_le_upper_variant", "unitary_invariance"});

    for (long rep = 0; rep < pairs; ++rep) {
        const std::uint64_t s = derive_seed(seed, rep);
        Rng rng(s);
        const int d = 2 + static_cast<int>(rng.uniform_index(5));  // 2..6
        DensityMatrix rho = (rep % 4 == 1)
                                ? random_state(d, EnsembleMode::HaarPure, derive_seed(s, 1))
                                : random_state(d, EnsembleMode::GinibreMixed, derive_seed(s, 1));
        DensityMatrix sigma =
            (rep % 5 == 2)
                ? random_state(d, EnsembleMode::HaarPure, derive_seed(s, 2))
                : random_state(d, EnsembleMode::GinibreMixed, derive_seed(s, 2));
        if (rep % 3 == 0) sigma = depolarize(sigma, 0.2);
        // Near-identical pairs stress the tolerance behavior.
        if (rep % 7 == 3)
            rho = DensityMatrix::from_matrix(
                (0.999 * sigma.matrix() +
                 0.001 * random_state(d, EnsembleMode::GinibreMixed, derive_seed(s, 3))
                             .matrix())
                    .eval());

        const QuantumDivergenceReport r = quantum_divergences(rho, sigma);
        const double dtr2 = r.trace_distance * r.trace_distance;
        tracker.record("cs_sandwich_lower", excess(0.25 * r.hs_sq, dtr2));
        tracker.record("cs_sandwich_upper", excess(dtr2, 0.25 * d * r.hs_sq));
        tracker.record("fg_lower",
                       excess(0.5 * r.bures_sq, r.trace_distance + kFidelitySlack));
        tracker.record("fg_upper", excess(dtr2, r.infidelity + kFidelitySlack));
        tracker.record("infid_le_bures_sq", excess(r.infidelity, r.bures_sq));
        tracker.record("bures_sq_le_2_infid", excess(r.bures_sq, 2.0 * r.infidelity));
        if (!std::isinf(r.bures_chi2))
            tracker.record("bures_le_chi2",
                           excess(r.bures_sq, r.bures_chi2 + kFidelitySlack));
        if (sigma.min_eigenvalue() > 1e-12)
            tracker.record("chi2_le_upper_variant",
                           excess(r.bures_chi2, chi2_upper_variant(rho, sigma)));

        if (rep % 50 == 0) {
            Rng urng(derive_seed(s, 4));
            ComplexMatrix g(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) g(i, j) = cxd(urng.gaussian(), urng.gaussian());
            Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
            ComplexMatrix u = q;
            const QuantumDivergenceReport rot = quantum_divergences(
                DensityMatrix::from_matrix((u * rho.matrix() * u.adjoint()).eval()),
                DensityMatrix::from_matrix((u * sigma.matrix() * u.adjoint()).eval()));
            auto rel = [](double a, double b) {
                return std::abs(a - b) / std::max(1.0, std::abs(b));
            };
            double worst = rel(rot.trace_distance, r.trace_distance);
            worst = std::max(worst, rel(rot.hs_sq, r.hs_sq));
            worst = std::max(worst, rel(rot.fidelity, r.fidelity));
            if (!std::isinf(r.bures_chi2) && !std::isinf(rot.bures_chi2))
                worst = std::max(worst, rel(rot.bures_chi2, r.bures_chi2));
            tracker.record("unitary_invariance", worst);
        }
    }

    SuiteResult suite;
    suite.name = "distances";
    tracker.inject(inject);
    suite.properties = tracker.take();
    return suite;
}

SuiteResult run_observable_bounds_suite(long instances, std::uint64_t seed,
                                        const Calibration& calibration,
                                        const std::string& inject) {
    Tracker tracker({"bias_bound", "variance_bound", "concavity_deficit",
                     "misc_inequalities", "threepiece_positivity"});

    for (long rep = 0; rep < instances; ++rep) {
        const std::uint64_t s = derive_seed(seed, rep);
        Rng rng(s);
        const auto tag = static_cast<ObservableTag>(rep % 4);
        const int d = 2 + static_cast<int>(rng.uniform_index(3));
        const int T = 2 + static_cast<int>(rng.uniform_index(7));

        ObservableKind kind = ObservableKind::mm_a();
        ProductEnsemble ens = random_ensemble(d, T, EnsembleMode::GinibreMixed,
                                              derive_seed(s, 1));
        std::optional<ProductEnsemble> second;
        switch (tag) {
            case ObservableTag::MM_A:
                break;
            case ObservableTag::KNOWN_M:
                kind = ObservableKind::known_m(depolarize(
                    random_state(d, EnsembleMode::GinibreMixed, derive_seed(s, 2)), 0.2));
                break;
            case ObservableTag::UNKNOWN_Z:
                kind = ObservableKind::unknown_z();
                second = random_ensemble(d, T, EnsembleMode::GinibreMixed,
                                         derive_seed(s, 3));
                break;
            case ObservableTag::CLASSICAL_M: {
                ProductEnsemble cls = random_ensemble(
                    d, T, EnsembleMode::ClassicalDirichlet, derive_seed(s, 1));
                ens = cls;
                std::vector<double> q(d);
                double sum = 0.0;
                Rng qrng(derive_seed(s, 4));
                for (double& v : q) {
                    v = 0.3 + qrng.exponential();
                    sum += v;
                }
                for (double& v : q) v /= sum;
                kind = ObservableKind::classical_m(ClassicalDistribution::from_probs(q));
                break;
            }
        }

        const MomentReport rep_m = exact_moments(kind, ens, second);
        tracker.record("bias_bound",
                       excess(std::abs(rep_m.bias), rep_m.paper_bias_bound));
        tracker.record("variance_bound",
                       excess(rep_m.var_exact,
                              calibration.variance_constant(tag) * rep_m.var_bound_sum()));

        if (tag == ObservableTag::KNOWN_M) {
            const ConcavityDeficit cd = concavity_deficit_check(ens, *kind.sigma);
            tracker.record("concavity_deficit", excess(cd.lhs, cd.rhs));
            const MiscInequalities mi = misc_inequalities_check(
                average_state(ens), *kind.sigma, derive_seed(s, 5));
            double worst = 0.0;
            for (const auto& [name, sides] : mi.checks)
                worst = std::max(worst, excess(sides.first, sides.second));
            tracker.record("misc_inequalities", worst);
            tracker.record("threepiece_positivity", excess(-mi.min_threepiece, 0.0));
        }
    }

    SuiteResult suite;
    suite.name = "observable-bounds";
    tracker.inject(inject);
    suite.properties = tracker.take();
    return suite;
}

std::vector<std::string> known_injection_keys() {
    return {"reconstruction", "component_mean_zero", "component_locality",
            "partial_sum_identity", "orthogonality", "parseval", "variance_identity",
            "local_variance_identity", "qes_slack", "local_variance_routes",
            "cs_sandwich_lower", "cs_sandwich_upper", "fg_lower", "fg_upper",
            "infid_le_bures_sq", "bures_sq_le_2_infid", "bures_le_chi2",
            "chi2_le_upper_variant", "unitary_invariance", "bias_bound",
            "variance_bound", "concavity_deficit", "misc_inequalities",
            "threepiece_positivity"};
}

} // namespace qcert
