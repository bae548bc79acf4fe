#pragma once

#include <memory>
#include <optional>
#include <string>

#include "qcert/testers.hpp"

namespace qcert {

// Support of a projective measurement: outcome values in ascending order with
// their probabilities.  Degenerate eigenvalues are merged before sampling.
struct OutcomeDistribution {
    std::vector<double> values;
    std::vector<double> probs;

    double sample(std::uint64_t seed) const;
    double mean() const;
    double variance() const;
    // P[outcome >= x].
    double tail_mass(double x) const;
};

// A tester instance: the sources the algorithm receives one copy each of.
// UNKNOWN_Z carries a second ensemble (the sigma sources).
struct TestInstance {
    ProductEnsemble primary;
    std::optional<ProductEnsemble> second;

    static TestInstance of(ProductEnsemble ens) { return {std::move(ens), std::nullopt}; }
    static TestInstance of(ProductEnsemble ens, ProductEnsemble second) {
        return {std::move(ens), std::move(second)};
    }
};

// One projective measurement of a testing observable on a product state, with
// the spectral data and outcome probabilities cached so repeated trials are
// cheap.  For the maximally-mixed tester on qubits the outcome distribution is
// obtained from the exact spin-sector law instead of a dense eigendecomposition,
// which keeps T = 16 (dense dimension 2^16) tractable.
class MeasurementModel {
public:
    // Generic route: explicit observable measured on the product of `slots`.
    static MeasurementModel dense(const ComplexMatrix& observable,
                                  const std::vector<DensityMatrix>& slots);
    // Tester route: builds the kind's observable over the instance.
    static MeasurementModel for_kind(const ObservableKind& kind,
                                     const TestInstance& instance);

    const OutcomeDistribution& distribution() const { return dist_; }
    double measure(std::uint64_t seed) const { return dist_.sample(seed); }

private:
    OutcomeDistribution dist_;
};

double measure_observable(const MeasurementModel& model, std::uint64_t seed);

// Runs single trials of a tester with all per-instance setup done once.
// Quantum kinds measure the cached observable; the classical kind draws two
// samples per source and evaluates the collision statistic.
class TrialRunner {
public:
    TrialRunner(ObservableKind kind, TestInstance instance, ChebyshevRule rule);
    TestDecision run(std::uint64_t seed) const;

    const ObservableKind& kind() const { return kind_; }
    const TestInstance& instance() const { return instance_; }

private:
    ObservableKind kind_;
    TestInstance instance_;
    ChebyshevRule rule_;
    std::shared_ptr<MeasurementModel> model_;            // quantum kinds
    std::vector<std::vector<double>> source_cdfs_;       // classical kind
};

// One-shot convenience: builds the runner and performs a single trial.
TestDecision run_trial(const ObservableKind& kind, const TestInstance& instance,
                       const ChebyshevRule& rule, std::uint64_t seed);

struct PowerReport {
    long trials = 0;
    double far_rate = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    std::string config_echo;  // filled by the CLI layer
};

// 95% Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(long k, long n);

// Monte Carlo FAR rates on a null and a far instance.  Trial i uses seed
// derive_seed(master_seed, i); reports are bit-identical for equal master
// seeds regardless of how trials are scheduled.
std::pair<PowerReport, PowerReport> estimate_success(
    const ObservableKind& kind, const TestInstance& null_instance,
    const TestInstance& far_instance, const ChebyshevRule& rule, long trials,
    std::uint64_t master_seed);

// FAR rate on a single instance.
PowerReport estimate_far_rate(const TrialRunner& runner, long trials,
                              std::uint64_t master_seed);

} // namespace qcert
