#include "qcert/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcert/rng.hpp"
#include "qcert/schur_sampler.hpp"

namespace qcert {

namespace {

constexpr double kProbDriftTol = 1e-6;

OutcomeDistribution group_spectrum(const RealVector& eigenvalues,
                                   const std::vector<double>& probs) {
    const Eigen::Index n = eigenvalues.size();
    std::vector<int> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return eigenvalues[a] < eigenvalues[b]; });

    const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
    const double gap_tol = 1e-9 * scale;

    OutcomeDistribution dist;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam = eigenvalues[order[i]];
        const double p = probs[order[i]];
        if (!dist.values.empty() && lam - dist.values.back() <= gap_tol) {
            dist.probs.back() += p;
        } else {
            dist.values.push_back(lam);
            dist.probs.push_back(p);
        }
    }
    return dist;
}

void validate_probabilities(OutcomeDistribution& dist) {
    double total = 0.0;
    for (double& p : dist.probs) {
        if (p < -1e-9)
            throw NumericalViolation("measurement: negative outcome probability");
        p = std::max(0.0, p);
        total += p;
    }
    if (std::abs(total - 1.0) > kProbDriftTol)
        throw NumericalViolation("measurement: outcome probabilities drift from 1");
    for (double& p : dist.probs) p /= total;
}

std::vector<std::vector<double>> classical_cdfs(const ProductEnsemble& ens) {
    std::vector<std::vector<double>> cdfs;
    cdfs.reserve(ens.size());
    for (const auto& state : ens.states) {
        std::vector<double> cdf(ens.dim);
        double acc = 0.0;
        for (int j = 0; j < ens.dim; ++j) {
            acc += state.matrix()(j, j).real();
            cdf[j] = acc;
        }
        cdf[ens.dim - 1] = 1.0;
        cdfs.push_back(std::move(cdf));
    }
    return cdfs;
}

int draw_from_cdf(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) return static_cast<int>(cdf.size()) - 1;
    return static_cast<int>(it - cdf.begin());
}

} // namespace

double OutcomeDistribution::sample(std::uint64_t seed) const {
    Rng rng(seed);
    return values[sample_discrete(probs, rng.uniform())];
}

double OutcomeDistribution::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * probs[i];
    return acc;
}

double OutcomeDistribution::variance() const {
    const double m = mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        acc += (values[i] - m) * (values[i] - m) * probs[i];
    return acc;
}

double OutcomeDistribution::tail_mass(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] >= x) acc += probs[i];
    return acc;
}

MeasurementModel MeasurementModel::dense(const ComplexMatrix& observable,
                                         const std::vector<DensityMatrix>& slots) {
    if (slots.empty()) throw std::invalid_argument("MeasurementModel: no slots");
    std::vector<int> dims;
    dims.reserve(slots.size());
    for (const auto& s : slots) dims.push_back(s.dim());
    const TensorSpace space = TensorSpace::of(dims);
    if (space.total_dim > kDenseDimensionCap)
        throw DimensionCapError("MeasurementModel: dense dimension exceeds 2^16");
    if (observable.rows() != space.total_dim || observable.cols() != space.total_dim)
        throw std::invalid_argument("MeasurementModel: observable does not fit the slots");

    EigH eig = eig_hermitian(observable, 1e-10);
    // <v_k| varrho |v_k> without materializing varrho: contract the vector
    // against each factor in turn.
    std::vector<double> probs(space.total_dim);
    Eigen::VectorXcd w(space.total_dim);
    for (long k = 0; k < space.total_dim; ++k) {
        w = eig.eigenvectors.col(k);
        for (int t = 0; t < space.factors(); ++t)
            apply_factor_to_vector(slots[t].matrix(), space, t, w);
        probs[k] = eig.eigenvectors.col(k).dot(w).real();
    }

    MeasurementModel model;
    model.dist_ = group_spectrum(eig.eigenvalues, probs);
    validate_probabilities(model.dist_);
    return model;
}

MeasurementModel MeasurementModel::for_kind(const ObservableKind& kind,
                                            const TestInstance& instance) {
    const ProductEnsemble& ens = instance.primary;
    const int d = ens.dim;
    const int T = ens.size();

    if (kind.tag == ObservableTag::CLASSICAL_M)
        throw std::invalid_argument(
            "MeasurementModel: the classical statistic is sampled, not measured");

    if (kind.tag == ObservableTag::MM_A && d == 2) {
        // Spin-sector route: same outcome law as the dense eigenbasis
        // measurement, but polynomial in T.
        SpinSectorDistribution spin = spin_sector_distribution(ens.states);
        MeasurementModel model;
        for (std::size_t i = 0; i < spin.two_j.size(); ++i) {
            model.dist_.values.push_back(collision_observable_value(T, spin.two_j[i]));
            model.dist_.probs.push_back(spin.probs[i]);
        }
        validate_probabilities(model.dist_);
        return model;
    }

    std::vector<DensityMatrix> slots = ens.states;
    if (kind.tag == ObservableTag::UNKNOWN_Z) {
        if (!instance.second)
            throw std::invalid_argument("MeasurementModel: UNKNOWN_Z needs a second ensemble");
        if (instance.second->dim != d || instance.second->size() != T)
            throw std::invalid_argument("MeasurementModel: ensembles must match in d and T");
        slots.insert(slots.end(), instance.second->states.begin(),
                     instance.second->states.end());
    }
    return dense(build_observable(kind, d, T), slots);
}

double measure_observable(const MeasurementModel& model, std::uint64_t seed) {
    return model.measure(seed);
}

TrialRunner::TrialRunner(ObservableKind kind, TestInstance instance, ChebyshevRule rule)
    : kind_(std::move(kind)), instance_(std::move(instance)), rule_(rule) {
    if (kind_.tag == ObservableTag::CLASSICAL_M) {
        if (!kind_.q || kind_.q->dim() != instance_.primary.dim)
            throw std::invalid_argument("TrialRunner: classical hypothesis missing or wrong dim");
        source_cdfs_ = classical_cdfs(instance_.primary);
    } else {
        model_ = std::make_shared<MeasurementModel>(
            MeasurementModel::for_kind(kind_, instance_));
    }
}

TestDecision TrialRunner::run(std::uint64_t seed) const {
    double statistic = 0.0;
    if (kind_.tag == ObservableTag::CLASSICAL_M) {
        Rng rng(seed);
        ClassicalSampleBatch batch;
        batch.T = instance_.primary.size();
        batch.pairs.reserve(batch.T);
        for (int t = 0; t < batch.T; ++t) {
            const int j1 = draw_from_cdf(source_cdfs_[t], rng.uniform());
            const int j2 = draw_from_cdf(source_cdfs_[t], rng.uniform());
            batch.pairs.emplace_back(j1, j2);
        }
        statistic = classical_statistic(batch, *kind_.q);
    } else {
        statistic = model_->measure(seed);
    }
    TestDecision decision = decide(statistic, rule_);
    decision.kind = kind_.tag;
    decision.T_used = instance_.primary.size();
    return decision;
}

TestDecision run_trial(const ObservableKind& kind, const TestInstance& instance,
                       const ChebyshevRule& rule, std::uint64_t seed) {
    return TrialRunner(kind, instance, rule).run(seed);
}

std::pair<double, double> wilson_interval(long k, long n) {
    if (n <= 0) throw std::invalid_argument("wilson_interval: n must be >= 1");
    const double z = 1.959963984540054;
    const double z2 = z * z;
    const double phat = static_cast<double>(k) / n;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    double low = std::max(0.0, center - half);
    double high = std::min(1.0, center + half);
    if (k == 0) low = 0.0;
    if (k == n) high = 1.0;
    return {low, high};
}

PowerReport estimate_far_rate(const TrialRunner& runner, long trials,
                              std::uint64_t master_seed) {
    if (trials < 1) throw std::invalid_argument("estimate_far_rate: trials >= 1 required");
    long far = 0;
    for (long i = 0; i < trials; ++i)
        if (runner.run(derive_seed(master_seed, static_cast<std::uint64_t>(i))).verdict ==
            Verdict::FAR)
            ++far;
    PowerReport rep;
    rep.trials = trials;
    rep.far_rate = static_cast<double>(far) / trials;
    std::tie(rep.wilson_low, rep.wilson_high) = wilson_interval(far, trials);
    return rep;
}

std::pair<PowerReport, PowerReport> estimate_success(
    const ObservableKind& kind, const TestInstance& null_instance,
    const TestInstance& far_instance, const ChebyshevRule& rule, long trials,
    std::uint64_t master_seed) {
    const TrialRunner null_runner(kind, null_instance, rule);
    const TrialRunner far_runner(kind, far_instance, rule);
    // Disjoint seed streams for the two instances.
    return {estimate_far_rate(null_runner, trials, derive_seed(master_seed, 0x6e756c6c)),
            estimate_far_rate(far_runner, trials, derive_seed(master_seed, 0x66617221))};
}

} // namespace qcert
