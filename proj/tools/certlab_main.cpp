// certlab: batch experiment driver for the non-iid certification testers.
//
// Subcommands: verify | moments | test | power | divergence.
// Exit codes: 0 ok, 2 malformed config, 3 numerical violation, 4 dimension cap.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcert/fixtures.hpp"
#include "qcert/report_io.hpp"
#include "qcert/rng.hpp"
#include "qcert/verify.hpp"
#include "qcert/version.hpp"

namespace {

using namespace qcert;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitViolation = 3;
constexpr int kExitDimensionCap = 4;

struct Options {
    std::string command;
    std::string kind = "mm_a";
    int dim = 2;
    std::vector<long> T_list;
    double theta = -1.0;
    double epsilon = -1.0;
    long trials = 400;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string states_path;
    std::string states2_path;
    std::string sigma_path;
    std::string out_path;
    std::string calibration_path;
    std::string verify_suite = "all";
    std::string inject;
    long suite_instances = 0;  // 0 = suite default
    double gamma = -1.0;
    double far_mu = -1.0;
};

void write_output(const Options& opt, const std::string& text) {
    if (opt.out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(opt.out_path);
    if (!out) throw std::invalid_argument("cannot open output file: " + opt.out_path);
    out << text << "\n";
}

json config_json(const Options& opt) {
    json j;
    j["command"] = opt.command;
    j["kind"] = opt.kind;
    j["dim"] = opt.dim;
    j["seed"] = opt.seed;
    if (!opt.T_list.empty()) j["T"] = opt.T_list;
    if (opt.theta >= 0.0) j["theta"] = opt.theta;
    if (opt.epsilon >= 0.0) j["epsilon"] = opt.epsilon;
    j["trials"] = opt.trials;
    if (!opt.states_path.empty()) j["states"] = opt.states_path;
    if (!opt.states2_path.empty()) j["states2"] = opt.states2_path;
    if (!opt.sigma_path.empty()) j["sigma"] = opt.sigma_path;
    if (!opt.calibration_path.empty()) j["calibration"] = opt.calibration_path;
    if (opt.gamma > 0.0) j["gamma"] = opt.gamma;
    if (opt.far_mu > 0.0) j["far_mu"] = opt.far_mu;
    return j;
}

Calibration load_calibration(const Options& opt) {
    if (opt.calibration_path.empty()) return Calibration::defaults();
    return Calibration::load(opt.calibration_path);
}

DensityMatrix single_state_from(const std::string& path, const char* what) {
    ProductEnsemble ens = load_ensemble(path);
    if (ens.size() != 1)
        throw std::invalid_argument(std::string(what) +
                                    ": expected a one-state ensemble file");
    return ens.states.front();
}

ClassicalDistribution classical_hypothesis(const Options& opt) {
    if (!opt.sigma_path.empty()) {
        DensityMatrix state = single_state_from(opt.sigma_path, "--sigma");
        std::vector<double> q(state.dim());
        for (int j = 0; j < state.dim(); ++j) q[j] = state.matrix()(j, j).real();
        return ClassicalDistribution::from_probs(q);
    }
    if (opt.gamma > 0.0) return skewed_hypothesis(opt.dim, opt.gamma);
    return ClassicalDistribution::uniform(opt.dim);
}

ObservableKind kind_from(const Options& opt) {
    const ObservableTag tag = observable_tag_from_string(opt.kind);
    switch (tag) {
        case ObservableTag::MM_A: return ObservableKind::mm_a();
        case ObservableTag::UNKNOWN_Z: return ObservableKind::unknown_z();
        case ObservableTag::KNOWN_M: {
            DensityMatrix sigma =
                opt.sigma_path.empty()
                    ? DensityMatrix::maximally_mixed(opt.dim)
                    : single_state_from(opt.sigma_path, "--sigma");
            return ObservableKind::known_m(std::move(sigma));
        }
        case ObservableTag::CLASSICAL_M:
            return ObservableKind::classical_m(classical_hypothesis(opt));
    }
    throw std::invalid_argument("unknown kind");
}

double resolve_theta(const Options& opt, ObservableTag tag) {
    if (opt.theta >= 0.0 && opt.epsilon >= 0.0)
        throw std::invalid_argument("--theta and --epsilon are mutually exclusive");
    if (opt.theta >= 0.0) return opt.theta;
    if (opt.epsilon >= 0.0) return epsilon_to_theta(tag, opt.epsilon, opt.dim);
    throw std::invalid_argument("one of --theta or --epsilon is required");
}

int cmd_verify(const Options& opt) {
    const Calibration cal = load_calibration(opt);
    std::vector<SuiteResult> suites;
    const long n = opt.suite_instances;
    if (opt.verify_suite == "efron-stein" || opt.verify_suite == "all")
        suites.push_back(run_efron_stein_suite(n > 0 ? n : 120,
                                               derive_seed(opt.seed, 1), opt.inject));
    if (opt.verify_suite == "distances" || opt.verify_suite == "all")
        suites.push_back(run_distances_suite(n > 0 ? n : 2000,
                                             derive_seed(opt.seed, 2), opt.inject));
    if (opt.verify_suite == "observables" || opt.verify_suite == "all")
        suites.push_back(run_observable_bounds_suite(n > 0 ? n : 200,
                                                     derive_seed(opt.seed, 3), cal,
                                                     opt.inject));
    if (suites.empty())
        throw std::invalid_argument("unknown verify suite: " + opt.verify_suite);

    bool all_pass = true;
    std::printf("%-20s %-26s %8s %14s  %s\n", "suite", "property", "checks",
                "max_violation", "status");
    for (const auto& suite : suites) {
        for (const auto& prop : suite.properties) {
            const bool ok = prop.max_violation <= 1e-9;
            all_pass = all_pass && ok;
            std::printf("%-20s %-26s %8ld %14.3e  %s\n", suite.name.c_str(),
                        prop.name.c_str(), prop.checks, prop.max_violation,
                        ok ? "pass" : "FAIL");
        }
    }
    std::printf("%s\n",
                all_pass ? "verify: all invariants hold" : "verify: VIOLATIONS FOUND");
    return all_pass ? kExitOk : kExitViolation;
}

int cmd_moments(const Options& opt) {
    const ObservableKind kind = kind_from(opt);
    const ObservableTag tag = kind.tag;

    auto instance_at = [&](long T) {
        if (!opt.states_path.empty()) {
            ProductEnsemble ens = load_ensemble(opt.states_path);
            std::optional<ProductEnsemble> second;
            if (tag == ObservableTag::UNKNOWN_Z) {
                if (opt.states2_path.empty())
                    throw std::invalid_argument("unknown_z needs --states2");
                second = load_ensemble(opt.states2_path);
            }
            return TestInstance{std::move(ens), std::move(second)};
        }
        const EnsembleMode mode = tag == ObservableTag::CLASSICAL_M
                                      ? EnsembleMode::ClassicalDirichlet
                                      : EnsembleMode::GinibreMixed;
        TestInstance inst = TestInstance::of(random_ensemble(
            opt.dim, static_cast<int>(T), mode, derive_seed(opt.seed, 1)));
        if (tag == ObservableTag::UNKNOWN_Z)
            inst.second = random_ensemble(opt.dim, static_cast<int>(T), mode,
                                          derive_seed(opt.seed, 2));
        return inst;
    };

    if (opt.T_list.size() <= 1) {
        const long T = opt.T_list.empty() ? 4 : opt.T_list.front();
        TestInstance inst = instance_at(T);
        MomentReport rep = exact_moments(kind, inst.primary, inst.second);
        write_output(opt, wrap_report(config_json(opt), to_json(rep)).dump(2));
        return kExitOk;
    }

    // T sweep as CSV.
    std::ostringstream csv;
    csv << "kind,d,T,mu,mean_exact,var_exact,bias,paper_bias_bound,var_bound_sum\n";
    for (long T : opt.T_list) {
        TestInstance inst = instance_at(T);
        MomentReport rep = exact_moments(kind, inst.primary, inst.second);
        csv << to_string(tag) << "," << opt.dim << "," << T << ","
            << format_double(rep.mu) << "," << format_double(rep.mean_exact) << ","
            << format_double(rep.var_exact) << "," << format_double(rep.bias) << ","
            << format_double(rep.paper_bias_bound) << ","
            << format_double(rep.var_bound_sum()) << "\n";
    }
    write_output(opt, csv.str());
    return kExitOk;
}

int cmd_test(const Options& opt) {
    const ObservableKind kind = kind_from(opt);
    const double theta = resolve_theta(opt, kind.tag);
    if (opt.states_path.empty())
        throw std::invalid_argument("test requires --states");
    ProductEnsemble ens = load_ensemble(opt.states_path);
    std::optional<ProductEnsemble> second;
    if (kind.tag == ObservableTag::UNKNOWN_Z) {
        if (opt.states2_path.empty())
            throw std::invalid_argument("unknown_z needs --states2");
        second = load_ensemble(opt.states2_path);
    }
    TestInstance inst{std::move(ens), std::move(second)};
    ChebyshevRule rule{theta, 0.005, 10.0};
    TestDecision decision = run_trial(kind, inst, rule, opt.seed);
    write_output(opt, wrap_report(config_json(opt), to_json(decision)).dump(2));
    return kExitOk;
}

int cmd_power(const Options& opt) {
    if (!opt.seed_set)
        throw std::invalid_argument("power requires an explicit --seed");
    const ObservableKind kind = kind_from(opt);
    const double theta = resolve_theta(opt, kind.tag);
    const double far_mu = opt.far_mu > 0.0 ? opt.far_mu : 2.0 * theta;
    ChebyshevRule rule{theta, 0.005, 10.0};

    std::vector<long> ts = opt.T_list;
    if (ts.empty()) {
        const Calibration cal = load_calibration(opt);
        ts.push_back(required_T(kind, theta, opt.dim, kind.gamma(), cal));
    }
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (ts[i] <= ts[i - 1])
            throw std::invalid_argument("power: T sweep must be strictly increasing");

    std::ostringstream csv;
    csv << power_csv_header() << "\n";
    for (long T : ts) {
        TestInstance null_inst = null_instance(
            kind, opt.dim, static_cast<int>(T), derive_seed(opt.seed, 10 + T), true);
        TestInstance far_inst = far_instance(
            kind, opt.dim, static_cast<int>(T), far_mu, derive_seed(opt.seed, 20 + T),
            true);
        auto [null_rep, far_rep] = estimate_success(
            kind, null_inst, far_inst, rule, opt.trials, derive_seed(opt.seed, T));
        csv << power_csv_row(kind.tag, opt.dim, T, theta, opt.trials, opt.seed,
                             null_rep, far_rep, native_divergence(kind, far_inst))
            << "\n";
    }
    write_output(opt, csv.str());
    return kExitOk;
}

int cmd_divergence(const Options& opt) {
    if (opt.states_path.empty() || opt.sigma_path.empty())
        throw std::invalid_argument("divergence requires --states and --sigma");
    DensityMatrix rho = single_state_from(opt.states_path, "--states");
    DensityMatrix sigma = single_state_from(opt.sigma_path, "--sigma");
    json payload;
    payload["quantum"] = to_json(quantum_divergences(rho, sigma));

    // When both states are diagonal, also report the classical divergences of
    // their diagonals.
    auto diagonal_of =
        [](const DensityMatrix& s) -> std::optional<ClassicalDistribution> {
        for (int i = 0; i < s.dim(); ++i)
            for (int j = 0; j < s.dim(); ++j)
                if (i != j && std::abs(s.matrix()(i, j)) > 1e-12) return std::nullopt;
        std::vector<double> p(s.dim());
        for (int i = 0; i < s.dim(); ++i) p[i] = s.matrix()(i, i).real();
        return ClassicalDistribution::from_probs(p);
    };
    auto p = diagonal_of(rho);
    auto q = diagonal_of(sigma);
    if (p && q) payload["classical"] = to_json(classical_divergences(*p, *q));

    write_output(opt, wrap_report(config_json(opt), payload).dump(2));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-iid hypothesis-testing laboratory"};
    app.set_version_flag("--version", qcert::kVersion);
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--kind", opt.kind,
                        "tester kind: mm_a | known_m | unknown_z | classical_m");
        cmd->add_option("--dim", opt.dim, "local dimension d");
        cmd->add_option("--T", opt.T_list, "number of sources (list = sweep)")
            ->delimiter(',');
        cmd->add_option("--theta", opt.theta, "robust threshold");
        cmd->add_option("--epsilon", opt.epsilon, "trace-distance epsilon");
        cmd->add_option("--trials", opt.trials, "Monte Carlo trials");
        cmd->add_option("--seed", opt.seed, "master seed")
            ->each([&](const std::string&) { opt.seed_set = true; });
        cmd->add_option("--states", opt.states_path, "ensemble JSON file");
        cmd->add_option("--states2", opt.states2_path, "second ensemble (unknown_z)");
        cmd->add_option("--sigma", opt.sigma_path,
                        "hypothesis (one-state ensemble file)");
        cmd->add_option("--out", opt.out_path, "output file (default stdout)");
        cmd->add_option("--calibration", opt.calibration_path, "calibration JSON");
        cmd->add_option("--gamma", opt.gamma, "classical hypothesis min-probability");
        cmd->add_option("--far-mu", opt.far_mu, "far-instance native divergence");
    };

    CLI::App* verify =
        app.add_subcommand("verify", "run the randomized invariant suites");
    verify->add_option("suite", opt.verify_suite,
                       "efron-stein | distances | observables | all");
    verify->add_option("--instances", opt.suite_instances, "suite size override");
    verify->add_option("--inject-violation", opt.inject,
                       "perturb one named invariant (mutation smoke test)");
    add_common(verify);

    add_common(app.add_subcommand("moments", "exact moment report (JSON or CSV sweep)"));
    add_common(app.add_subcommand("test", "single accept/reject trial"));
    add_common(app.add_subcommand("power", "Monte Carlo power sweep (CSV)"));
    add_common(app.add_subcommand("divergence", "divergence report for two states"));

    try {
        app.parse(argc, argv);
        opt.command = app.get_subcommands().front()->get_name();
        if (opt.command == "verify") return cmd_verify(opt);
        if (opt.command == "moments") return cmd_moments(opt);
        if (opt.command == "test") return cmd_test(opt);
        if (opt.command == "power") return cmd_power(opt);
        if (opt.command == "divergence") return cmd_divergence(opt);
        std::cerr << "unknown subcommand\n";
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help / --version
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const qcert::DimensionCapError& e) {
        std::cerr << "dimension cap: " << e.what() << "\n";
        return kExitDimensionCap;
    } catch (const qcert::NumericalViolation& e) {
        std::cerr << "numerical violation: " << e.what() << "\n";
        return kExitViolation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
