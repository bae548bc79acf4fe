#include "qcert/report_io.hpp"

#include <cmath>
#include <cstdio>

#include "qcert/version.hpp"

namespace qcert {

namespace {

// JSON has no infinity literal; divergences that are +inf serialize as the
// string "inf".
nlohmann::json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json to_json(const QuantumDivergenceReport& rep) {
    return {{"trace_distance", rep.trace_distance},
            {"hs_sq", rep.hs_sq},
            {"fidelity", rep.fidelity},
            {"infidelity", rep.infidelity},
            {"bures_sq", rep.bures_sq},
            {"bures_chi2", json_number(rep.bures_chi2)}};
}

nlohmann::json to_json(const ClassicalDivergenceReport& rep) {
    return {{"tv", rep.tv},
            {"chi2", json_number(rep.chi2)},
            {"hellinger_sq", rep.hellinger_sq}};
}

nlohmann::json to_json(const MomentReport& rep) {
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [name, value] : rep.paper_var_bound_terms) terms[name] = value;
    return {{"kind", to_string(rep.tag)},
            {"d", rep.d},
            {"T", rep.T},
            {"gamma", rep.gamma},
            {"mu", rep.mu},
            {"mean_exact", rep.mean_exact},
            {"var_exact", rep.var_exact},
            {"bias", rep.bias},
            {"paper_bias_bound", rep.paper_bias_bound},
            {"paper_var_bound_terms", terms}};
}

nlohmann::json to_json(const TestDecision& decision) {
    return {{"statistic", decision.statistic},
            {"threshold", decision.threshold},
            {"verdict", decision.verdict == Verdict::FAR ? "FAR" : "CLOSE"},
            {"kind", to_string(decision.kind)},
            {"T_used", decision.T_used}};
}

nlohmann::json to_json(const PowerReport& rep) {
    nlohmann::json j = {{"trials", rep.trials},
                        {"far_rate", rep.far_rate},
                        {"wilson_low", rep.wilson_low},
                        {"wilson_high", rep.wilson_high}};
    if (!rep.config_echo.empty()) j["config"] = nlohmann::json::parse(rep.config_echo);
    return j;
}

nlohmann::json wrap_report(const nlohmann::json& config, const nlohmann::json& payload) {
    return {{"version", kVersion}, {"config", config}, {"report", payload}};
}

void validate_report_json(const nlohmann::json& report) {
    auto need = [&](const nlohmann::json& obj, const char* key, const char* where) {
        if (!obj.contains(key))
            throw std::invalid_argument(std::string("report: missing field '") + key +
                                        "' in " + where);
    };
    need(report, "version", "top level");
    need(report, "config", "top level");
    need(report, "report", "top level");
    if (!report["version"].is_string())
        throw std::invalid_argument("report: 'version' must be a string");
    if (!report["config"].is_object())
        throw std::invalid_argument("report: 'config' must be an object");
    need(report["config"], "command", "config");
    need(report["config"], "seed", "config");
}

std::string power_csv_header() {
    return "kind,d,T,theta,trials,seed,null_rate,null_low,null_high,"
           "far_rate,far_low,far_high,far_mu";
}

std::string power_csv_row(ObservableTag tag, int d, long T, double theta, long trials,
                          std::uint64_t seed, const PowerReport& null_rep,
                          const PowerReport& far_rep, double far_mu) {
    std::string row = to_string(tag);
    row += "," + std::to_string(d);
    row += "," + std::to_string(T);
    row += "," + format_double(theta);
    row += "," + std::to_string(trials);
    row += "," + std::to_string(seed);
    row += "," + format_double(null_rep.far_rate);
    row += "," + format_double(null_rep.wilson_low);
    row += "," + format_double(null_rep.wilson_high);
    row += "," + format_double(far_rep.far_rate);
    row += "," + format_double(far_rep.wilson_low);
    row += "," + format_double(far_rep.wilson_high);
    row += "," + format_double(far_mu);
    return row;
}

} // namespace qcert
