// Command-line front end: calibrate, construct, analyze, plan, simulate.
//
// Exit codes: 0 success, 2 input error, 3 domain or infeasibility error,
// 4 protocol violation (power differs from the pre-registered value).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spotcheck/analytic.hpp"
#include "spotcheck/baselines.hpp"
#include "spotcheck/calibration.hpp"
#include "spotcheck/chsh_sim.hpp"
#include "spotcheck/io.hpp"
#include "spotcheck/optimizer.hpp"
#include "spotcheck/variants.hpp"

namespace {

using nlohmann::json;
using namespace spotcheck;

constexpr const char* kSpecVersion = "1.0";
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;
constexpr int kExitProtocol = 4;
constexpr double kBetaMatchTol = 1e-12;

struct ProtocolViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json num(double v) {
    if (std::isfinite(v)) return v;
    return io::format_double(v);
}

template <class T>
json opt_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_floating_point_v<T>)
        return num(*v);
    else
        return *v;
}

void emit(const json& j, const std::string& out) {
    const std::string s = j.dump(2) + "\n";
    if (out.empty())
        std::cout << s;
    else
        io::atomic_write(out, s);
}

json header(const std::string& command) { return json{{"spec_version", kSpecVersion}, {"command", command}}; }

std::uint64_t default_seed() {
    const char* env = std::getenv("SPOTCHECK_SEED");
    if (!env || !*env) return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw Error(ErrorKind::InvalidInput, "SPOTCHECK_SEED must be a nonnegative integer");
    return v;
}

// Values from a flat key = value file fill options not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : io::read_config(path)) {
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw Error(ErrorKind::InvalidInput, "unknown config key '" + key + "' in " + path);
        }
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

ExtremalEF ef_from_json(const json& j) {
    for (const char* k : {"beta", "t", "omega"})
        if (!j.contains(k) || !j[k].is_number()) throw Error(ErrorKind::InvalidInput, std::string("EF file lacks ") + k);
    ExtremalEF ef;
    ef.beta = j["beta"].get<double>();
    ef.t = j["t"].get<double>();
    ef.omega = j["omega"].get<double>();
    ef.b = j.value("b", 0.0);
    ef.validate();
    return ef;
}

json ef_to_json(const ExtremalEF& ef) {
    return json{{"beta", num(ef.beta)},
                {"t", num(ef.t)},
                {"t_shifted", num(ef.shifted_t())},
                {"omega", num(ef.omega)},
                {"b", num(ef.b)}};
}

json report_to_json(const ConfidenceReport& r) {
    return json{{"s_lb", num(r.s_lb)},           {"c_n", r.c_n},     {"average_lb", num(r.average_lb)},
                {"log_ef_sum", num(r.log_ef_sum)}, {"beta", num(r.beta)}, {"epsilon", num(r.epsilon)},
                {"zero_factor", r.zero_factor}};
}

json parse_json_file(const std::string& path) {
    const std::string text = io::read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path + ": malformed JSON");
    }
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    std::string config, input, estimator = "pooled", output;
    std::size_t n_a = 0, n_v = 0;
};

void setup_calibrate(CLI::App& app, CalibrateArgs& a) {
    auto* sub = app.add_subcommand("calibrate", "Estimate mean and variance from calibration samples");
    sub->add_option("--config", a.config, "Flat key = value file");
    sub->add_option("--input", a.input, "Samples (one value per line) or records file");
    sub->add_option("--estimator", a.estimator, "pooled or split")->check(CLI::IsMember({"pooled", "split"}));
    sub->add_option("--n-a", a.n_a, "Split estimator: samples for the mean");
    sub->add_option("--n-v", a.n_v, "Split estimator: samples for the variance");
    sub->add_option("--output", a.output, "Output JSON path (default stdout)");
}

void run_calibrate(CLI::App* sub, CalibrateArgs& a) {
    apply_config(sub, a.config);
    if (a.input.empty()) throw Error(ErrorKind::InvalidInput, "--input is required");
    const auto samples = io::read_samples(a.input);
    if (samples.size() < 2) throw Error(ErrorKind::InvalidInput, a.input + ": need at least 2 samples");
    const CalibrationResult r =
        a.estimator == "split" ? estimate_split(samples, a.n_a, a.n_v) : estimate_pooled(samples);
    json j = header("calibrate");
    j["params"] = {{"input", a.input}, {"estimator", a.estimator}, {"n_a", a.n_a}, {"n_v", a.n_v}};
    j["theta_e"] = num(r.theta_e);
    j["sigma2_e"] = num(r.sigma2_e);
    j["n_used"] = r.n_used;
    j["estimator"] = a.estimator;
    j["n_a"] = r.n_a;
    j["n_v"] = r.n_v;
    emit(j, a.output);
}

// ---------------------------------------------------------------- construct

struct ConstructArgs {
    std::string config, method, dist, calibration, output;
    std::optional<double> theta_e, sigma2_e, u, delta_th, n;
    double omega = 0.1, epsilon = 0.01, b = 0.0;
    bool fallback = true;
};

void setup_construct(CLI::App& app, ConstructArgs& a) {
    auto* sub = app.add_subcommand("construct", "Build an estimation factor");
    sub->add_option("--config", a.config, "Flat key = value file");
    sub->add_option("--method", a.method, "numerical, moments, fixed or gap")
        ->check(CLI::IsMember({"numerical", "moments", "fixed", "gap"}));
    sub->add_option("--dist", a.dist, "Reference distribution CSV (value,probability)");
    sub->add_option("--calibration", a.calibration, "JSON written by calibrate");
    sub->add_option("--theta-e", a.theta_e, "Estimated mean (raw units)");
    sub->add_option("--sigma2-e", a.sigma2_e, "Estimated variance");
    sub->add_option("--u", a.u, "Width of the range [b, b + u]");
    sub->add_option("--delta-th", a.delta_th, "Gap threshold per unchecked trial");
    sub->add_option("--n", a.n, "Planned number of trials");
    sub->add_option("--omega", a.omega, "Spot-check probability");
    sub->add_option("--epsilon", a.epsilon, "Error bound");
    sub->add_option("--b", a.b, "Lower bound on X");
    sub->add_flag("--fallback,!--no-fallback", a.fallback,
                  "Below the moment threshold use the tightness construction (default) or fail");
    sub->add_option("--output", a.output, "Output JSON path (default stdout)");
}

void run_construct(CLI::App* sub, ConstructArgs& a) {
    apply_config(sub, a.config);
    if (a.method.empty()) throw Error(ErrorKind::InvalidInput, "--method is required");
    SpotModel{a.omega, a.b, a.epsilon, 1}.validate();
    auto need_n = [&] {
        if (!a.n || !(*a.n >= 1.0)) throw Error(ErrorKind::InvalidInput, "--n is required and must be >= 1");
        return *a.n;
    };
    if (!a.calibration.empty()) {
        const json c = parse_json_file(a.calibration);
        if (!a.theta_e && c.contains("theta_e")) a.theta_e = c["theta_e"].get<double>();
        if (!a.sigma2_e && c.contains("sigma2_e")) a.sigma2_e = c["sigma2_e"].get<double>();
    }
    auto need_moments = [&] {
        if (!a.theta_e || !a.sigma2_e)
            throw Error(ErrorKind::InvalidInput, "need --theta-e and --sigma2-e (or --calibration)");
    };

    std::optional<ReferenceDistribution> dist;
    if (!a.dist.empty()) {
        dist = io::read_distribution(a.dist);
        if (dist->min() < a.b) throw Error(ErrorKind::InvalidInput, "distribution support lies below b");
    }

    std::string used = a.method;
    ExtremalEF shifted;
    if (a.method == "numerical") {
        if (!dist) throw Error(ErrorKind::InvalidInput, "--dist is required for the numerical method");
        ObjectiveContext ctx{dist->shifted(a.b), a.omega, a.epsilon, need_n()};
        const OptResult r = optimize_ef(ctx, true);
        shifted = ExtremalEF{r.beta, r.t, a.omega, 0.0};
    } else if (a.method == "moments") {
        need_moments();
        MomentSpec ms;
        ms.theta_e = *a.theta_e - a.b;
        ms.sigma2_e = *a.sigma2_e;
        try {
            shifted = moment_ef(ms, a.omega, a.epsilon, need_n());
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BelowThreshold || !a.fallback) throw;
            shifted = tightness_ef(ms.theta_e, ms.sigma2_e, a.omega, a.epsilon, need_n());
            used = "tightness";
            std::cerr << "note: " << e.what() << "; using the tightness construction\n";
        }
    } else if (a.method == "fixed") {
        if (!a.u) throw Error(ErrorKind::InvalidInput, "--u is required for the fixed method");
        shifted = tightness_ef_bounded(*a.u, a.omega, a.epsilon, need_n());
    } else {
        need_moments();
        if (!a.delta_th) throw Error(ErrorKind::InvalidInput, "--delta-th is required for the gap method");
        shifted = gap_ef(*a.theta_e - a.b, *a.sigma2_e, a.omega, *a.delta_th);
    }
    const ExtremalEF ef = ExtremalEF::from_shifted(shifted.beta, shifted.t, a.omega, a.b);

    json j = header("construct");
    j["params"] = {{"method", a.method}, {"dist", a.dist},           {"calibration", a.calibration},
                   {"theta_e", opt_json(a.theta_e)}, {"sigma2_e", opt_json(a.sigma2_e)}, {"u", opt_json(a.u)},
                   {"delta_th", opt_json(a.delta_th)}, {"n", opt_json(a.n)}, {"omega", num(a.omega)},
                   {"epsilon", num(a.epsilon)}, {"b", num(a.b)}, {"fallback", a.fallback}};
    j["method"] = a.method;
    j["method_used"] = used;
    j.update(ef_to_json(ef));
    j["epsilon"] = num(a.epsilon);
    if (a.n) j["n"] = num(*a.n);
    if (dist && a.n) {
        ObjectiveContext ctx{dist->shifted(a.b), a.omega, a.epsilon, *a.n};
        j["objective"] = num(objective(ctx, shifted.beta, shifted.t));
    }
    emit(j, a.output);
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string config, records, ef, method = "ef", output;
    std::optional<double> epsilon, expect_beta, x_lb, x_ub, omega;
    double theta_max = 1.0;
    bool chsh = false;
};

void setup_analyze(CLI::App& app, AnalyzeArgs& a) {
    auto* sub = app.add_subcommand("analyze", "Compute the confidence bound for recorded trials");
    sub->add_option("--config", a.config, "Flat key = value file");
    sub->add_option("--records", a.records, "Trial records (.jsonl or .csv)");
    sub->add_option("--ef", a.ef, "EF JSON from construct, or a JSON list of blocks with a 'from' index");
    sub->add_option("--epsilon", a.epsilon, "Error bound (defaults to the EF file's)");
    sub->add_option("--method", a.method, "ef, gocanin or serfling")
        ->check(CLI::IsMember({"ef", "gocanin", "serfling"}));
    sub->add_option("--expect-beta", a.expect_beta, "Pre-registered power; a mismatch exits with 4");
    sub->add_option("--x-lb", a.x_lb, "Lower end of the range (baselines)");
    sub->add_option("--x-ub", a.x_ub, "Upper end of the range (baselines)");
    sub->add_option("--theta-max", a.theta_max, "Largest conditional mean (hypothesis-test baseline)");
    sub->add_option("--omega", a.omega, "Spot-check probability (baselines)");
    sub->add_flag("--chsh", a.chsh, "Report the extractability bound; baselines default to the CHSH range");
    sub->add_option("--output", a.output, "Output JSON path (default stdout)");
}

std::vector<ExtremalEF> load_efs(const json& j, std::size_t n_records) {
    if (!j.is_array()) return {ef_from_json(j)};
    if (j.empty()) throw Error(ErrorKind::InvalidInput, "empty EF list");
    std::map<std::uint64_t, ExtremalEF> blocks;
    for (const auto& e : j) blocks[e.value("from", std::uint64_t{0})] = ef_from_json(e);
    if (blocks.begin()->first != 0) throw Error(ErrorKind::InvalidInput, "the first EF block must start at 0");
    if (blocks.size() == 1) return {blocks.begin()->second};
    std::vector<ExtremalEF> out;
    out.reserve(n_records);
    auto it = blocks.begin();
    for (std::size_t i = 0; i < n_records; ++i) {
        auto next = std::next(it);
        if (next != blocks.end() && i >= next->first) it = next;
        out.push_back(it->second);
    }
    return out;
}

void run_analyze(CLI::App* sub, AnalyzeArgs& a) {
    apply_config(sub, a.config);
    if (a.records.empty()) throw Error(ErrorKind::InvalidInput, "--records is required");
    const auto records = io::read_records(a.records);

    std::optional<json> ef_json;
    if (!a.ef.empty()) ef_json = parse_json_file(a.ef);
    auto file_value = [&](const char* key) -> std::optional<double> {
        if (!ef_json) return std::nullopt;
        const json& first = ef_json->is_array() ? ef_json->at(0) : *ef_json;
        if (first.contains(key) && first[key].is_number()) return first[key].get<double>();
        return std::nullopt;
    };
    const std::optional<double> eps = a.epsilon ? a.epsilon : file_value("epsilon");
    if (!eps) throw Error(ErrorKind::InvalidInput, "--epsilon is required");

    ConfidenceReport report;
    if (a.method == "ef") {
        if (!ef_json) throw Error(ErrorKind::InvalidInput, "--ef is required for the ef method");
        const auto efs = load_efs(*ef_json, records.size());
        if (a.expect_beta) {
            for (const auto& ef : efs)
                if (std::abs(ef.beta - *a.expect_beta) > kBetaMatchTol * std::max(1.0, std::abs(*a.expect_beta)))
                    throw ProtocolViolation("EF power " + io::format_double(ef.beta) +
                                            " differs from the pre-registered " + io::format_double(*a.expect_beta));
        }
        report = confidence_bound(records, efs, *eps);
    } else {
        const auto range = chsh_x_range();
        if (!a.chsh && (!a.x_lb || !a.x_ub))
            throw Error(ErrorKind::InvalidInput, "--x-lb and --x-ub are required (or --chsh)");
        const double lb = a.x_lb.value_or(range.first);
        const double ub = a.x_ub.value_or(range.second);
        const std::optional<double> omega = a.omega ? a.omega : file_value("omega");
        if (!omega) throw Error(ErrorKind::InvalidInput, "--omega is required");
        if (a.method == "gocanin")
            report = gocanin_bound(records, BinaryRange{lb, ub, a.theta_max}, *omega, *eps);
        else
            report = serfling_bound(records, lb, ub, *omega, *eps);
    }

    json j = header("analyze");
    j["params"] = {{"records", a.records}, {"ef", a.ef}, {"epsilon", num(*eps)},
                   {"method", a.method}, {"expect_beta", opt_json(a.expect_beta)}, {"x_lb", opt_json(a.x_lb)},
                   {"x_ub", opt_json(a.x_ub)}, {"theta_max", num(a.theta_max)}, {"omega", opt_json(a.omega)},
                   {"chsh", a.chsh}};
    j["report"] = report_to_json(report);
    if (a.chsh) j["extractability_lb"] = num(extractability_bound(report));
    emit(j, a.output);
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
    std::string config, mode = "min-trials", method = "all", dist, form = "convex", output;
    std::optional<double> i_hat, x_lb, x_ub, theta_max, delta_th, n, gamma;
    std::optional<double> theta, sigma2_lower, sigma2_upper, m3, m4;
    double omega = 0.1, epsilon = 0.01, max_inflation = 0.1;
    std::uint64_t m = 0;
};

void setup_plan(CLI::App& app, PlanArgs& a) {
    auto* sub = app.add_subcommand("plan", "Minimum trials, early stopping or calibration size");
    sub->add_option("--config", a.config, "Flat key = value file");
    sub->add_option("--mode", a.mode, "min-trials, early-stop or calibration")
        ->check(CLI::IsMember({"min-trials", "early-stop", "calibration"}));
    sub->add_option("--method", a.method, "ef, gocanin, serfling or all")
        ->check(CLI::IsMember({"ef", "gocanin", "serfling", "all"}));
    sub->add_option("--dist", a.dist, "Reference distribution CSV");
    sub->add_option("--i-hat", a.i_hat, "Use the CHSH distribution at this value");
    sub->add_option("--x-lb", a.x_lb, "Lower end of the range");
    sub->add_option("--x-ub", a.x_ub, "Upper end of the range");
    sub->add_option("--theta-max", a.theta_max, "Largest conditional mean (hypothesis-test baseline)");
    sub->add_option("--delta-th", a.delta_th, "Gap threshold per unchecked trial");
    sub->add_option("--form", a.form, "convex or numerical")->check(CLI::IsMember({"convex", "numerical"}));
    sub->add_option("--omega", a.omega, "Spot-check probability");
    sub->add_option("--epsilon", a.epsilon, "Error bound");
    sub->add_option("--m", a.m, "Early stop: spot checks wanted");
    sub->add_option("--gamma", a.gamma, "Early stop: log failure budget");
    sub->add_option("--theta", a.theta, "Calibration: anticipated mean (shifted units)");
    sub->add_option("--sigma2-lower", a.sigma2_lower, "Calibration: variance lower bound");
    sub->add_option("--sigma2-upper", a.sigma2_upper, "Calibration: variance upper bound");
    sub->add_option("--m3", a.m3, "Calibration: absolute third central moment");
    sub->add_option("--m4", a.m4, "Calibration: fourth central moment");
    sub->add_option("--n", a.n, "Calibration: planned number of trials");
    sub->add_option("--max-inflation", a.max_inflation, "Calibration: allowed relative bound inflation");
    sub->add_option("--output", a.output, "Output JSON path (default stdout)");
}

json plan_min_trials(const PlanArgs& a) {
    if (!a.delta_th) throw Error(ErrorKind::InvalidInput, "--delta-th is required");
    ReferenceDistribution dist;
    double lb = 0.0, ub = 0.0, theta_max = 0.0;
    if (a.i_hat) {
        const ChshParams c = ChshParams::make(*a.i_hat);
        dist = c.dist();
        lb = c.x_lb;
        ub = c.x_ub;
        theta_max = 1.0;
    } else if (!a.dist.empty()) {
        dist = io::read_distribution(a.dist);
        lb = dist.min();
        ub = dist.max();
        theta_max = ub;
    } else {
        throw Error(ErrorKind::InvalidInput, "need --i-hat or --dist");
    }
    if (a.x_lb) lb = *a.x_lb;
    if (a.x_ub) ub = *a.x_ub;
    if (a.theta_max) theta_max = *a.theta_max;
    if (dist.min() < lb) throw Error(ErrorKind::InvalidInput, "distribution support lies below x_lb");

    const double theta = dist.mean();
    json results = json::array();
    const bool all = a.method == "all";
    if (all || a.method == "ef") {
        const auto form = a.form == "numerical" ? MinTrialsForm::Numerical : MinTrialsForm::ConvexProgram;
        try {
            const auto r = min_trials(dist.shifted(lb), a.omega, a.epsilon, *a.delta_th, form);
            const ExtremalEF ef = ExtremalEF::from_shifted(r.opt.beta, r.opt.t, a.omega, lb);
            results.push_back({{"method", "ef"}, {"n_min", r.n_min}, {"divergent", false}, {"ef", ef_to_json(ef)}});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Divergent || !all) throw;
            results.push_back({{"method", "ef"}, {"n_min", nullptr}, {"divergent", true}});
        }
    }
    if (all || a.method == "gocanin") {
        const auto g = gocanin_min_trials(theta, BinaryRange{lb, ub, theta_max}, a.omega, a.epsilon, *a.delta_th);
        results.push_back({{"method", "gocanin"},
                           {"n_min", g.divergent ? json(nullptr) : json(g.n)},
                           {"divergent", g.divergent}});
    }
    if (all || a.method == "serfling") {
        try {
            const auto n = serfling_min_trials(theta, lb, ub, a.omega, a.epsilon, *a.delta_th);
            results.push_back({{"method", "serfling"}, {"n_min", n}, {"divergent", false}});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Divergent || !all) throw;
            results.push_back({{"method", "serfling"}, {"n_min", nullptr}, {"divergent", true}});
        }
    }
    json j;
    j["theta"] = num(theta);
    j["x_lb"] = num(lb);
    j["x_ub"] = num(ub);
    j["theta_max"] = num(theta_max);
    j["results"] = results;
    return j;
}

void run_plan(CLI::App* sub, PlanArgs& a) {
    apply_config(sub, a.config);
    json j = header("plan");
    j["params"] = {{"mode", a.mode}, {"method", a.method}, {"dist", a.dist}, {"i_hat", opt_json(a.i_hat)},
                   {"x_lb", opt_json(a.x_lb)}, {"x_ub", opt_json(a.x_ub)}, {"theta_max", opt_json(a.theta_max)},
                   {"delta_th", opt_json(a.delta_th)}, {"form", a.form}, {"omega", num(a.omega)},
                   {"epsilon", num(a.epsilon)}, {"m", a.m}, {"gamma", opt_json(a.gamma)},
                   {"theta", opt_json(a.theta)}, {"sigma2_lower", opt_json(a.sigma2_lower)},
                   {"sigma2_upper", opt_json(a.sigma2_upper)}, {"m3", opt_json(a.m3)}, {"m4", opt_json(a.m4)},
                   {"n", opt_json(a.n)}, {"max_inflation", num(a.max_inflation)}};
    if (a.mode == "min-trials") {
        j.update(plan_min_trials(a));
    } else if (a.mode == "early-stop") {
        if (a.m == 0 || !a.gamma) throw Error(ErrorKind::InvalidInput, "need --m and --gamma");
        j["n"] = early_stop_n(a.m, a.omega, *a.gamma);
        j["conditional_epsilon"] = num(conditional_coverage(a.epsilon, *a.gamma));
    } else {
        if (!a.theta || !a.sigma2_lower || !a.n)
            throw Error(ErrorKind::InvalidInput, "need --theta, --sigma2-lower and --n");
        PlanInputs in;
        in.theta_hint = *a.theta;
        in.sigma2_lower = *a.sigma2_lower;
        in.sigma2_upper = a.sigma2_upper.value_or(*a.sigma2_lower);
        in.m3_abs = a.m3.value_or(0.0);
        in.m4 = a.m4.value_or(3.0 * in.sigma2_upper * in.sigma2_upper);
        in.omega = a.omega;
        in.epsilon = a.epsilon;
        in.n = *a.n;
        const CalibrationPlan p = plan_calibration(in, a.max_inflation);
        j["n_a"] = p.n_a;
        j["n_v"] = p.n_v;
        j["r2"] = num(p.r2);
        j["bound"] = num(p.bound);
        j["limit"] = num(p.limit);
        j["inflation"] = num(p.inflation);
    }
    emit(j, a.output);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config, figure, out_dir = ".";
    std::optional<std::uint64_t> n, reps, seed, calibration_n;
    std::optional<double> omega, epsilon, i_hat;
    std::vector<double> grid;
    bool quiet = false;
};

void setup_simulate(CLI::App& app, SimulateArgs& a) {
    auto* sub = app.add_subcommand("simulate", "Reproduce a comparison figure as CSV");
    sub->add_option("figure", a.figure, "fig1, fig2, si_fig1, si_fig2 or si_fig3")
        ->check(CLI::IsMember({"fig1", "fig2", "si_fig1", "si_fig2", "si_fig3"}));
    sub->add_option("--config", a.config, "Flat key = value file");
    sub->add_option("--n", a.n, "Trials per replication");
    sub->add_option("--reps", a.reps, "Replications");
    sub->add_option("--seed", a.seed, "Base seed (default: SPOTCHECK_SEED or 0)");
    sub->add_option("--calibration-n", a.calibration_n, "Calibration samples per replication");
    sub->add_option("--omega", a.omega, "Spot-check probability");
    sub->add_option("--epsilon", a.epsilon, "Error bound");
    sub->add_option("--i-hat", a.i_hat, "CHSH value for the minimum-trials figures");
    sub->add_option("--grid", a.grid, "Comma-separated CHSH values or gap thresholds")->delimiter(',');
    sub->add_option("--out-dir", a.out_dir, "Directory for the CSV files");
    sub->add_flag("--quiet", a.quiet, "Do not print the summary table");
}

void run_simulate(CLI::App* sub, SimulateArgs& a) {
    apply_config(sub, a.config);
    if (a.figure.empty()) throw Error(ErrorKind::InvalidInput, "a figure tag is required");
    const FigureKind kind = parse_figure_kind(a.figure);
    FigureOverrides o;
    o.n = a.n;
    o.reps = a.reps;
    o.seed = a.seed ? *a.seed : default_seed();
    o.calibration_n = a.calibration_n;
    o.omega = a.omega;
    o.epsilon = a.epsilon;
    o.i_hat = a.i_hat;
    if (!a.grid.empty()) o.grid = a.grid;
    const FigureResult res = run_figure(kind, o);

    const std::string base = a.out_dir + "/" + a.figure;
    json cfg = header("simulate");
    cfg["figure"] = a.figure;
    cfg["seed"] = res.config.base_seed;
    cfg["params"] = {{"n", res.config.n},
                     {"reps", res.config.reps},
                     {"omega", num(res.config.omega)},
                     {"epsilon", num(res.config.epsilon)},
                     {"calibration_n", res.config.calibration_n},
                     {"i_hat", num(res.config.i_hat)}};
    json grid = json::array();
    for (double g : res.grid) grid.push_back(num(g));
    cfg["grid"] = grid;

    json files = json::array();
    if (kind == FigureKind::Fig2 || kind == FigureKind::SiFig2) {
        io::atomic_write(base + ".csv", io::figure2_csv(res));
        files.push_back(base + ".csv");
        if (!a.quiet) {
            std::cout << "delta_th        method     n_min         divergent\n";
            for (const auto& r : res.fig2)
                std::printf("%-15.6g %-10s %-13llu %s\n", r.delta_th, r.method.c_str(),
                            static_cast<unsigned long long>(r.n_min), r.divergent ? "yes" : "no");
        }
    } else {
        io::atomic_write(base + "_per_rep.csv", io::figure1_csv(res));
        io::atomic_write(base + "_summary.csv", io::summary_csv(res));
        io::atomic_write(base + "_diffs.csv", io::diffs_csv(res));
        for (const char* s : {"_per_rep.csv", "_summary.csv", "_diffs.csv"}) files.push_back(base + s);
        if (!a.quiet) {
            std::cout << "i_hat      method          mean_xi_lb    stderr\n";
            for (const auto& r : res.summary)
                std::printf("%-10.6f %-15s %-13.6f %.2e\n", r.i_hat, r.method.c_str(), r.mean, r.stderr_mean);
        }
    }
    cfg["files"] = files;
    emit(cfg, base + "_config.json");
}

int fail(int code, const std::string& name, const std::string& msg) {
    std::cerr << "error: " << name << ": " << msg << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence bounds for spot-checking experiments"};
    app.require_subcommand(1);
    CalibrateArgs ca;
    ConstructArgs co;
    AnalyzeArgs an;
    PlanArgs pl;
    SimulateArgs si;
    setup_calibrate(app, ca);
    setup_construct(app, co);
    setup_analyze(app, an);
    setup_plan(app, pl);
    setup_simulate(app, si);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        for (CLI::App* sub : app.get_subcommands()) {
            const std::string name = sub->get_name();
            if (name == "calibrate") run_calibrate(sub, ca);
            if (name == "construct") run_construct(sub, co);
            if (name == "analyze") run_analyze(sub, an);
            if (name == "plan") run_plan(sub, pl);
            if (name == "simulate") run_simulate(sub, si);
        }
    } catch (const ProtocolViolation& e) {
        return fail(kExitProtocol, "ProtocolViolation", e.what());
    } catch (const Error& e) {
        const bool input = e.kind() == ErrorKind::InvalidInput || e.kind() == ErrorKind::TooFewSamples;
        return fail(input ? kExitInput : kExitDomain, e.name(), e.what());
    } catch (const CLI::ParseError& e) {
        return fail(kExitInput, "InvalidInput", e.what());
    } catch (const json::exception& e) {
        return fail(kExitInput, "InvalidInput", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kExitInput, "InvalidInput", e.what());
    }
    return 0;
}
