#include "spotcheck/chsh_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <tuple>

#include "spotcheck/analytic.hpp"
#include "spotcheck/optimizer.hpp"

namespace spotcheck {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double mean_of(const std::vector<double>& v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    CompensatedSum s;
    for (double x : v) s.add((x - m) * (x - m));
    const double var = s.value() / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

double chsh_i_th() { return (16.0 + 14.0 * kSqrt2) / 17.0; }

std::pair<double, double> chsh_x_range() {
    const double ith = chsh_i_th();
    const double den = 2.0 * (2.0 * kSqrt2 - ith);
    return {0.5 - (4.0 + ith) / den, 0.5 + (4.0 - ith) / den};
}

ChshParams ChshParams::make(double i_hat) {
    if (!(i_hat >= -4.0 && i_hat <= 4.0)) throw Error(ErrorKind::InvalidInput, "CHSH value must lie in [-4, 4]");
    ChshParams p;
    p.i_hat = i_hat;
    p.i_th = chsh_i_th();
    std::tie(p.x_lb, p.x_ub) = chsh_x_range();
    p.mean = 0.5 + (i_hat - p.i_th) / (2.0 * (2.0 * kSqrt2 - p.i_th));
    p.p_theta = (i_hat + 4.0) / 8.0;
    return p;
}

ReferenceDistribution ChshParams::dist() const {
    return ReferenceDistribution::from_pairs({{x_lb, 1.0 - p_theta}, {x_ub, p_theta}});
}

double ChshParams::asymptotic_xi() const { return std::clamp(std::max(mean, 0.5), 0.5, 1.0); }

void SimConfig::validate() const {
    if (n == 0) throw Error(ErrorKind::InvalidInput, "n must be positive");
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorKind::InvalidInput, "omega must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0,1)");
    if (reps == 0) throw Error(ErrorKind::InvalidInput, "reps must be positive");
    if (reps > 0xFFFFFFFFull) throw Error(ErrorKind::InvalidInput, "reps exceeds the stream range");
    if (calibration_n == 0) throw Error(ErrorKind::InvalidInput, "calibration_n must be positive");
    ChshParams::make(i_hat);
}

std::vector<TrialRecord> simulate_trials(const SimConfig& cfg, std::uint32_t rep) {
    cfg.validate();
    std::vector<TrialRecord> out;
    out.reserve(cfg.n);
    for_each_trial(cfg, rep, [&](std::uint64_t i, int y, double x) {
        TrialRecord r;
        r.index = i;
        r.y = y;
        if (y == 0) r.x = x;
        out.push_back(r);
    });
    return out;
}

BinaryCounts simulate_counts(const SimConfig& cfg, std::uint32_t rep) {
    cfg.validate();
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    BinaryCounts c;
    c.n = cfg.n;
    for_each_trial(cfg, rep, [&](std::uint64_t, int y, double x) {
        if (y == 1)
            ++c.c_n;
        else if (x == chsh.x_ub)
            ++c.k_ub;
        else
            ++c.k_lb;
    });
    return c;
}

BinaryCounts simulate_counts_sparse(const SimConfig& cfg, std::uint32_t rep) {
    cfg.validate();
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    const rng::CounterRng gen(cfg.base_seed, rep, kSparseDomain);
    const double log_q = std::log1p(-cfg.omega);
    const double n = static_cast<double>(cfg.n);
    BinaryCounts c;
    c.n = cfg.n;
    double pos = 0.0;  // 1-based position of the last checked trial
    for (std::uint64_t k = 0;; ++k) {
        const auto u = gen.uniforms(k);
        pos += std::floor(std::log(u[0]) / log_q) + 1.0;
        if (pos > n) break;
        if (u[1] < chsh.p_theta)
            ++c.k_ub;
        else
            ++c.k_lb;
    }
    c.c_n = cfg.n - c.k_ub - c.k_lb;
    return c;
}

std::vector<double> calibration_samples(const SimConfig& cfg, std::uint32_t rep) {
    cfg.validate();
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    const rng::CounterRng gen(cfg.base_seed, rep, kCalibrationDomain);
    std::vector<double> out;
    out.reserve(cfg.calibration_n);
    for (std::uint64_t i = 0; i < cfg.calibration_n; ++i)
        out.push_back(gen.uniforms(i)[0] < chsh.p_theta ? chsh.x_ub : chsh.x_lb);
    return out;
}

double extractability_bound(const ConfidenceReport& report) {
    if (report.c_n == 0 || !(report.s_lb > -std::numeric_limits<double>::infinity())) return 0.5;
    const double avg = report.s_lb / static_cast<double>(report.c_n);
    if (std::isnan(avg)) return 0.5;
    return std::clamp(avg, 0.5, 1.0);
}

ExtremalEF calibrated_chsh_ef(const SimConfig& cfg, const std::vector<double>& samples) {
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    ObjectiveContext ctx;
    ctx.dist = ReferenceDistribution::empirical(samples).shifted(chsh.x_lb);
    ctx.omega = cfg.omega;
    ctx.epsilon = cfg.epsilon;
    ctx.n = static_cast<double>(cfg.n);
    const OptResult opt = optimize_ef(ctx);
    return ExtremalEF::from_shifted(opt.beta, opt.t, cfg.omega, chsh.x_lb);
}

ExtremalEF fixed_chsh_ef(const SimConfig& cfg) {
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    const ExtremalEF s = tightness_ef_bounded(chsh.width(), cfg.omega, cfg.epsilon, static_cast<double>(cfg.n));
    return ExtremalEF::from_shifted(s.beta, s.t, cfg.omega, chsh.x_lb);
}

RepBounds analyze_counts(const SimConfig& cfg, const BinaryCounts& counts, const ExtremalEF& calibrated,
                         const ExtremalEF& fixed, double theta_max) {
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    auto ef_bound = [&](const ExtremalEF& ef) {
        BoundAccumulator acc(ef);
        acc.add_many(1, 0.0, counts.c_n);
        acc.add_many(0, chsh.x_ub, counts.k_ub);
        acc.add_many(0, chsh.x_lb, counts.k_lb);
        return extractability_bound(acc.report(cfg.epsilon));
    };
    RepBounds r;
    r.ef_calibrated = ef_bound(calibrated);
    r.ef_fixed = ef_bound(fixed);
    r.gocanin = extractability_bound(
        gocanin_bound_counts(counts.n, counts.c_n, counts.k_ub, chsh.range(theta_max), cfg.omega, cfg.epsilon));
    const double checked_sum =
        static_cast<double>(counts.k_ub) * chsh.x_ub + static_cast<double>(counts.k_lb) * chsh.x_lb;
    r.serfling = extractability_bound(
        serfling_bound_sum(counts.n, counts.c_n, checked_sum, chsh.x_lb, chsh.x_ub, cfg.omega, cfg.epsilon));
    return r;
}

RepBounds analyze_rep(const SimConfig& cfg, std::uint32_t rep, bool sparse) {
    const BinaryCounts counts = sparse ? simulate_counts_sparse(cfg, rep) : simulate_counts(cfg, rep);
    return analyze_counts(cfg, counts, calibrated_chsh_ef(cfg, calibration_samples(cfg, rep)), fixed_chsh_ef(cfg));
}

FigureKind parse_figure_kind(const std::string& name) {
    if (name == "fig1") return FigureKind::Fig1;
    if (name == "fig2") return FigureKind::Fig2;
    if (name == "si_fig1") return FigureKind::SiFig1;
    if (name == "si_fig2") return FigureKind::SiFig2;
    if (name == "si_fig3") return FigureKind::SiFig3;
    throw Error(ErrorKind::InvalidInput, "unknown figure: " + name);
}

std::string figure_kind_name(FigureKind kind) {
    switch (kind) {
        case FigureKind::Fig1: return "fig1";
        case FigureKind::Fig2: return "fig2";
        case FigureKind::SiFig1: return "si_fig1";
        case FigureKind::SiFig2: return "si_fig2";
        case FigureKind::SiFig3: return "si_fig3";
    }
    return "fig1";
}

std::vector<double> default_chsh_grid() {
    std::vector<double> g;
    const int points = 33;
    for (int i = 0; i < points; ++i) g.push_back(2.0 + (2.0 * kSqrt2 - 2.0) * i / (points - 1));
    return g;
}

std::vector<double> default_gap_grid() {
    std::vector<double> g;
    const int points = 24;
    const double lo = std::log(0.004);
    const double hi = std::log(0.2);
    for (int i = 0; i < points; ++i) g.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
    return g;
}

SimConfig figure_config(FigureKind kind, const FigureOverrides& o) {
    SimConfig c;
    c.n = 100000;
    c.omega = 0.1;
    c.epsilon = 0.01;
    c.reps = 1000;
    c.calibration_n = 100;
    c.i_hat = 2.7;
    if (kind == FigureKind::SiFig1 || kind == FigureKind::SiFig2) c.omega = 0.5;
    if (kind == FigureKind::SiFig3) {
        c.n = 1000000000ull;
        c.omega = 1e-5;
    }
    if (o.n) c.n = *o.n;
    if (o.reps) c.reps = *o.reps;
    if (o.seed) c.base_seed = *o.seed;
    if (o.calibration_n) c.calibration_n = *o.calibration_n;
    if (o.omega) c.omega = *o.omega;
    if (o.epsilon) c.epsilon = *o.epsilon;
    if (o.i_hat) c.i_hat = *o.i_hat;
    c.validate();
    return c;
}

namespace {

void run_extractability(FigureResult& res) {
    const bool sparse = res.kind == FigureKind::SiFig3;
    static const char* kMethods[] = {"ef_calibrated", "ef_fixed", "gocanin", "serfling"};
    for (double i_hat : res.grid) {
        SimConfig cfg = res.config;
        cfg.i_hat = i_hat;
        cfg.validate();
        const ChshParams chsh = ChshParams::make(i_hat);
        const ExtremalEF fixed = fixed_chsh_ef(cfg);
        // Binary calibration data: the EF depends only on the count at x_ub.
        std::map<std::uint64_t, ExtremalEF> cache;
        std::vector<std::vector<double>> values(4);
        for (std::uint64_t rep = 0; rep < cfg.reps; ++rep) {
            const auto r32 = static_cast<std::uint32_t>(rep);
            const auto samples = calibration_samples(cfg, r32);
            const auto k = static_cast<std::uint64_t>(
                std::count(samples.begin(), samples.end(), chsh.x_ub));
            auto it = cache.find(k);
            if (it == cache.end()) it = cache.emplace(k, calibrated_chsh_ef(cfg, samples)).first;
            const BinaryCounts counts = sparse ? simulate_counts_sparse(cfg, r32) : simulate_counts(cfg, r32);
            const RepBounds b = analyze_counts(cfg, counts, it->second, fixed);
            const double v[4] = {b.ef_calibrated, b.ef_fixed, b.gocanin, b.serfling};
            for (int m = 0; m < 4; ++m) {
                values[m].push_back(v[m]);
                res.per_rep.push_back({i_hat, kMethods[m], rep, v[m]});
            }
            res.diffs.push_back({i_hat, rep, b.ef_calibrated - b.gocanin});
        }
        for (int m = 0; m < 4; ++m) {
            const double mu = mean_of(values[m]);
            res.summary.push_back({i_hat, kMethods[m], mu, stderr_of(values[m], mu)});
        }
        res.summary.push_back({i_hat, "asymptotic", chsh.asymptotic_xi(), 0.0});
    }
}

void run_min_trials(FigureResult& res) {
    const SimConfig& cfg = res.config;
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    const ReferenceDistribution shifted = chsh.shifted_dist();
    for (double delta : res.grid) {
        if (!(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "gap thresholds must be positive");
        try {
            const auto r = min_trials(shifted, cfg.omega, cfg.epsilon, delta);
            res.fig2.push_back({delta, "ef", r.n_min, false});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Divergent) throw;
            res.fig2.push_back({delta, "ef", 0, true});
        }
        const auto g = gocanin_min_trials(chsh.mean, chsh.range(), cfg.omega, cfg.epsilon, delta);
        res.fig2.push_back({delta, "gocanin", g.n, g.divergent});
        try {
            const auto n = serfling_min_trials(chsh.mean, chsh.x_lb, chsh.x_ub, cfg.omega, cfg.epsilon, delta);
            res.fig2.push_back({delta, "serfling", n, false});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Divergent) throw;
            res.fig2.push_back({delta, "serfling", 0, true});
        }
    }
}

}  // namespace

FigureResult run_figure(FigureKind kind, const FigureOverrides& o) {
    FigureResult res;
    res.kind = kind;
    res.config = figure_config(kind, o);
    const bool gap_figure = kind == FigureKind::Fig2 || kind == FigureKind::SiFig2;
    res.grid = o.grid ? *o.grid : (gap_figure ? default_gap_grid() : default_chsh_grid());
    std::sort(res.grid.begin(), res.grid.end());
    if (gap_figure)
        run_min_trials(res);
    else
        run_extractability(res);
    return res;
}

}  // namespace spotcheck
