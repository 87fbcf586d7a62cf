#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spotcheck/baselines.hpp"
#include "spotcheck/core.hpp"
#include "spotcheck/rng.hpp"

namespace spotcheck {

double chsh_i_th();
std::pair<double, double> chsh_x_range();

// Binary X = 1/2 + (I - I_th)/(2(2 sqrt2 - I_th)) with I = +-4.
struct ChshParams {
    double i_hat = 0.0;
    double i_th = 0.0;
    double x_lb = 0.0;
    double x_ub = 0.0;
    double mean = 0.0;
    double p_theta = 0.0;

    static ChshParams make(double i_hat);
    double width() const { return x_ub - x_lb; }
    double sigma2() const { return width() * width() * p_theta * (1.0 - p_theta); }
    ReferenceDistribution dist() const;
    ReferenceDistribution shifted_dist() const { return dist().shifted(x_lb); }
    // max(E X, 1/2): the infinite-data extractability bound.
    double asymptotic_xi() const;
    BinaryRange range(double theta_max = 1.0) const { return BinaryRange{x_lb, x_ub, theta_max}; }
};

struct SimConfig {
    std::uint64_t n = 100000;
    double omega = 0.1;
    double epsilon = 0.01;
    std::uint64_t reps = 1000;
    std::uint64_t base_seed = 0;
    double i_hat = 2.7;
    std::uint64_t calibration_n = 100;

    void validate() const;
};

// Counter domains keep trial, calibration and sparse draws disjoint.
enum Domain : std::uint32_t { kTrialDomain = 0, kCalibrationDomain = 1, kSparseDomain = 2, kAuxDomain = 3 };

struct BinaryCounts {
    std::uint64_t n = 0;
    std::uint64_t c_n = 0;
    std::uint64_t k_ub = 0;
    std::uint64_t k_lb = 0;
};

// Calls f(index, y, x) for every trial of one replication; x is only
// meaningful when y = 0.
template <class F>
void for_each_trial(const SimConfig& cfg, std::uint32_t rep, F&& f) {
    const ChshParams chsh = ChshParams::make(cfg.i_hat);
    const rng::CounterRng gen(cfg.base_seed, rep, kTrialDomain);
    for (std::uint64_t i = 0; i < cfg.n; ++i) {
        const auto u = gen.uniforms(i);
        if (u[0] < cfg.omega)
            f(i, 0, u[1] < chsh.p_theta ? chsh.x_ub : chsh.x_lb);
        else
            f(i, 1, 0.0);
    }
}

std::vector<TrialRecord> simulate_trials(const SimConfig& cfg, std::uint32_t rep);
BinaryCounts simulate_counts(const SimConfig& cfg, std::uint32_t rep);
// Skips unchecked trials with geometric gaps; for very large n.
BinaryCounts simulate_counts_sparse(const SimConfig& cfg, std::uint32_t rep);
std::vector<double> calibration_samples(const SimConfig& cfg, std::uint32_t rep);

double extractability_bound(const ConfidenceReport& report);

// EF built by maximizing the expected bound on the calibration sample.
ExtremalEF calibrated_chsh_ef(const SimConfig& cfg, const std::vector<double>& samples);
// Calibration-free EF for X in [x_lb, x_ub].
ExtremalEF fixed_chsh_ef(const SimConfig& cfg);

struct RepBounds {
    double ef_calibrated = 0.5;
    double ef_fixed = 0.5;
    double gocanin = 0.5;
    double serfling = 0.5;
};

RepBounds analyze_counts(const SimConfig& cfg, const BinaryCounts& counts, const ExtremalEF& calibrated,
                         const ExtremalEF& fixed, double theta_max = 1.0);
RepBounds analyze_rep(const SimConfig& cfg, std::uint32_t rep, bool sparse = false);

enum class FigureKind { Fig1, Fig2, SiFig1, SiFig2, SiFig3 };

FigureKind parse_figure_kind(const std::string& name);
std::string figure_kind_name(FigureKind kind);

struct FigureOverrides {
    std::optional<std::uint64_t> n;
    std::optional<std::uint64_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> calibration_n;
    std::optional<double> omega;
    std::optional<double> epsilon;
    std::optional<double> i_hat;
    std::optional<std::vector<double>> grid;  // CHSH values or gap thresholds
};

struct Fig1Row {
    double i_hat;
    std::string method;
    std::uint64_t rep;
    double xi_lb;
};

struct SummaryRow {
    double i_hat;
    std::string method;
    double mean;
    double stderr_mean;
};

struct DiffRow {
    double i_hat;
    std::uint64_t rep;
    double diff;
};

struct Fig2Row {
    double delta_th;
    std::string method;
    std::uint64_t n_min;
    bool divergent;
};

struct FigureResult {
    FigureKind kind = FigureKind::Fig1;
    SimConfig config;
    std::vector<double> grid;
    std::vector<Fig1Row> per_rep;
    std::vector<SummaryRow> summary;
    std::vector<DiffRow> diffs;
    std::vector<Fig2Row> fig2;
};

std::vector<double> default_chsh_grid();
std::vector<double> default_gap_grid();
SimConfig figure_config(FigureKind kind, const FigureOverrides& o);
FigureResult run_figure(FigureKind kind, const FigureOverrides& o);

}  // namespace spotcheck
