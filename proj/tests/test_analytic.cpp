#include <doctest.h>

#include <cmath>
#include <random>

#include "spotcheck/analytic.hpp"
#include "spotcheck/chsh_sim.hpp"

using namespace spotcheck;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::InvalidInput;
}

}  // namespace

TEST_SUITE("analytic") {

TEST_CASE("B at the origin is one") {
    for (double w : {0.01, 0.1, 0.5, 0.9}) CHECK(b_function(0.0, w) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("B stays below two at the regularization point") {
    const double w = 0.5;
    CHECK(b_function(std::log(1.0 + (1.0 - 1.0 / std::sqrt(2.0)) * w), w) <= 2.0 + 1e-12);
}

TEST_CASE("B is increasing and convex") {
    const double w = 0.2;
    const double zinf = std::log(1.0 / (1.0 - w));
    const double h = zinf / 1000.0;
    for (int i = 1; i < 990; ++i) {
        const double z = i * h;
        CHECK(b_function(z + h, w) > b_function(z, w));
        CHECK(b_function(z + h, w) - 2 * b_function(z, w) + b_function(z - h, w) >= -1e-12);
    }
    CHECK(kind_of([&] { b_function(zinf, w); }) == ErrorKind::DomainError);
}

TEST_CASE("moment construction") {
    const MomentSpec ms{0.5, 0.25, std::nullopt, std::nullopt};
    const ExtremalEF ef = moment_ef(ms, 0.1, 0.01, 1e4);
    const double beta = std::sqrt(2.0 * 0.1 * std::log(100.0) / (0.25 * 1e4 * 0.9));
    CHECK(ef.beta == doctest::Approx(beta).epsilon(1e-14));
    CHECK(ef.t == doctest::Approx(std::exp(beta / 2.0)).epsilon(1e-14));
    // Rounded reference value.
    CHECK(std::abs(ef.beta - 0.0202331) < 1e-6);
    CHECK(std::abs(ef.t - 1.0101674) < 1e-6);
    const ExtremalEF doubled = moment_ef(MomentSpec{0.5, 0.5, std::nullopt, std::nullopt}, 0.1, 0.01, 1e4);
    CHECK(doubled.beta == doctest::Approx(ef.beta / std::sqrt(2.0)).epsilon(1e-14));
    const ExtremalEF zero = moment_ef(MomentSpec{0.0, 0.25, std::nullopt, std::nullopt}, 0.1, 0.01, 1e4);
    CHECK(zero.t == 1.0);
}

TEST_CASE("moment construction below the threshold") {
    const MomentSpec ms{0.5, 0.25, std::nullopt, std::nullopt};
    const double nth = moment_threshold(ms, 0.1, 0.01);
    const double oracle = 2.0 * 0.1 * 0.25 * std::log(100.0) / (0.9 * 0.25 * std::pow(std::log(1.0 / 0.9), 2));
    CHECK(nth == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(kind_of([&] { moment_ef(ms, 0.1, 0.01, std::floor(nth) - 1.0); }) == ErrorKind::BelowThreshold);
    CHECK_NOTHROW(moment_ef(ms, 0.1, 0.01, std::ceil(nth) + 1.0));
}

TEST_CASE("calibration-free construction") {
    const ExtremalEF ef = tightness_ef_bounded(1.0, 0.1, 0.01, 1e4);
    const double b1 = std::sqrt(2.0 * 0.1 * std::log(100.0) / (0.25 * 1e4 * 0.9));
    const double b2 = std::log(1.0 / 0.9) / 0.5;
    CHECK(b2 == doctest::Approx(0.2107210).epsilon(1e-6));
    CHECK(ef.beta == doctest::Approx(std::min(b1, b2)).epsilon(1e-14));
    CHECK(ef.t == doctest::Approx(std::exp(ef.beta * 0.5)).epsilon(1e-14));
    const ExtremalEF tiny = tightness_ef_bounded(1.0, 0.1, 0.01, 2.0);
    CHECK(tiny.beta == doctest::Approx(2.0 * std::log(1.0 / 0.9)).epsilon(1e-14));
    CHECK(tiny.t <= 1.0 / 0.9 + 1e-12);
}

TEST_CASE("gap construction") {
    const ExtremalEF ef = gap_ef(2.0, 4.1702, 0.1, 0.0098);
    CHECK(ef.beta == doctest::Approx(0.1 * 0.0098 / (4.1702 + 0.0098 * 0.0098)).epsilon(1e-14));
    CHECK(std::abs(ef.beta - 2.3500e-4) < 5e-9);
    CHECK(ef.t == doctest::Approx(std::exp(ef.beta * (2.0 - 0.0098))).epsilon(1e-14));
    // Small thresholds: slope omega / sigma^2.
    const double small = gap_ef(2.0, 4.0, 0.1, 1e-8).beta;
    CHECK(small / 1e-8 == doctest::Approx(0.1 / 4.0).epsilon(1e-6));
    const double ceiling = gap_ceiling(0.5, 0.25, 0.1);
    CHECK(ceiling == doctest::Approx(0.25 * std::log(1.0 / 0.9) / (0.1 * 0.5)).epsilon(1e-14));
    CHECK(kind_of([&] { gap_ef(0.5, 0.25, 0.1, ceiling * 1.01); }) == ErrorKind::GapTooLarge);
}

TEST_CASE("constructed factors satisfy the inequality on random distributions") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const double omega = 0.02 + 0.96 * u(g);
        const double theta = 0.1 + 3.0 * u(g);
        const double s2 = 0.05 + 2.0 * u(g);
        const double n = std::pow(10.0, 2.0 + 4.0 * u(g));
        std::vector<ExtremalEF> efs{tightness_ef(theta, s2, omega, 0.01, n), tightness_ef_bounded(theta, omega, 0.01, n)};
        try {
            efs.push_back(moment_ef(MomentSpec{theta, s2, std::nullopt, std::nullopt}, omega, 0.01, n));
        } catch (const Error&) {
        }
        try {
            efs.push_back(gap_ef(theta, s2, omega, 0.01));
        } catch (const Error&) {
        }
        const auto d = ReferenceDistribution::from_pairs({{0.0, 0.2}, {5.0 * u(g), 0.5}, {10.0 * u(g), 0.3}});
        for (const auto& ef : efs) {
            CHECK_NOTHROW(ef.validate());
            CHECK(ef_inequality_lhs(ef, d, omega) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("expected gap bound approaches its large-n form") {
    const ChshParams c = ChshParams::make(2.7);
    const ReferenceDistribution d = c.shifted_dist();
    const MomentSpec ms{d.mean(), d.variance(), std::nullopt, std::nullopt};
    double prev_ratio = 0.0;
    for (double n : {1e5, 1e6, 1e7, 1e8}) {
        const GapBound g = expected_gap_bound(ms.theta_e, ms, 0.1, 0.01, n, ms.sigma2_e);
        REQUIRE(g.regime == GapRegime::Feasible);
        const double ratio = g.value / expected_gap_limit(ms.sigma2_e, 0.1, 0.01, n);
        CHECK(ratio >= 1.0);
        if (prev_ratio > 0.0) CHECK(ratio - 1.0 <= (prev_ratio - 1.0) / std::sqrt(10.0) * 1.05);
        prev_ratio = ratio;
    }
    CHECK(prev_ratio < 1.01);
}

TEST_CASE("expected gap bound grows quadratically with mean error") {
    const double theta = 1.0, s2 = 0.5, n = 1e8;
    const MomentSpec exact{theta, s2, std::nullopt, std::nullopt};
    const double base = expected_gap_bound(theta, exact, 0.1, 0.01, n, s2).value;
    std::vector<double> ds{0.05, 0.1, 0.2, 0.4}, inc;
    for (double dlt : ds) {
        const MomentSpec off{theta + dlt, s2, std::nullopt, std::nullopt};
        inc.push_back(expected_gap_bound(theta, off, 0.1, 0.01, n, s2).value - base);
    }
    // Least-squares slope of log(increase) against log(delta).
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) mx += std::log(ds[i]) / ds.size(), my += std::log(inc[i]) / ds.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        sxy += (std::log(ds[i]) - mx) * (std::log(inc[i]) - my);
        sxx += (std::log(ds[i]) - mx) * (std::log(ds[i]) - mx);
    }
    CHECK(sxy / sxx == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("expected gap bound below the threshold is reported as infeasible") {
    const MomentSpec ms{0.5, 0.25, std::nullopt, std::nullopt};
    const GapBound g = expected_gap_bound(0.5, ms, 0.1, 0.01, 10.0, 0.25);
    CHECK(g.regime == GapRegime::InfeasibleT);
    CHECK(std::isinf(g.value));
}

TEST_CASE("constant spot-check count bound") {
    const double s = 1.5, lb = std::log(100.0);
    CHECK(constant_ns_gap_bound(0.0, s, 1e3, 0.01, 1e6) == doctest::Approx(s * std::sqrt(2.0 * lb / 1e3)).epsilon(1e-14));
    CHECK(constant_ns_gap_bound(0.0, s, 1e3, 0.01, 1e6) / constant_ns_gap_bound(0.0, s, 4e3, 0.01, 1e6) ==
          doctest::Approx(2.0).epsilon(1e-12));
    // Precondition on the expected spot-check count.
    CHECK(kind_of([&] { constant_ns_gap_bound(2.0, 0.5, 100.0, 0.01, 1e6); }) == ErrorKind::PreconditionFailed);
    const double theta = 4.635, sigma = 2.042, ns = 1e3;
    const double c = theta / sigma * std::sqrt(2.0 * lb);
    const double k = theta / (sigma * (std::sqrt(ns) - c));
    const double oracle = sigma * std::sqrt(2.0 * lb / ns) * (1.0 + k * std::sqrt(2.0 * lb) * (1.0 + k * std::sqrt(lb / 2.0)));
    CHECK(constant_ns_gap_bound(theta, sigma, ns, 0.01, 1e5) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("gap trial estimate") {
    CHECK(gap_trials_estimate(4.17, 0.1, 0.01, 0.01) ==
          doctest::Approx(2.0 * std::log(100.0) * (4.17 + 1e-4) / (0.1 * 0.9 * 1e-4)).epsilon(1e-14));
}

}  // TEST_SUITE
