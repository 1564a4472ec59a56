// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "annealab/rng.hpp"
#include "annealab/terms.hpp"

using namespace annealab;
using Catch::Approx;

namespace {

// Deterministic piecewise schedule with `segments` random lr levels.
ScheduleSpec random_piecewise(std::uint64_t seed, std::int64_t t_total, int segments) {
    std::vector<Breakpoint> bps;
    std::int64_t step = 0;
    for (int s = 0; s < segments; ++s) {
        const double lr = 1e-5 + 9e-4 * rng::uniform01(rng::counter_hash(seed, static_cast<std::uint64_t>(s), 0, 0));
        bps.push_back({step, lr});
        const auto gap = static_cast<std::int64_t>(
            1 + rng::counter_hash(seed, static_cast<std::uint64_t>(s), 1, 0) % (2 * t_total / segments));
        step += gap;
        if (step >= t_total) break;
    }
    return build_piecewise(std::move(bps), t_total);
}

// Non-increasing schedule whose per-step drops all have magnitude >= min_drop.
ScheduleSpec random_non_increasing(std::uint64_t seed, std::int64_t t_total, double min_drop) {
    std::vector<Breakpoint> bps;
    double lr = 1.0;
    for (std::int64_t t = 0; t < t_total; ++t) {
        bps.push_back({t, lr});
        lr -= min_drop * (1.0 + 9.0 * rng::uniform01(rng::counter_hash(seed, static_cast<std::uint64_t>(t), 2, 0)));
    }
    return build_piecewise(std::move(bps), t_total);
}

} // namespace

TEST_CASE("forward series of a constant schedule is eta * steps") {
    const auto s = forward_series(build_constant(1e-4, 100));
    REQUIRE(s.size() == 100);
    CHECK(s.back() == Approx(1e-2).epsilon(1e-14));
    for (std::size_t t = 1; t < s.size(); ++t) REQUIRE(s[t] >= s[t - 1]);
}

TEST_CASE("forward series of a pure ramp is the triangle area") {
    // constant spec with warmup occupying all but the final step
    const std::int64_t T = 200;
    const double eta = 4e-4;
    const auto s = forward_series(build_constant(eta, T, T - 1));
    // sum_{t=0}^{T-2} eta*t/(T-1) + eta = eta*(T-2)/2 + eta
    const double expected = eta * static_cast<double>(T - 2) / 2.0 + eta;
    CHECK(s.back() == Approx(expected).epsilon(1e-13));
    CHECK(std::abs(s.back() - eta * static_cast<double>(T) / 2.0) <= eta); // within one step's lr
}

TEST_CASE("forward series of the wsd fixture sums the three phase areas") {
    const auto spec = build_wsd(2e-4, 1000, 100, 0.1, 1.0);
    const auto s = forward_series(spec);
    // warmup 2e-4 * 49.5, constant 800 * 2e-4, decay 2e-4 * 50.5
    CHECK(s.back() == Approx(0.18).epsilon(1e-12));
    long double direct = 0.0L;
    for (std::int64_t t = 0; t < spec.t_total; ++t) direct += static_cast<long double>(lr_at(spec, t));
    CHECK(s.back() == Approx(static_cast<double>(direct)).epsilon(1e-13));
}

TEST_CASE("compensated summation tracks an extended-precision reference") {
    const auto spec = random_piecewise(11, 100000, 64);
    const auto s = forward_series(spec);
    long double ref = 0.0L;
    for (std::int64_t t = 0; t < spec.t_total; ++t) ref += static_cast<long double>(lr_at(spec, t));
    CHECK(std::abs(s.back() - static_cast<double>(ref)) / static_cast<double>(ref) < 1e-12);
}

TEST_CASE("asmt is exactly zero on a constant schedule") {
    MomentumConfig cfg;
    const auto m = asmt_series(build_constant(5e-5, 500), cfg);
    for (double v : m) REQUIRE(v == 0.0);
}

TEST_CASE("asmt matches the constant-slope closed form") {
    // wsd with R = 1 and no warmup is a pure linear decay: every step drops
    // by d = eta_max / T.
    const std::int64_t T = 1000;
    const double eta = 1e-3;
    const auto spec = build_wsd(eta, T, 0, 1.0, 1.0);
    MomentumConfig cfg;
    const auto m = asmt_series(spec, cfg);
    const double d = eta / static_cast<double>(T);
    const double expected = static_cast<double>(T - 1) * d / std::sqrt(d * d + cfg.epsilon);
    CHECK(m.back() == Approx(expected).epsilon(1e-12));
}

TEST_CASE("asmt of an increasing schedule is negative") {
    const auto spec = build_piecewise({{0, 1e-5}, {100, 5e-5}, {200, 2e-4}}, 300);
    MomentumConfig cfg;
    CHECK(asmt_series(spec, cfg).back() < 0.0);
}

TEST_CASE("asmt of non-increasing schedules is non-negative and non-decreasing") {
    MomentumConfig cfg;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto spec = random_non_increasing(seed, 400, 1e-6);
        const auto m = asmt_series(spec, cfg);
        for (std::size_t t = 1; t < m.size(); ++t) {
            REQUIRE(m[t] >= 0.0);
            REQUIRE(m[t] >= m[t - 1]);
        }
    }
}

TEST_CASE("asmt increments are invariant under uniform lr scaling as eps -> 0") {
    MomentumConfig cfg;
    cfg.epsilon = 1e-18;
    const double scale = 10.0;
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        const auto spec = random_non_increasing(seed, 300, 1e-6);
        ScheduleSpec scaled = spec;
        for (auto& bp : scaled.breakpoints) bp.lr *= scale;
        scaled.eta_max *= scale;
        const auto m1 = asmt_series(spec, cfg);
        const auto m2 = asmt_series(scaled, cfg);
        for (std::size_t t = 1; t < m1.size(); ++t) {
            const double inc1 = m1[t] - m1[t - 1];
            const double inc2 = m2[t] - m2[t - 1];
            REQUIRE(std::abs(inc2 - inc1) < 1e-3 * std::abs(inc1));
        }
    }
}

TEST_CASE("cmmt single-drop value matches the geometric series") {
    // One drop of d at step 50, evaluated over s = 100 momentum steps.
    const double eta0 = 3e-4, d = 1e-4;
    const auto spec = build_piecewise({{0, eta0}, {50, eta0 - d}}, 101);
    const double lambda = 0.99;
    const double expected = d * (1.0 - std::pow(lambda, 51)) / (1.0 - lambda);
    CHECK(expected == Approx(4.0105e-3).epsilon(1e-3)); // sanity on the frozen magnitude

    CHECK(cmmt_bruteforce(spec, lambda) == Approx(expected).epsilon(1e-12));
    MomentumConfig cfg;
    cfg.variant = MomentumVariant::cmmt;
    cfg.lambda_decay = lambda;
    CHECK(cmmt_series(spec, cfg).back() == Approx(expected).epsilon(1e-12));
}

TEST_CASE("cmmt telescopes to the total lr drop as lambda -> 0") {
    const auto spec = random_non_increasing(7, 300, 1e-5);
    const double m = cmmt_bruteforce(spec, 1e-9);
    const double drop = lr_at(spec, 0) - lr_at(spec, spec.t_total - 1);
    CHECK(m == Approx(drop).epsilon(1e-6));
}

TEST_CASE("cmmt recurrence equals the double-sum oracle on random schedules") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto spec = random_piecewise(seed, 500, 12);
        for (double lambda : {0.99, 0.999}) {
            MomentumConfig cfg;
            cfg.variant = MomentumVariant::cmmt;
            cfg.lambda_decay = lambda;
            const double fast = cmmt_series(spec, cfg).back();
            const double brute = cmmt_bruteforce(spec, lambda);
            const double denom = std::max(std::abs(brute), 1e-30);
            REQUIRE(std::abs(fast - brute) / denom < 1e-10);
        }
    }
}

TEST_CASE("cmmt is zero on a constant schedule") {
    MomentumConfig cfg;
    cfg.variant = MomentumVariant::cmmt;
    const auto m = cmmt_series(build_constant(2e-4, 200), cfg);
    for (double v : m) REQUIRE(v == 0.0);
    CHECK(cmmt_bruteforce(build_constant(2e-4, 200), 0.99) == 0.0);
}

TEST_CASE("cmmt bruteforce refuses quadratic blowups") {
    CHECK_THROWS_AS(cmmt_bruteforce(build_constant(1e-4, 10001), 0.99), ValidationError);
}

TEST_CASE("series lengths equal t_total and variants are enforced") {
    const auto spec = build_cosine(1e-3, 123, 7, 10.0);
    MomentumConfig asmt_cfg;
    MomentumConfig cmmt_cfg;
    cmmt_cfg.variant = MomentumVariant::cmmt;
    CHECK(asmt_series(spec, asmt_cfg).size() == 123);
    CHECK(cmmt_series(spec, cmmt_cfg).size() == 123);
    CHECK(forward_series(spec).size() == 123);
    CHECK_THROWS_AS(asmt_series(spec, cmmt_cfg), ValidationError);
    CHECK_THROWS_AS(cmmt_series(spec, asmt_cfg), ValidationError);
    MomentumConfig bad;
    bad.beta1 = 1.0;
    CHECK_THROWS_AS(asmt_series(spec, bad), ValidationError);
}

TEST_CASE("term series exports step,S,M csv") {
    const auto spec = build_constant(1e-4, 3);
    MomentumConfig cfg;
    const auto ts = compute_terms(spec, cfg);
    std::ostringstream os;
    ts.write_csv(os);
    CHECK(os.str() == "step,S,M\n0,1e-04,0\n1,2e-04,0\n2,0.00030000000000000003,0\n");
}
