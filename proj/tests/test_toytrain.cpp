// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "annealab/toytrain.hpp"

using namespace annealab;
using Catch::Approx;

TEST_CASE("one-dimensional unit problem is the half-square") {
    const auto p = make_problem(1, 0, 0.0, 1.0);
    REQUIRE(p.curvature_spectrum.size() == 1);
    CHECK(p.curvature_spectrum[0] == 1.0);
    CHECK(p.objective({3.0}) == Approx(4.5).epsilon(1e-15));
    CHECK(p.distance_d == 1.0);

    // gradient of 1/2 x^2 is x: one sgd step at gamma moves x to (1-gamma)x
    const auto spec = build_constant(1.0, 1);
    const auto r = run_sgd(p, spec, 0.25, 0, 1);
    CHECK(r.curve.points[0].loss == Approx(0.5 * 0.75 * 0.75).epsilon(1e-15));
}

TEST_CASE("problems and runs are deterministic per seed") {
    const auto p1 = make_problem(16, 42, 0.3, 50.0);
    const auto p2 = make_problem(16, 42, 0.3, 50.0);
    CHECK(p1.curvature_spectrum == p2.curvature_spectrum);
    CHECK(p1.grad_bound_g == p2.grad_bound_g);

    const auto spec = build_wsd(1.0, 256, 16, 0.25, 1.0);
    const auto r1 = run_sgd(p1, spec, 1e-3, 9, 256);
    const auto r2 = run_sgd(p2, spec, 1e-3, 9, 256);
    REQUIRE(r1.curve.points.size() == r2.curve.points.size());
    for (std::size_t i = 0; i < r1.curve.points.size(); ++i)
        REQUIRE(r1.curve.points[i].loss == r2.curve.points[i].loss);

    const auto r3 = run_sgd(p1, spec, 1e-3, 10, 256);
    CHECK(r3.final_suboptimality != r1.final_suboptimality);
}

TEST_CASE("initial distance is exactly one") {
    for (int dim : {1, 2, 32, 100}) {
        const auto p = make_problem(dim, 0, 0.0, 10.0);
        const auto x1 = p.initial_point();
        double norm_sq = 0.0;
        for (double v : x1) norm_sq += v * v;
        CHECK(norm_sq == Approx(1.0).epsilon(1e-12));
        CHECK(p.distance_d == 1.0);
    }
}

TEST_CASE("spectrum is log-spaced between 1 and the condition number") {
    const auto p = make_problem(8, 0, 0.0, 100.0);
    CHECK(p.curvature_spectrum.front() == 1.0);
    CHECK(p.curvature_spectrum.back() == Approx(100.0).epsilon(1e-12));
    for (std::size_t i = 2; i < p.curvature_spectrum.size(); ++i)
        CHECK(p.curvature_spectrum[i] / p.curvature_spectrum[i - 1] ==
              Approx(p.curvature_spectrum[1] / p.curvature_spectrum[0]).epsilon(1e-9));
}

TEST_CASE("noiseless run matches the closed-form product iterate") {
    const auto p = make_problem(8, 0, 0.0, 30.0);
    const auto spec = build_wsd(1.0, 1000, 50, 0.3, 1.0);
    const double gamma = 5e-3;
    const auto r = run_sgd(p, spec, gamma, 0, 1000);
    for (std::int64_t updates : {1LL, 10LL, 100LL, 1000LL}) {
        const auto x = closed_form_iterate(p, spec, gamma, updates);
        const double f_oracle = p.objective(x);
        const double f_sim = r.curve.points[static_cast<std::size_t>(updates - 1)].loss;
        REQUIRE(std::abs(f_sim - f_oracle) <= 1e-10 * std::max(1.0, std::abs(f_oracle)));
    }
}

TEST_CASE("noiseless constant-step loss is strictly decreasing") {
    const auto p = make_problem(8, 0, 0.0, 20.0);
    const auto spec = build_constant(1.0, 500);
    const auto r = run_sgd(p, spec, 1e-2, 0, 500);
    for (std::size_t i = 1; i < r.curve.points.size(); ++i)
        REQUIRE(r.curve.points[i].loss < r.curve.points[i - 1].loss);
}

TEST_CASE("suboptimality stays non-negative up to float error") {
    const auto p = make_problem(16, 3, 0.5, 100.0);
    const auto spec = build_wsd(1.0, 2048, 0, 1.0, 1.0);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto r = run_sgd(p, spec, 2e-3, seed, 2048);
        REQUIRE(r.final_suboptimality >= -1e-12);
    }
}

TEST_CASE("mean final suboptimality weakly increases with noise") {
    const auto spec = build_wsd(1.0, 1024, 0, 1.0, 1.0);
    double prev = -1.0;
    for (double sigma : {0.0, 0.25, 1.0}) {
        const auto p = make_problem(16, 5, sigma, 100.0);
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 32; ++seed)
            mean += run_sgd(p, spec, 2e-3, seed, 1024).final_suboptimality;
        mean /= 32.0;
        REQUIRE(mean >= prev);
        prev = mean;
    }
}

TEST_CASE("divergent runs fail naming the step") {
    const auto p = make_problem(4, 0, 0.0, 100.0);
    const auto spec = build_constant(1.0, 1000);
    // stability threshold is gamma * lambda_max < 2; go 10x past it
    CHECK_THROWS_MATCHES(run_sgd(p, spec, 0.2, 0, 1000), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("step")));
}

TEST_CASE("run_sgd validates arguments") {
    const auto p = make_problem(4, 0, 0.0, 10.0);
    const auto spec = build_constant(1.0, 100);
    CHECK_THROWS_AS(run_sgd(p, spec, -1.0, 0, 100), ValidationError);
    CHECK_THROWS_AS(run_sgd(p, spec, 1e-3, 0, 99), ValidationError); // T mismatch
    CHECK_THROWS_AS(make_problem(0, 0, 0.0, 10.0), ValidationError);
    CHECK_THROWS_AS(make_problem(4, 0, 0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(make_problem(4, 0, -0.1, 10.0), ValidationError);
}

TEST_CASE("benchmark family enumerates the cartesian run matrix") {
    BenchmarkConfig cfg;
    cfg.dim = 4;
    cfg.condition_number = 10.0;
    cfg.noise_sigma = 0.1;
    cfg.problem_seed = 1;
    cfg.schedules = {build_constant(1.0, 128), build_wsd(1.0, 128, 8, 0.25, 1.0)};
    cfg.gammas = {1e-2};
    cfg.seeds = {1, 2, 3};
    const auto runs = generate_benchmark_family(cfg);
    REQUIRE(runs.size() == 6);
    for (std::size_t i = 0; i < runs.size(); ++i)
        for (std::size_t j = i + 1; j < runs.size(); ++j)
            REQUIRE(runs[i].curve.meta.label != runs[j].curve.meta.label);

    const auto again = generate_benchmark_family(cfg);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        REQUIRE(again[i].curve.points == runs[i].curve.points);
        REQUIRE(again[i].curve.meta.label == runs[i].curve.meta.label);
    }

    CHECK_THROWS_AS(generate_benchmark_family(BenchmarkConfig{}), ValidationError);
}

TEST_CASE("observed gradient norms stay within the a-priori bound") {
    const auto p = make_problem(32, 7, 0.5, 100.0);
    const auto spec = build_wsd(1.0, 512, 0, 1.0, 1.0);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto r = run_sgd(p, spec, 1e-4, seed, 512);
        REQUIRE(r.max_grad_norm <= p.grad_bound_g);
        REQUIRE(r.max_grad_norm > 0.0);
    }
}
