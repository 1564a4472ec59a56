// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "annealab/schedule.hpp"

using namespace annealab;
using Catch::Approx;

TEST_CASE("wsd evaluates the three branches") {
    const auto spec = build_wsd(2e-4, 1000, 100, 0.1, 1.0);
    REQUIRE(spec.decay_steps() == 100);
    REQUIRE(spec.constant_until() == 900);

    CHECK(lr_at(spec, 50) == Approx(1e-4).epsilon(1e-12));  // half-ramp
    CHECK(lr_at(spec, 500) == 2e-4);                        // constant phase
    CHECK(lr_at(spec, 950) == Approx(1e-4).epsilon(1e-12)); // halfway down the decay
    CHECK(lr_at(spec, 999) == Approx(2e-6).epsilon(1e-12)); // last step
    // Boundary step belongs to the decay branch and still evaluates to eta_max.
    CHECK(lr_at(spec, 900) == 2e-4);
    CHECK(lr_at(spec, 0) == 0.0);
}

TEST_CASE("wsd decay rounding is half-up") {
    CHECK(build_wsd(1e-3, 1000, 0, 0.0015, 1.0).decay_steps() == 2); // 1.5 -> 2
    CHECK(build_wsd(1e-3, 1000, 0, 0.0014, 1.0).decay_steps() == 1); // 1.4 -> 1
    CHECK(build_wsd(1e-3, 10, 0, 0.25, 1.0).decay_steps() == 3);     // 2.5 -> 3
}

TEST_CASE("cosine peak, midpoint and final value") {
    const auto spec = build_cosine(1e-3, 1000, 0, 10.0);
    CHECK(lr_at(spec, 0) == 1e-3); // exact peak
    CHECK(lr_at(spec, 500) == Approx(5.5e-4).epsilon(1e-12));
    CHECK(std::abs(lr_at(spec, 999) - 1e-4) < 1e-6);
}

TEST_CASE("cosine warmup hits eta_max exactly at t_warmup") {
    const auto spec = build_cosine(1e-3, 1000, 100, 10.0);
    CHECK(lr_at(spec, 100) == 1e-3);
    CHECK(lr_at(spec, 50) == Approx(5e-4).epsilon(1e-12));
}

TEST_CASE("constant schedule") {
    const auto spec = build_constant(5e-5, 1000);
    for (std::int64_t t : {0, 1, 500, 999}) CHECK(lr_at(spec, t) == 5e-5);
}

TEST_CASE("piecewise is a left-closed step function") {
    const auto spec = build_piecewise({{0, 1e-4}, {10, 5e-5}}, 100);
    CHECK(lr_at(spec, 0) == 1e-4);
    CHECK(lr_at(spec, 9) == 1e-4);
    CHECK(lr_at(spec, 10) == 5e-5);
    CHECK(lr_at(spec, 99) == 5e-5);
}

TEST_CASE("validation errors name the violated constraint") {
    CHECK_THROWS_MATCHES(build_wsd(2e-4, 1000, 950, 0.1, 1.0), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("t_warmup")));
    CHECK_THROWS_AS(build_wsd(2e-4, 1000, 100, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_wsd(2e-4, 1000, 100, 1.5, 1.0), ValidationError);
    CHECK_THROWS_AS(build_wsd(2e-4, 1000, 100, 0.1, 0.5), ValidationError);
    CHECK_THROWS_AS(build_wsd(-1e-4, 1000, 100, 0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(build_cosine(1e-3, 1000, 0, 0.5), ValidationError);
    CHECK_THROWS_AS(build_constant(1e-3, 1000, 1000), ValidationError);
    CHECK_THROWS_AS(build_piecewise({{0, 1e-4}, {5, 2e-4}, {5, 1e-4}}, 100), ValidationError);
    CHECK_THROWS_AS(build_piecewise({{1, 1e-4}}, 100), ValidationError);
    CHECK_THROWS_AS(build_piecewise({{0, -1e-4}}, 100), ValidationError);
}

TEST_CASE("lr_at rejects out-of-range steps") {
    const auto spec = build_constant(1e-3, 10);
    CHECK_THROWS_AS(lr_at(spec, -1), std::out_of_range);
    CHECK_THROWS_AS(lr_at(spec, 10), std::out_of_range);
}

TEST_CASE("lr is non-negative for all kinds") {
    const std::vector<ScheduleSpec> specs{
        build_constant(1e-3, 300, 50),
        build_cosine(1e-3, 300, 20, 10.0),
        build_wsd(1e-3, 300, 30, 0.4, 2.0),
        build_piecewise({{0, 1e-4}, {100, 0.0}, {200, 3e-5}}, 300),
    };
    for (const auto& spec : specs)
        for (std::int64_t t = 0; t < spec.t_total; ++t) REQUIRE(lr_at(spec, t) >= 0.0);
}

TEST_CASE("wsd with beta=1 is non-increasing and affine on the decay interval") {
    const auto spec = build_wsd(2e-4, 1000, 100, 0.25, 1.0);
    for (std::int64_t t = spec.t_warmup + 1; t < spec.t_total; ++t)
        REQUIRE(lr_at(spec, t) <= lr_at(spec, t - 1));
    const std::int64_t start = spec.constant_until();
    for (std::int64_t t = start + 2; t < spec.t_total; ++t) {
        const double second_diff = lr_at(spec, t) - 2.0 * lr_at(spec, t - 1) + lr_at(spec, t - 2);
        REQUIRE(std::abs(second_diff) < 1e-12);
    }
}

TEST_CASE("cosine is monotone non-increasing after warmup") {
    const auto spec = build_cosine(1.5e-3, 777, 33, 10.0);
    for (std::int64_t t = spec.t_warmup + 1; t < spec.t_total; ++t)
        REQUIRE(lr_at(spec, t) <= lr_at(spec, t - 1));
}

TEST_CASE("equal specs evaluate bit-for-bit identically") {
    const auto a = build_wsd(2e-4, 500, 50, 0.3, 1.5);
    const auto b = build_wsd(2e-4, 500, 50, 0.3, 1.5);
    REQUIRE(a == b);
    for (std::int64_t t = 0; t < a.t_total; ++t) REQUIRE(lr_at(a, t) == lr_at(b, t));
}

TEST_CASE("schedule json round-trips and rejects unknown fields") {
    const auto wsd = build_wsd(2e-4, 1000, 100, 0.1, 1.0);
    CHECK(schedule_from_json(schedule_to_json(wsd)) == wsd);

    const auto cos = build_cosine(1e-3, 400, 40, 8.0);
    CHECK(schedule_from_json(schedule_to_json(cos)) == cos);

    const auto pw = build_piecewise({{0, 1e-4}, {10, 5e-5}}, 100);
    CHECK(schedule_from_json(schedule_to_json(pw)) == pw);

    auto j = schedule_to_json(wsd);
    CHECK(j.contains("eta_max"));
    CHECK(j.contains("t_total"));
    CHECK(j.contains("annealing_ratio"));
    j["bogus"] = 1;
    CHECK_THROWS_AS(schedule_from_json(j), ParseError);

    nlohmann::json missing{{"kind", "wsd"}, {"eta_max", 1e-3}};
    CHECK_THROWS_AS(schedule_from_json(missing), ParseError);

    // cosine-only field on a wsd object is unknown
    auto cross = schedule_to_json(wsd);
    cross["final_lr_divisor"] = 10.0;
    CHECK_THROWS_AS(schedule_from_json(cross), ParseError);
}
