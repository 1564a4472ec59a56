// SPDX-License-Identifier: Apache-2.0
//
// Shared synthetic fixtures: loss curves generated directly from known law
// coefficients, used as generate-and-refit oracles.

#pragma once

#include <cstdint>
#include <string>

#include "annealab/curve.hpp"
#include "annealab/lawfit.hpp"
#include "annealab/rng.hpp"
#include "annealab/schedule.hpp"
#include "annealab/terms.hpp"

namespace annealab::fixtures {

/// Ground-truth coefficients for the reduced forward-momentum fixture.
inline LawCoefficients reduced_truth() {
    LawCoefficients c;
    c.variant = LawVariant::forward_momentum_reduced;
    c.lambda_s = 2.0;
    c.alpha_s = 0.4;
    c.lambda_m = -0.05;
    c.l0 = 1.8;
    return c;
}

/// Ground-truth coefficients with an active model-size term.
inline LawCoefficients full_truth() {
    LawCoefficients c;
    c.variant = LawVariant::forward_momentum_full;
    c.n_term_active = true;
    c.lambda_s = 2.0;
    c.alpha_s = 0.4;
    c.lambda_n = 4.0e2;
    c.alpha_n = 0.35;
    c.lambda_m = -0.05;
    c.l0 = 1.5;
    return c;
}

/// Evaluate the law along a schedule, optionally with seeded Gaussian noise.
inline LossCurve law_curve(const LawCoefficients& coeffs, const ScheduleSpec& spec, double model_size,
                           const MomentumConfig& momentum, double noise_sigma = 0.0, std::uint64_t seed = 0,
                           const std::string& label = "fixture") {
    LossCurve curve = predict_curve(coeffs, spec, model_size, momentum);
    curve.meta.label = label;
    curve.meta.model_size = model_size;
    curve.meta.seed = seed;
    if (noise_sigma > 0.0)
        for (auto& p : curve.points)
            p.loss += noise_sigma * rng::gaussian(seed, static_cast<std::uint64_t>(p.step), 0);
    return curve;
}

/// Relative coefficient error in percent.
inline double rel_err(double fitted, double truth) { return 100.0 * std::abs(fitted - truth) / std::abs(truth); }

} // namespace annealab::fixtures
