// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "annealab/errors.hpp"
#include "annealab/schedule.hpp"

namespace annealab {

struct CurvePoint {
    std::int64_t step = 0;
    double loss = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct CurveMeta {
    double model_size = 0.0;          // parameter count N; 0 = unset
    std::int64_t batch_size = 0;      // sequences per step
    std::int64_t sequence_length = 0; // tokens per sequence
    std::optional<ScheduleSpec> schedule;
    double max_lr = 0.0;
    std::uint64_t seed = 0;
    std::string label;

    friend bool operator==(const CurveMeta&, const CurveMeta&) = default;
};

/// Ordered (step, loss) series plus run metadata.
struct LossCurve {
    std::vector<CurvePoint> points;
    CurveMeta meta;

    friend bool operator==(const LossCurve&, const LossCurve&) = default;

    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i].loss) || points[i].loss <= 0.0)
                throw DataError("curve '" + meta.label + "': loss at index " + std::to_string(i) +
                                " must be finite and > 0");
            if (i > 0 && points[i].step <= points[i - 1].step)
                throw DataError("curve '" + meta.label + "': steps must be strictly increasing at index " +
                                std::to_string(i));
        }
    }
};

} // namespace annealab
