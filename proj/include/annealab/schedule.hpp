// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "annealab/errors.hpp"

namespace annealab {

enum class ScheduleKind { constant, cosine, wsd, piecewise };

inline const char* to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::constant: return "constant";
        case ScheduleKind::cosine: return "cosine";
        case ScheduleKind::wsd: return "wsd";
        case ScheduleKind::piecewise: return "piecewise";
    }
    return "?";
}

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "constant") return ScheduleKind::constant;
    if (s == "cosine") return ScheduleKind::cosine;
    if (s == "wsd") return ScheduleKind::wsd;
    if (s == "piecewise") return ScheduleKind::piecewise;
    throw ValidationError("unknown schedule kind '" + s + "'");
}

struct Breakpoint {
    std::int64_t step = 0;
    double lr = 0.0;

    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

/// Full description of a learning-rate schedule, evaluated at integer steps
/// on left-closed intervals: the value at step t is the lr applied during
/// update t+1.
struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::constant;
    double eta_max = 0.0;
    std::int64_t t_total = 0;
    std::int64_t t_warmup = 0;
    double annealing_ratio = 0.0;   // wsd only, R in (0,1]
    double decay_exponent = 1.0;    // wsd only, beta >= 1
    double final_lr_divisor = 10.0; // cosine only
    std::vector<Breakpoint> breakpoints; // piecewise only

    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;

    /// T_decay = round(R * T_total), ties rounding half-up.
    std::int64_t decay_steps() const {
        return static_cast<std::int64_t>(std::floor(annealing_ratio * static_cast<double>(t_total) + 0.5));
    }

    /// Absolute step index where the wsd decay branch begins.
    std::int64_t constant_until() const { return t_total - decay_steps(); }

    void validate() const;
};

inline void ScheduleSpec::validate() const {
    if (t_total <= 0)
        throw ValidationError("schedule: t_total (" + std::to_string(t_total) + ") must be > 0");
    if (t_warmup < 0 || t_warmup >= t_total)
        throw ValidationError("schedule: t_warmup (" + std::to_string(t_warmup) +
                              ") must satisfy 0 <= t_warmup < t_total (" + std::to_string(t_total) + ")");
    if (kind != ScheduleKind::piecewise && !(eta_max > 0.0))
        throw ValidationError("schedule: eta_max (" + std::to_string(eta_max) + ") must be > 0");
    switch (kind) {
        case ScheduleKind::constant:
            break;
        case ScheduleKind::cosine:
            if (!(final_lr_divisor >= 1.0))
                throw ValidationError("cosine: final_lr_divisor (" + std::to_string(final_lr_divisor) +
                                      ") must be >= 1");
            break;
        case ScheduleKind::wsd: {
            if (!(annealing_ratio > 0.0 && annealing_ratio <= 1.0))
                throw ValidationError("wsd: annealing_ratio (" + std::to_string(annealing_ratio) +
                                      ") must lie in (0, 1]");
            if (!(decay_exponent >= 1.0))
                throw ValidationError("wsd: decay_exponent (" + std::to_string(decay_exponent) +
                                      ") must be >= 1");
            const std::int64_t t_constant = constant_until();
            if (decay_steps() < 1)
                throw ValidationError("wsd: t_decay = round(R * t_total) must be >= 1");
            if (t_warmup > t_constant)
                throw ValidationError("wsd: t_warmup (" + std::to_string(t_warmup) +
                                      ") must be <= t_constant (" + std::to_string(t_constant) + ")");
            break;
        }
        case ScheduleKind::piecewise: {
            if (breakpoints.empty())
                throw ValidationError("piecewise: breakpoints must be non-empty");
            if (breakpoints.front().step != 0)
                throw ValidationError("piecewise: first breakpoint step (" +
                                      std::to_string(breakpoints.front().step) + ") must be 0");
            for (std::size_t i = 0; i < breakpoints.size(); ++i) {
                if (i > 0 && breakpoints[i].step <= breakpoints[i - 1].step)
                    throw ValidationError("piecewise: breakpoint steps must be strictly increasing at index " +
                                          std::to_string(i));
                if (!(breakpoints[i].lr >= 0.0) || !std::isfinite(breakpoints[i].lr))
                    throw ValidationError("piecewise: lr at index " + std::to_string(i) +
                                          " must be finite and >= 0");
                if (breakpoints[i].step >= t_total)
                    throw ValidationError("piecewise: breakpoint step (" + std::to_string(breakpoints[i].step) +
                                          ") must be < t_total (" + std::to_string(t_total) + ")");
            }
            if (!(eta_max > 0.0))
                throw ValidationError("piecewise: eta_max (max breakpoint lr) must be > 0");
            break;
        }
    }
}

inline ScheduleSpec build_constant(double eta_max, std::int64_t t_total, std::int64_t t_warmup = 0) {
    ScheduleSpec s;
    s.kind = ScheduleKind::constant;
    s.eta_max = eta_max;
    s.t_total = t_total;
    s.t_warmup = t_warmup;
    s.validate();
    return s;
}

inline ScheduleSpec build_cosine(double eta_max, std::int64_t t_total, std::int64_t t_warmup,
                                 double final_lr_divisor = 10.0) {
    ScheduleSpec s;
    s.kind = ScheduleKind::cosine;
    s.eta_max = eta_max;
    s.t_total = t_total;
    s.t_warmup = t_warmup;
    s.final_lr_divisor = final_lr_divisor;
    s.validate();
    return s;
}

/// Warmup-stable-decay: linear ramp on [0, t_warmup), flat eta_max on
/// [t_warmup, t_constant), then eta_max * (1 - (t - t_constant)/t_decay)^beta.
inline ScheduleSpec build_wsd(double eta_max, std::int64_t t_total, std::int64_t t_warmup, double annealing_ratio,
                              double decay_exponent = 1.0) {
    ScheduleSpec s;
    s.kind = ScheduleKind::wsd;
    s.eta_max = eta_max;
    s.t_total = t_total;
    s.t_warmup = t_warmup;
    s.annealing_ratio = annealing_ratio;
    s.decay_exponent = decay_exponent;
    s.validate();
    return s;
}

inline ScheduleSpec build_piecewise(std::vector<Breakpoint> breakpoints, std::int64_t t_total) {
    ScheduleSpec s;
    s.kind = ScheduleKind::piecewise;
    s.t_total = t_total;
    s.breakpoints = std::move(breakpoints);
    for (const auto& bp : s.breakpoints) s.eta_max = std::max(s.eta_max, bp.lr);
    s.validate();
    return s;
}

/// Learning rate applied at integer step t. Pure; throws std::out_of_range
/// unless 0 <= t < t_total.
inline double lr_at(const ScheduleSpec& spec, std::int64_t t) {
    if (t < 0 || t >= spec.t_total)
        throw std::out_of_range("lr_at: step " + std::to_string(t) + " outside [0, " +
                                std::to_string(spec.t_total) + ")");
    if (spec.kind != ScheduleKind::piecewise && t < spec.t_warmup)
        return spec.eta_max * static_cast<double>(t) / static_cast<double>(spec.t_warmup);
    switch (spec.kind) {
        case ScheduleKind::constant:
            return spec.eta_max;
        case ScheduleKind::cosine: {
            const double span = static_cast<double>(spec.t_total - spec.t_warmup);
            const double progress = static_cast<double>(t - spec.t_warmup) / span;
            const double eta_min = spec.eta_max / spec.final_lr_divisor;
            // Written as a decrement from eta_max so lr_at(t_warmup) == eta_max exactly.
            return spec.eta_max - 0.5 * (spec.eta_max - eta_min) * (1.0 - std::cos(std::numbers::pi * progress));
        }
        case ScheduleKind::wsd: {
            const std::int64_t t_constant = spec.constant_until();
            if (t < t_constant) return spec.eta_max;
            // Boundary step t_constant belongs to the decay branch: (1 - 0)^beta * eta_max.
            const double frac = 1.0 - static_cast<double>(t - t_constant) / static_cast<double>(spec.decay_steps());
            if (spec.decay_exponent == 1.0) return spec.eta_max * frac;
            return spec.eta_max * std::pow(frac, spec.decay_exponent);
        }
        case ScheduleKind::piecewise: {
            // Step function, left-closed: value of the last breakpoint with step <= t.
            auto it = std::upper_bound(spec.breakpoints.begin(), spec.breakpoints.end(), t,
                                       [](std::int64_t v, const Breakpoint& b) { return v < b.step; });
            return std::prev(it)->lr;
        }
    }
    return 0.0; // unreachable
}

// --- JSON (snake_case field names; unknown fields rejected) -----------------

inline nlohmann::json schedule_to_json(const ScheduleSpec& spec) {
    nlohmann::json j{{"kind", to_string(spec.kind)},
                     {"eta_max", spec.eta_max},
                     {"t_total", spec.t_total},
                     {"t_warmup", spec.t_warmup}};
    switch (spec.kind) {
        case ScheduleKind::constant: break;
        case ScheduleKind::cosine:
            j["final_lr_divisor"] = spec.final_lr_divisor;
            break;
        case ScheduleKind::wsd:
            j["annealing_ratio"] = spec.annealing_ratio;
            j["decay_exponent"] = spec.decay_exponent;
            break;
        case ScheduleKind::piecewise: {
            nlohmann::json bps = nlohmann::json::array();
            for (const auto& bp : spec.breakpoints) bps.push_back({{"step", bp.step}, {"lr", bp.lr}});
            j["breakpoints"] = std::move(bps);
            j.erase("eta_max"); // derived from breakpoints
            break;
        }
    }
    return j;
}

inline ScheduleSpec schedule_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("schedule: expected a JSON object");
    if (!j.contains("kind")) throw ParseError("schedule: missing field 'kind'");
    ScheduleSpec spec;
    spec.kind = schedule_kind_from_string(j.at("kind").get<std::string>());

    std::vector<std::string> allowed{"kind", "t_total", "t_warmup"};
    if (spec.kind != ScheduleKind::piecewise) allowed.push_back("eta_max");
    if (spec.kind == ScheduleKind::cosine) allowed.push_back("final_lr_divisor");
    if (spec.kind == ScheduleKind::wsd) {
        allowed.push_back("annealing_ratio");
        allowed.push_back("decay_exponent");
    }
    if (spec.kind == ScheduleKind::piecewise) allowed.push_back("breakpoints");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError("schedule: unknown field '" + key + "' for kind '" + to_string(spec.kind) + "'");
    }

    auto require = [&](const char* name) -> const nlohmann::json& {
        if (!j.contains(name)) throw ParseError(std::string("schedule: missing field '") + name + "'");
        return j.at(name);
    };
    try {
        spec.t_total = require("t_total").get<std::int64_t>();
        spec.t_warmup = j.value("t_warmup", std::int64_t{0});
        switch (spec.kind) {
            case ScheduleKind::constant:
                spec.eta_max = require("eta_max").get<double>();
                break;
            case ScheduleKind::cosine:
                spec.eta_max = require("eta_max").get<double>();
                spec.final_lr_divisor = j.value("final_lr_divisor", 10.0);
                break;
            case ScheduleKind::wsd:
                spec.eta_max = require("eta_max").get<double>();
                spec.annealing_ratio = require("annealing_ratio").get<double>();
                spec.decay_exponent = j.value("decay_exponent", 1.0);
                break;
            case ScheduleKind::piecewise:
                for (const auto& bj : require("breakpoints")) {
                    for (const auto& [key, value] : bj.items()) {
                        (void)value;
                        if (key != "step" && key != "lr")
                            throw ParseError("schedule: unknown breakpoint field '" + key + "'");
                    }
                    Breakpoint bp;
                    bp.step = bj.at("step").get<std::int64_t>();
                    bp.lr = bj.at("lr").get<double>();
                    spec.breakpoints.push_back(bp);
                    spec.eta_max = std::max(spec.eta_max, bp.lr);
                }
                break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schedule: ") + e.what());
    }
    spec.validate();
    return spec;
}

} // namespace annealab
