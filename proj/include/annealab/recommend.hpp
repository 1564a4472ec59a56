// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "annealab/errors.hpp"
#include "annealab/io.hpp"
#include "annealab/lawfit.hpp"
#include "annealab/schedule.hpp"
#include "annealab/terms.hpp"

namespace annealab {

enum class PowerLawX { max_lr, total_steps, loss };
enum class PowerLawY { r_opt_percent, b_opt_tokens };

inline const char* to_string(PowerLawX x) {
    switch (x) {
        case PowerLawX::max_lr: return "max_lr";
        case PowerLawX::total_steps: return "total_steps";
        case PowerLawX::loss: return "loss";
    }
    return "?";
}

inline const char* to_string(PowerLawY y) {
    return y == PowerLawY::r_opt_percent ? "r_opt_percent" : "b_opt_tokens";
}

/// y = lambda_coef * x^alpha_exp. Values quoted in reciprocal form
/// (lambda / x^a) are stored with alpha_exp = -a.
struct PowerLawFit {
    double lambda_coef = 0.0;
    double alpha_exp = 0.0;
    PowerLawX x_kind = PowerLawX::total_steps;
    PowerLawY y_kind = PowerLawY::r_opt_percent;
    double fit_rms_loglog = 0.0;

    double eval(double x) const { return lambda_coef * std::pow(x, alpha_exp); }
};

/// Least squares on (ln x, ln y); exact on noiseless power-law data.
inline PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys,
                                 PowerLawX x_kind = PowerLawX::total_steps,
                                 PowerLawY y_kind = PowerLawY::r_opt_percent) {
    if (xs.size() != ys.size()) throw ValidationError("fit_power_law: length mismatch");
    if (xs.size() < 2) throw ValidationError("fit_power_law: need at least 2 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw DomainError("fit_power_law: values must be strictly positive (index " + std::to_string(i) + ")");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw DomainError("fit_power_law: degenerate x values");
    PowerLawFit fit;
    fit.alpha_exp = (n * sxy - sx * sy) / denom;
    fit.lambda_coef = std::exp((sy - fit.alpha_exp * sx) / n);
    fit.x_kind = x_kind;
    fit.y_kind = y_kind;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = std::log(ys[i]) - (std::log(fit.lambda_coef) + fit.alpha_exp * std::log(xs[i]));
        rss += r * r;
    }
    fit.fit_rms_loglog = std::sqrt(rss / n);
    return fit;
}

struct SweepEntry {
    double annealing_ratio = 0.0;
    double final_loss = 0.0;
    double delta_loss = 0.0;
};

struct SweepContext {
    std::int64_t t_total = 0;
    std::int64_t t_warmup = 0;
    double eta_max = 0.0;
    double model_size = 0.0;
    MomentumConfig momentum;
};

struct RecommendationReport {
    std::vector<SweepEntry> grid;
    double r_opt = 0.0;
    SweepContext context;
    std::string provenance; // "sweep" or "literature:<preset>"

    void write_csv(std::ostream& os) const {
        os << "R,final_loss,delta_loss\n";
        for (const auto& e : grid)
            os << double_to_string(e.annealing_ratio) << ',' << double_to_string(e.final_loss) << ','
               << double_to_string(e.delta_loss) << '\n';
    }
};

/// 20 log-spaced annealing ratios in [0.01, 1.0].
inline std::vector<double> default_r_grid(std::size_t points = 20, double r_min = 0.01, double r_max = 1.0) {
    if (points < 3) throw ValidationError("r grid: need >= 3 points");
    if (!(r_min > 0.0 && r_min < r_max && r_max <= 1.0))
        throw ValidationError("r grid: bounds must satisfy 0 < r_min < r_max <= 1");
    std::vector<double> grid(points);
    const double l0 = std::log10(r_min), l1 = std::log10(r_max);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(points - 1));
    grid.back() = r_max;
    return grid;
}

/// Sweep WSD annealing ratios (beta = 1, shared warmup) under fitted
/// coefficients: for each R evaluate the final-step S and M, apply the law,
/// and report the loss gap to the best ratio. Ties break toward smaller R.
inline RecommendationReport sweep_ratio(const LawCoefficients& coeffs, std::int64_t t_total, double eta_max,
                                        double model_size, std::span<const double> r_grid,
                                        const MomentumConfig& momentum, std::int64_t t_warmup = 0) {
    if (coeffs.variant != LawVariant::forward_momentum_reduced &&
        coeffs.variant != LawVariant::forward_momentum_full)
        throw ValidationError("sweep_ratio: coefficients must be a forward-momentum variant");
    if (r_grid.size() < 3) throw ValidationError("sweep_ratio: r_grid needs >= 3 points");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0 && r_grid[i] <= 1.0))
            throw ValidationError("sweep_ratio: grid value " + std::to_string(r_grid[i]) +
                                  " outside (0, 1] at index " + std::to_string(i));
        if (i > 0 && r_grid[i] <= r_grid[i - 1])
            throw ValidationError("sweep_ratio: grid must be strictly increasing");
    }

    RecommendationReport report;
    report.context = {t_total, t_warmup, eta_max, model_size, momentum};
    report.provenance = "sweep";
    report.grid.reserve(r_grid.size());
    for (double r : r_grid) {
        const ScheduleSpec spec = build_wsd(eta_max, t_total, t_warmup, r, 1.0);
        const TermSeries ts = compute_terms(spec, momentum);
        const double loss = evaluate_law(coeffs, ts.S.back(), model_size, ts.M.back());
        report.grid.push_back({r, loss, 0.0});
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.grid.size(); ++i)
        if (report.grid[i].final_loss < report.grid[best].final_loss) best = i;
    report.r_opt = report.grid[best].annealing_ratio;
    for (auto& e : report.grid) e.delta_loss = e.final_loss - report.grid[best].final_loss;
    report.grid[best].delta_loss = 0.0;
    return report;
}

struct RatioPrediction {
    double ratio = 0.0;
    bool clamped = false;
};

namespace detail {

// The literature fits for R_opt quote values in percent; divide by 100 and
// clamp the extrapolation into (0, 1].
inline RatioPrediction percent_to_ratio(double percent) {
    RatioPrediction p;
    p.ratio = percent / 100.0;
    if (p.ratio > 1.0) {
        p.ratio = 1.0;
        p.clamped = true;
    }
    if (p.ratio <= 0.0) {
        p.ratio = 1e-6;
        p.clamped = true;
    }
    return p;
}

} // namespace detail

/// R_opt from the maximum learning rate via a fitted (or preset) power law.
inline RatioPrediction predict_r_opt_from_lr(double eta_max, const PowerLawFit& fit) {
    if (!(eta_max > 0.0)) throw DomainError("predict_r_opt_from_lr: eta_max must be > 0");
    return detail::percent_to_ratio(fit.eval(eta_max));
}

/// R_opt from the total training steps via a fitted (or preset) power law.
inline RatioPrediction predict_r_opt_from_steps(std::int64_t t_total, const PowerLawFit& fit) {
    if (t_total < 1) throw DomainError("predict_r_opt_from_steps: T must be >= 1");
    return detail::percent_to_ratio(fit.eval(static_cast<double>(t_total)));
}

/// Optimal batch size in tokens for a target loss.
inline double predict_b_opt_tokens(double loss, const PowerLawFit& fit) {
    if (!(loss > 0.0)) throw DomainError("predict_b_opt_tokens: loss must be > 0");
    return fit.eval(loss);
}

/// Token prediction converted to sequences of the given length.
inline double predict_b_opt_sequences(double loss, const PowerLawFit& fit, std::int64_t sequence_length) {
    if (sequence_length < 1) throw ValidationError("predict_b_opt_sequences: sequence_length must be >= 1");
    return predict_b_opt_tokens(loss, fit) / static_cast<double>(sequence_length);
}

/// Versioned literature coefficient presets. These are published fits, not
/// values computed by this library; every report carries the provenance
/// label so they are never mistaken for local fits.
struct Preset {
    std::string name;
    std::optional<PowerLawFit> r_opt_vs_lr;
    std::optional<PowerLawFit> r_opt_vs_steps;
    std::optional<PowerLawFit> b_opt_vs_loss;
};

inline const std::map<std::string, Preset>& preset_table() {
    static const std::map<std::string, Preset> table = [] {
        std::map<std::string, Preset> t;
        Preset dense;
        dense.name = "dense-v1";
        dense.r_opt_vs_lr = PowerLawFit{5.996e3, 0.709, PowerLawX::max_lr, PowerLawY::r_opt_percent, 0.0};
        dense.b_opt_vs_loss = PowerLawFit{2.711e7, -2.710, PowerLawX::loss, PowerLawY::b_opt_tokens, 0.0};
        t[dense.name] = dense;
        Preset moe;
        moe.name = "moe-v1";
        moe.r_opt_vs_lr = PowerLawFit{4.675e4, 1.056, PowerLawX::max_lr, PowerLawY::r_opt_percent, 0.0};
        moe.b_opt_vs_loss = PowerLawFit{4.390e7, -3.430, PowerLawX::loss, PowerLawY::b_opt_tokens, 0.0};
        t[moe.name] = moe;
        Preset moe_steps;
        moe_steps.name = "moe1b-steps-v1";
        moe_steps.r_opt_vs_steps =
            PowerLawFit{5.987e5, -0.946, PowerLawX::total_steps, PowerLawY::r_opt_percent, 0.0};
        t[moe_steps.name] = moe_steps;
        return t;
    }();
    return table;
}

inline const Preset& preset(const std::string& name) {
    const auto& table = preset_table();
    auto it = table.find(name);
    if (it == table.end()) {
        std::string names;
        for (const auto& [k, v] : table) {
            (void)v;
            names += names.empty() ? k : ", " + k;
        }
        throw ValidationError("unknown preset '" + name + "' (available: " + names + ")");
    }
    return it->second;
}

// --- JSON ----------------------------------------------------------------

inline nlohmann::json power_law_to_json(const PowerLawFit& f) {
    return {{"lambda_coef", f.lambda_coef},
            {"alpha_exp", f.alpha_exp},
            {"x_kind", to_string(f.x_kind)},
            {"y_kind", to_string(f.y_kind)},
            {"fit_rms_loglog", f.fit_rms_loglog}};
}

inline nlohmann::json recommendation_to_json(const RecommendationReport& r) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& e : r.grid)
        grid.push_back({{"annealing_ratio", e.annealing_ratio},
                        {"final_loss", e.final_loss},
                        {"delta_loss", e.delta_loss}});
    return {{"grid", grid},
            {"r_opt", r.r_opt},
            {"context",
             {{"t_total", r.context.t_total},
              {"t_warmup", r.context.t_warmup},
              {"eta_max", r.context.eta_max},
              {"model_size", r.context.model_size},
              {"momentum", momentum_to_json(r.context.momentum)}}},
            {"provenance", r.provenance}};
}

} // namespace annealab
