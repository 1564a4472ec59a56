// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "annealab/curve.hpp"
#include "annealab/errors.hpp"
#include "annealab/optim.hpp"
#include "annealab/parallel.hpp"
#include "annealab/schedule.hpp"
#include "annealab/terms.hpp"

namespace annealab {

enum class LawVariant { token_law, step_law, forward_momentum_reduced, forward_momentum_full };

inline const char* to_string(LawVariant v) {
    switch (v) {
        case LawVariant::token_law: return "token_law";
        case LawVariant::step_law: return "step_law";
        case LawVariant::forward_momentum_reduced: return "forward_momentum_reduced";
        case LawVariant::forward_momentum_full: return "forward_momentum_full";
    }
    return "?";
}

inline LawVariant law_variant_from_string(const std::string& s) {
    if (s == "token_law") return LawVariant::token_law;
    if (s == "step_law") return LawVariant::step_law;
    if (s == "forward_momentum_reduced") return LawVariant::forward_momentum_reduced;
    if (s == "forward_momentum_full") return LawVariant::forward_momentum_full;
    throw ValidationError("unknown law variant '" + s + "'");
}

/// Fitted parameters of one law variant. Forward-momentum variants use
/// lambda_s/alpha_s/lambda_m/l0 (plus lambda_n/alpha_n when the model-size
/// term is active); the baselines use lambda_d/alpha_d or lambda_t/alpha_t
/// plus sigma.
struct LawCoefficients {
    LawVariant variant = LawVariant::forward_momentum_reduced;
    double lambda_s = 0.0;
    double alpha_s = 0.0;
    double lambda_n = 0.0;
    double alpha_n = 0.0;
    double lambda_m = 0.0;
    double l0 = 0.0;
    double lambda_d = 0.0;
    double alpha_d = 0.0;
    double lambda_t = 0.0;
    double alpha_t = 0.0;
    double sigma = 0.0;
    bool n_term_active = false;

    friend bool operator==(const LawCoefficients&, const LawCoefficients&) = default;
};

/// Pure evaluation of one law variant. `progress` carries S for the
/// forward-momentum variants, D for the token law and T for the step law;
/// `m_term` is ignored by the baselines.
inline double evaluate_law(const LawCoefficients& c, double progress, double n_params, double m_term) {
    if (!(progress > 0.0))
        throw DomainError("evaluate_law: progress term (" + std::to_string(progress) + ") must be > 0");
    double n_contrib = 0.0;
    if (c.n_term_active) {
        if (!(n_params > 0.0)) throw DomainError("evaluate_law: model size must be > 0");
        n_contrib = c.lambda_n * std::pow(n_params, -c.alpha_n);
    }
    switch (c.variant) {
        case LawVariant::token_law:
            return n_contrib + c.lambda_d * std::pow(progress, -c.alpha_d) + c.sigma;
        case LawVariant::step_law:
            return n_contrib + c.lambda_t * std::pow(progress, -c.alpha_t) + c.sigma;
        case LawVariant::forward_momentum_reduced:
        case LawVariant::forward_momentum_full:
            return c.lambda_s * std::pow(progress, -c.alpha_s) + n_contrib + c.lambda_m * m_term + c.l0;
    }
    return 0.0; // unreachable
}

/// Trailing moving average; the first (window - 1) points average over the
/// available prefix. Step indices are unchanged.
inline LossCurve smooth_curve(const LossCurve& curve, std::int64_t window = 50) {
    if (curve.points.empty()) throw DataError("smooth_curve: empty curve");
    if (window < 1) throw ValidationError("smooth_curve: window must be >= 1");
    LossCurve out = curve;
    if (window == 1) return out;
    double running = 0.0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        running += curve.points[i].loss;
        if (i >= static_cast<std::size_t>(window)) running -= curve.points[i - static_cast<std::size_t>(window)].loss;
        const auto count = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
        out.points[i].loss = running / static_cast<double>(count);
    }
    return out;
}

/// 100 * mean(|pred - obs| / obs).
inline double mape(std::span<const double> predicted, std::span<const double> observed) {
    if (predicted.size() != observed.size())
        throw ValidationError("mape: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                              std::to_string(observed.size()) + ")");
    if (predicted.empty()) throw ValidationError("mape: empty series");
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (!(observed[i] > 0.0)) throw DomainError("mape: observed value at index " + std::to_string(i) +
                                                    " must be > 0");
        acc += std::abs(predicted[i] - observed[i]) / observed[i];
    }
    return 100.0 * acc / static_cast<double>(predicted.size());
}

/// Huber penalty: quadratic below delta, linear above.
inline double huber(double r, double delta) {
    const double a = std::abs(r);
    return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

struct FitConfig {
    double huber_delta = 1e-3;
    int max_iterations = 1000;
    bool warmup_exclusion = true;
    std::int64_t smoothing_window = 1;
    MomentumConfig momentum;
    int threads = 0; // 0 = library default (ANNEAL_LAB_THREADS / hardware)

    friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct ResidualStats {
    double mean = 0.0;
    double stddev = 0.0;
    double max_abs = 0.0;
};

struct OptimizerTrace {
    int iterations = 0;
    bool converged = false;
    double final_objective = 0.0;
    double final_gradient_norm = 0.0;
    std::vector<double> objective_history; // in-memory only; not serialized
};

struct CurveMape {
    std::string label;
    double mape_percent = 0.0;
};

struct FitReport {
    LawCoefficients coefficients;
    std::vector<CurveMape> mape_per_curve;
    double mape_mean_percent = 0.0;
    ResidualStats residual_stats;
    OptimizerTrace trace;
    FitConfig config;
    bool n_term_folded = false;
};

namespace detail {

struct FitPoint {
    double log_x;   // ln S, ln D or ln T
    double m_term;  // 0 for baselines
    double obs;
    std::size_t curve;
};

struct FitData {
    std::vector<FitPoint> points;           // grouped by curve, step order within
    std::vector<double> log_n;              // per curve, 0 when inactive
    std::vector<std::size_t> curve_offsets; // points index where each curve starts
    std::vector<std::size_t> curve_counts;
    bool n_active = false;
};

// Progress variable x and retention filter for one curve point.
inline std::optional<double> progress_value(LawVariant variant, const LossCurve& curve,
                                            const std::vector<double>& s_series, std::int64_t step) {
    switch (variant) {
        case LawVariant::token_law: {
            const double d = static_cast<double>(step) * static_cast<double>(curve.meta.batch_size) *
                             static_cast<double>(curve.meta.sequence_length);
            if (!(d > 0.0)) return std::nullopt;
            return d;
        }
        case LawVariant::step_law: {
            if (step <= 0) return std::nullopt;
            return static_cast<double>(step);
        }
        default: {
            if (step < 0 || static_cast<std::size_t>(step) >= s_series.size()) return std::nullopt;
            const double s = s_series[static_cast<std::size_t>(step)];
            if (!(s > 0.0)) return std::nullopt;
            return s;
        }
    }
}

// Parameter vector layouts. Positive scale coefficients live in log space,
// exponents are box-constrained to (0, 2], lambda_m is effectively free.
struct ParamLayout {
    bool momentum_law = false;
    bool n_active = false;
    std::size_t size() const {
        return momentum_law ? (n_active ? 6u : 4u) : (n_active ? 5u : 3u);
    }
    // momentum law: [ln lambda_x, alpha_x, lambda_m, l0, (ln lambda_n, alpha_n)]
    // baseline:     [ln lambda_x, alpha_x, sigma,        (ln lambda_n, alpha_n)]
};

inline double objective_eval(const FitData& data, const ParamLayout& lay, double delta,
                             const std::vector<double>& p) {
    const double ln_lambda_x = p[0];
    const double alpha_x = p[1];
    const double lambda_m = lay.momentum_law ? p[2] : 0.0;
    const double offset = lay.momentum_law ? p[3] : p[2];
    const std::size_t nbase = lay.momentum_law ? 4 : 3;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < data.curve_offsets.size(); ++c) {
        double n_contrib = 0.0;
        if (lay.n_active) n_contrib = std::exp(p[nbase] - p[nbase + 1] * data.log_n[c]);
        double curve_sum = 0.0;
        const std::size_t begin = data.curve_offsets[c];
        const std::size_t end = begin + data.curve_counts[c];
        for (std::size_t i = begin; i < end; ++i) {
            const FitPoint& pt = data.points[i];
            const double pred = std::exp(ln_lambda_x - alpha_x * pt.log_x) + lambda_m * pt.m_term + offset +
                                n_contrib;
            curve_sum += huber(pred - pt.obs, delta);
        }
        total += curve_sum;
        count += data.curve_counts[c];
    }
    return total / static_cast<double>(count);
}

inline LawCoefficients params_to_coefficients(LawVariant variant, const ParamLayout& lay,
                                              const std::vector<double>& p) {
    LawCoefficients c;
    c.variant = variant;
    c.n_term_active = lay.n_active;
    const std::size_t nbase = lay.momentum_law ? 4 : 3;
    if (lay.momentum_law) {
        c.lambda_s = std::exp(p[0]);
        c.alpha_s = p[1];
        c.lambda_m = p[2];
        c.l0 = p[3];
    } else if (variant == LawVariant::token_law) {
        c.lambda_d = std::exp(p[0]);
        c.alpha_d = p[1];
        c.sigma = p[2];
    } else {
        c.lambda_t = std::exp(p[0]);
        c.alpha_t = p[1];
        c.sigma = p[2];
    }
    if (lay.n_active) {
        c.lambda_n = std::exp(p[nbase]);
        c.alpha_n = p[nbase + 1];
    }
    return c;
}

// Canonical curve ordering so that fit results are invariant under input
// permutation: compare by metadata, then by the raw points.
inline bool curve_less(const LossCurve& a, const LossCurve& b) {
    auto key = [](const LossCurve& c) {
        return std::tuple(c.meta.label, c.meta.model_size, c.meta.batch_size, c.meta.sequence_length,
                          c.meta.max_lr, c.meta.seed, c.points.size());
    };
    const auto ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].step != b.points[i].step) return a.points[i].step < b.points[i].step;
        if (a.points[i].loss != b.points[i].loss) return a.points[i].loss < b.points[i].loss;
    }
    return false;
}

} // namespace detail

/// Fit law coefficients to one or more loss curves: smoothing, warmup
/// exclusion, then robust Huber regression over a fixed multistart grid with
/// a bounded quasi-Newton minimizer (numerical central-difference gradients).
/// Deterministic given config and inputs; non-convergence is reported via
/// trace.converged = false, not an exception.
inline FitReport fit(const std::vector<LossCurve>& curves, LawVariant variant, const FitConfig& config = {}) {
    if (curves.empty()) throw ValidationError("fit: need at least one curve");
    config.momentum.validate();
    if (config.smoothing_window < 1) throw ValidationError("fit: smoothing_window must be >= 1");

    const bool momentum_law =
        variant == LawVariant::forward_momentum_reduced || variant == LawVariant::forward_momentum_full;

    // Canonical order for permutation invariance.
    std::vector<const LossCurve*> ordered;
    ordered.reserve(curves.size());
    for (const auto& c : curves) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(),
              [](const LossCurve* a, const LossCurve* b) { return detail::curve_less(*a, *b); });

    // Distinct model sizes decide whether the N term is identifiable.
    std::vector<double> distinct_n;
    for (const auto* c : ordered) {
        if (c->meta.model_size > 0.0 &&
            std::find(distinct_n.begin(), distinct_n.end(), c->meta.model_size) == distinct_n.end())
            distinct_n.push_back(c->meta.model_size);
    }
    const bool want_n = variant == LawVariant::forward_momentum_full || variant == LawVariant::token_law ||
                        variant == LawVariant::step_law;
    const bool n_active = want_n && distinct_n.size() >= 2;
    const bool n_folded = want_n && !n_active;

    detail::FitData data;
    data.n_active = n_active;
    std::vector<LossCurve> prepared; // smoothed + retained, kept for MAPE
    prepared.reserve(ordered.size());

    for (const auto* cp : ordered) {
        const LossCurve& raw = *cp;
        raw.validate();
        for (const auto& pt : raw.points)
            if (!std::isfinite(pt.loss))
                throw DataError("fit: non-finite loss in curve '" + raw.meta.label + "'");
        if (momentum_law && !raw.meta.schedule)
            throw ValidationError("fit: curve '" + raw.meta.label + "' lacks a schedule (required for " +
                                  std::string(to_string(variant)) + ")");
        if (variant == LawVariant::token_law &&
            (raw.meta.batch_size <= 0 || raw.meta.sequence_length <= 0))
            throw ValidationError("fit: curve '" + raw.meta.label +
                                  "' lacks batch_size/sequence_length (required for token_law)");
        if (n_active && !(raw.meta.model_size > 0.0))
            throw ValidationError("fit: curve '" + raw.meta.label + "' lacks model_size");

        LossCurve work = config.smoothing_window > 1 ? smooth_curve(raw, config.smoothing_window) : raw;

        std::vector<double> s_series, m_series;
        if (momentum_law) {
            TermSeries ts = compute_terms(*work.meta.schedule, config.momentum);
            s_series = std::move(ts.S);
            m_series = std::move(ts.M);
        }
        const std::int64_t warmup_cut =
            (config.warmup_exclusion && work.meta.schedule) ? work.meta.schedule->t_warmup : 0;

        LossCurve retained;
        retained.meta = work.meta;
        const std::size_t curve_index = prepared.size();
        data.curve_offsets.push_back(data.points.size());
        for (const auto& pt : work.points) {
            if (pt.step < warmup_cut) continue;
            const auto x = detail::progress_value(variant, work, s_series, pt.step);
            if (!x) continue;
            detail::FitPoint fp;
            fp.log_x = std::log(*x);
            fp.m_term = momentum_law ? m_series[static_cast<std::size_t>(pt.step)] : 0.0;
            fp.obs = pt.loss;
            fp.curve = curve_index;
            data.points.push_back(fp);
            retained.points.push_back(pt);
        }
        data.curve_counts.push_back(data.points.size() - data.curve_offsets.back());
        data.log_n.push_back(raw.meta.model_size > 0.0 ? std::log(raw.meta.model_size) : 0.0);
        prepared.push_back(std::move(retained));
    }
    if (data.points.empty()) throw ValidationError("fit: no points retained (check warmup exclusion and steps)");
    for (std::size_t c = 0; c < data.curve_counts.size(); ++c)
        if (data.curve_counts[c] == 0)
            throw ValidationError("fit: curve '" + prepared[c].meta.label + "' has no retained points");

    // Pooled statistics drive the fixed multistart seed grid (no RNG).
    std::vector<double> obs_sorted, logx_sorted;
    obs_sorted.reserve(data.points.size());
    logx_sorted.reserve(data.points.size());
    for (const auto& pt : data.points) {
        obs_sorted.push_back(pt.obs);
        logx_sorted.push_back(pt.log_x);
    }
    std::sort(obs_sorted.begin(), obs_sorted.end());
    std::sort(logx_sorted.begin(), logx_sorted.end());
    const double obs_min = obs_sorted.front();
    const double obs_med = obs_sorted[obs_sorted.size() / 2];
    const double logx_med = logx_sorted[logx_sorted.size() / 2];

    detail::ParamLayout lay{momentum_law, n_active};
    const double ln_lo = std::log(1e-20), ln_hi = std::log(1e20);
    BoxBounds bounds;
    bounds.lower = {ln_lo, 1e-6};
    bounds.upper = {ln_hi, 2.0};
    if (momentum_law) {
        bounds.lower.push_back(-1e6);
        bounds.upper.push_back(1e6);
    }
    bounds.lower.push_back(0.0);
    bounds.upper.push_back(1e6);
    if (n_active) {
        bounds.lower.insert(bounds.lower.end(), {ln_lo, 1e-6});
        bounds.upper.insert(bounds.upper.end(), {ln_hi, 2.0});
    }

    // Seed for the model-size term from the spread between the smallest- and
    // largest-N curves.
    double ln_lambda_n_seed = 0.0;
    const double alpha_n_seed = 0.3;
    if (n_active) {
        std::size_t c_min = 0, c_max = 0;
        for (std::size_t c = 1; c < data.log_n.size(); ++c) {
            if (data.log_n[c] < data.log_n[c_min]) c_min = c;
            if (data.log_n[c] > data.log_n[c_max]) c_max = c;
        }
        auto curve_mean_obs = [&](std::size_t c) {
            double s = 0.0;
            for (std::size_t i = data.curve_offsets[c]; i < data.curve_offsets[c] + data.curve_counts[c]; ++i)
                s += data.points[i].obs;
            return s / static_cast<double>(data.curve_counts[c]);
        };
        const double spread = std::max(curve_mean_obs(c_min) - curve_mean_obs(c_max), 1e-3);
        const double denom =
            std::exp(-alpha_n_seed * data.log_n[c_min]) - std::exp(-alpha_n_seed * data.log_n[c_max]);
        ln_lambda_n_seed = denom > 1e-300 ? std::log(spread / denom) : 0.0;
    }

    const double alpha_seeds[3] = {0.3, 0.7, 1.3};
    const double l0_fracs[3] = {0.0, 0.5, 0.95};
    const double scale_factors[3] = {0.5, 1.0, 2.0};
    std::vector<std::vector<double>> starts;
    for (double alpha0 : alpha_seeds) {
        for (double frac : l0_fracs) {
            for (double factor : scale_factors) {
                const double offset0 = frac * obs_min;
                const double ampl = std::max(obs_med - offset0, 1e-3);
                std::vector<double> p;
                p.push_back(std::log(factor * ampl) + alpha0 * logx_med);
                p.push_back(alpha0);
                if (momentum_law) p.push_back(0.0);
                p.push_back(offset0);
                if (n_active) {
                    p.push_back(ln_lambda_n_seed);
                    p.push_back(alpha_n_seed);
                }
                starts.push_back(std::move(p));
            }
        }
    }

    auto objective = [&](const std::vector<double>& p) {
        return detail::objective_eval(data, lay, config.huber_delta, p);
    };
    OptimOptions opt_opts;
    opt_opts.max_iterations = config.max_iterations;

    std::vector<OptimResult> results(starts.size());
    parallel_for_indexed(starts.size(), config.threads, [&](std::size_t i) {
        results[i] = minimize_bounded(objective, starts[i], bounds, opt_opts);
    });

    // Best final objective wins; ties break toward the first grid index.
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].objective < results[best].objective) best = i;
    const OptimResult& win = results[best];

    FitReport report;
    report.coefficients = detail::params_to_coefficients(variant, lay, win.x);
    report.trace.iterations = win.iterations;
    report.trace.converged = win.converged;
    report.trace.final_objective = win.objective;
    report.trace.final_gradient_norm = win.projected_grad_norm;
    report.trace.objective_history = win.objective_history;
    report.config = config;
    report.n_term_folded = n_folded;

    // In-sample diagnostics on the retained (possibly smoothed) points.
    double res_sum = 0.0, res_sq = 0.0, res_max = 0.0;
    for (std::size_t c = 0; c < prepared.size(); ++c) {
        double acc = 0.0;
        for (std::size_t i = data.curve_offsets[c]; i < data.curve_offsets[c] + data.curve_counts[c]; ++i) {
            const detail::FitPoint& pt = data.points[i];
            double pred;
            if (momentum_law) {
                pred = report.coefficients.lambda_s * std::exp(-report.coefficients.alpha_s * pt.log_x) +
                       report.coefficients.lambda_m * pt.m_term + report.coefficients.l0;
            } else if (variant == LawVariant::token_law) {
                pred = report.coefficients.lambda_d * std::exp(-report.coefficients.alpha_d * pt.log_x) +
                       report.coefficients.sigma;
            } else {
                pred = report.coefficients.lambda_t * std::exp(-report.coefficients.alpha_t * pt.log_x) +
                       report.coefficients.sigma;
            }
            if (n_active)
                pred += report.coefficients.lambda_n * std::exp(-report.coefficients.alpha_n * data.log_n[c]);
            const double r = pred - pt.obs;
            res_sum += r;
            res_sq += r * r;
            res_max = std::max(res_max, std::abs(r));
            acc += std::abs(r) / pt.obs;
        }
        report.mape_per_curve.push_back(
            {prepared[c].meta.label, 100.0 * acc / static_cast<double>(data.curve_counts[c])});
    }
    const double npts = static_cast<double>(data.points.size());
    report.residual_stats.mean = res_sum / npts;
    report.residual_stats.stddev = std::sqrt(std::max(0.0, res_sq / npts - report.residual_stats.mean * report.residual_stats.mean));
    report.residual_stats.max_abs = res_max;
    double mape_acc = 0.0;
    for (const auto& cm : report.mape_per_curve) mape_acc += cm.mape_percent;
    report.mape_mean_percent = mape_acc / static_cast<double>(report.mape_per_curve.size());
    return report;
}

/// Per-step loss prediction for a schedule: composes forward_series and the
/// momentum series with evaluate_law. Steps whose S is not yet positive
/// (leading warmup zeros) are skipped. Baseline variants use the step index
/// (step_law) or step * batch * seq_len (token_law via batch/seq arguments).
inline LossCurve predict_curve(const LawCoefficients& coeffs, const ScheduleSpec& spec, double n_params,
                               const MomentumConfig& momentum, std::int64_t batch_size = 0,
                               std::int64_t sequence_length = 0) {
    spec.validate();
    const bool momentum_law = coeffs.variant == LawVariant::forward_momentum_reduced ||
                              coeffs.variant == LawVariant::forward_momentum_full;
    if (coeffs.variant == LawVariant::token_law && (batch_size <= 0 || sequence_length <= 0))
        throw ValidationError("predict_curve: token_law needs batch_size and sequence_length");
    std::vector<double> s_series, m_series;
    if (momentum_law) {
        TermSeries ts = compute_terms(spec, momentum);
        s_series = std::move(ts.S);
        m_series = std::move(ts.M);
    }
    LossCurve out;
    out.meta.schedule = spec;
    out.meta.model_size = n_params;
    out.meta.max_lr = spec.eta_max;
    out.meta.label = "prediction";
    for (std::int64_t t = 0; t < spec.t_total; ++t) {
        double x;
        if (momentum_law) {
            x = s_series[static_cast<std::size_t>(t)];
        } else if (coeffs.variant == LawVariant::step_law) {
            x = static_cast<double>(t);
        } else {
            x = static_cast<double>(t) * static_cast<double>(batch_size) * static_cast<double>(sequence_length);
        }
        if (!(x > 0.0)) continue;
        const double m = momentum_law ? m_series[static_cast<std::size_t>(t)] : 0.0;
        out.points.push_back({t, evaluate_law(coeffs, x, n_params, m)});
    }
    return out;
}

// --- JSON ----------------------------------------------------------------

inline nlohmann::json coefficients_to_json(const LawCoefficients& c) {
    nlohmann::json j{{"variant", to_string(c.variant)}, {"n_term_active", c.n_term_active}};
    switch (c.variant) {
        case LawVariant::forward_momentum_reduced:
        case LawVariant::forward_momentum_full:
            j["lambda_s"] = c.lambda_s;
            j["alpha_s"] = c.alpha_s;
            j["lambda_m"] = c.lambda_m;
            j["l0"] = c.l0;
            break;
        case LawVariant::token_law:
            j["lambda_d"] = c.lambda_d;
            j["alpha_d"] = c.alpha_d;
            j["sigma"] = c.sigma;
            break;
        case LawVariant::step_law:
            j["lambda_t"] = c.lambda_t;
            j["alpha_t"] = c.alpha_t;
            j["sigma"] = c.sigma;
            break;
    }
    if (c.n_term_active) {
        j["lambda_n"] = c.lambda_n;
        j["alpha_n"] = c.alpha_n;
    }
    return j;
}

inline LawCoefficients coefficients_from_json(const nlohmann::json& j) {
    LawCoefficients c;
    c.variant = law_variant_from_string(j.at("variant").get<std::string>());
    c.n_term_active = j.value("n_term_active", false);
    switch (c.variant) {
        case LawVariant::forward_momentum_reduced:
        case LawVariant::forward_momentum_full:
            c.lambda_s = j.at("lambda_s").get<double>();
            c.alpha_s = j.at("alpha_s").get<double>();
            c.lambda_m = j.at("lambda_m").get<double>();
            c.l0 = j.at("l0").get<double>();
            break;
        case LawVariant::token_law:
            c.lambda_d = j.at("lambda_d").get<double>();
            c.alpha_d = j.at("alpha_d").get<double>();
            c.sigma = j.at("sigma").get<double>();
            break;
        case LawVariant::step_law:
            c.lambda_t = j.at("lambda_t").get<double>();
            c.alpha_t = j.at("alpha_t").get<double>();
            c.sigma = j.at("sigma").get<double>();
            break;
    }
    if (c.n_term_active) {
        c.lambda_n = j.at("lambda_n").get<double>();
        c.alpha_n = j.at("alpha_n").get<double>();
    }
    return c;
}

inline nlohmann::json momentum_to_json(const MomentumConfig& m) {
    nlohmann::json j{{"variant", to_string(m.variant)},
                     {"beta1", m.beta1},
                     {"beta2", m.beta2},
                     {"epsilon", m.epsilon}};
    if (m.variant == MomentumVariant::cmmt) j["lambda_decay"] = m.lambda_decay;
    return j;
}

inline MomentumConfig momentum_from_json(const nlohmann::json& j) {
    MomentumConfig m;
    m.variant = momentum_variant_from_string(j.at("variant").get<std::string>());
    m.beta1 = j.value("beta1", 0.9);
    m.beta2 = j.value("beta2", 0.95);
    m.epsilon = j.value("epsilon", 1e-8);
    m.lambda_decay = j.value("lambda_decay", 0.999);
    m.validate();
    return m;
}

inline nlohmann::json fit_report_to_json(const FitReport& r) {
    nlohmann::json per_curve = nlohmann::json::array();
    for (const auto& cm : r.mape_per_curve)
        per_curve.push_back({{"label", cm.label}, {"mape_percent", cm.mape_percent}});
    return nlohmann::json{
        {"coefficients", coefficients_to_json(r.coefficients)},
        {"mape", {{"per_curve", per_curve}, {"mean_percent", r.mape_mean_percent}}},
        {"residual_stats",
         {{"mean", r.residual_stats.mean}, {"stddev", r.residual_stats.stddev}, {"max_abs", r.residual_stats.max_abs}}},
        {"optimizer_trace",
         {{"iterations", r.trace.iterations},
          {"converged", r.trace.converged},
          {"final_objective", r.trace.final_objective},
          {"final_gradient_norm", r.trace.final_gradient_norm}}},
        {"config",
         {{"huber_delta", r.config.huber_delta},
          {"max_iterations", r.config.max_iterations},
          {"warmup_exclusion", r.config.warmup_exclusion},
          {"smoothing_window", r.config.smoothing_window},
          {"momentum", momentum_to_json(r.config.momentum)}}},
        {"n_term_folded", r.n_term_folded}};
}

inline FitReport fit_report_from_json(const nlohmann::json& j) {
    FitReport r;
    try {
        r.coefficients = coefficients_from_json(j.at("coefficients"));
        for (const auto& cm : j.at("mape").at("per_curve"))
            r.mape_per_curve.push_back({cm.at("label").get<std::string>(), cm.at("mape_percent").get<double>()});
        r.mape_mean_percent = j.at("mape").at("mean_percent").get<double>();
        const auto& rs = j.at("residual_stats");
        r.residual_stats = {rs.at("mean").get<double>(), rs.at("stddev").get<double>(),
                            rs.at("max_abs").get<double>()};
        const auto& tr = j.at("optimizer_trace");
        r.trace.iterations = tr.at("iterations").get<int>();
        r.trace.converged = tr.at("converged").get<bool>();
        r.trace.final_objective = tr.at("final_objective").get<double>();
        r.trace.final_gradient_norm = tr.at("final_gradient_norm").get<double>();
        const auto& cf = j.at("config");
        r.config.huber_delta = cf.at("huber_delta").get<double>();
        r.config.max_iterations = cf.at("max_iterations").get<int>();
        r.config.warmup_exclusion = cf.at("warmup_exclusion").get<bool>();
        r.config.smoothing_window = cf.at("smoothing_window").get<std::int64_t>();
        r.config.momentum = momentum_from_json(cf.at("momentum"));
        r.n_term_folded = j.at("n_term_folded").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit report: ") + e.what());
    }
    return r;
}

} // namespace annealab
