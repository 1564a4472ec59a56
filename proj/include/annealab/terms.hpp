// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "annealab/errors.hpp"
#include "annealab/io.hpp"
#include "annealab/schedule.hpp"

namespace annealab {

enum class MomentumVariant { asmt, cmmt };

inline const char* to_string(MomentumVariant v) {
    return v == MomentumVariant::asmt ? "asmt" : "cmmt";
}

inline MomentumVariant momentum_variant_from_string(const std::string& s) {
    if (s == "asmt") return MomentumVariant::asmt;
    if (s == "cmmt") return MomentumVariant::cmmt;
    throw ValidationError("unknown momentum variant '" + s + "'");
}

/// Parameters of the annealing-momentum functionals. The Adam-style variant
/// is a functional of the lr-decrease sequence only, not of gradients.
struct MomentumConfig {
    MomentumVariant variant = MomentumVariant::asmt;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;
    double lambda_decay = 0.999; // cmmt only

    friend bool operator==(const MomentumConfig&, const MomentumConfig&) = default;

    void validate() const {
        if (!(beta1 >= 0.0 && beta1 < 1.0))
            throw ValidationError("momentum: beta1 (" + std::to_string(beta1) + ") must lie in [0, 1)");
        if (!(beta2 >= 0.0 && beta2 < 1.0))
            throw ValidationError("momentum: beta2 (" + std::to_string(beta2) + ") must lie in [0, 1)");
        if (!(epsilon > 0.0))
            throw ValidationError("momentum: epsilon (" + std::to_string(epsilon) + ") must be > 0");
        if (variant == MomentumVariant::cmmt && !(lambda_decay > 0.0 && lambda_decay < 1.0))
            throw ValidationError("momentum: lambda_decay (" + std::to_string(lambda_decay) +
                                  ") must lie in (0, 1)");
    }
};

/// Per-step prefix values of the forward term S and the momentum term M.
struct TermSeries {
    std::vector<double> S;
    std::vector<double> M;

    std::size_t size() const { return S.size(); }

    void write_csv(std::ostream& os) const {
        os << "step,S,M\n";
        for (std::size_t t = 0; t < S.size(); ++t)
            os << t << ',' << double_to_string(S[t]) << ',' << double_to_string(M[t]) << '\n';
    }
};

/// S_t = sum_{k=0..t} lr(k), the left-Riemann discretization of the lr
/// integral. Kahan-compensated so long schedules keep full precision.
inline std::vector<double> forward_series(const ScheduleSpec& spec) {
    spec.validate();
    std::vector<double> s(static_cast<std::size_t>(spec.t_total));
    double sum = 0.0, comp = 0.0;
    for (std::int64_t t = 0; t < spec.t_total; ++t) {
        const double y = lr_at(spec, t) - comp;
        const double next = sum + y;
        comp = (next - sum) - y;
        sum = next;
        s[static_cast<std::size_t>(t)] = sum;
    }
    return s;
}

namespace detail {

// Delta-eta sign convention: d_t = lr(t-1) - lr(t), so decay yields positive
// deltas and positive M. d_0 = 0 by definition.
inline double delta_eta(const ScheduleSpec& spec, std::int64_t t) {
    return lr_at(spec, t - 1) - lr_at(spec, t);
}

} // namespace detail

/// Adam-style momentum term: EMA moments of delta-eta with bias correction,
/// accumulated as M_t = M_{t-1} + m_hat / sqrt(v_hat + eps). M_0 = 0 and the
/// step index for bias correction starts at t = 1.
inline std::vector<double> asmt_series(const ScheduleSpec& spec, const MomentumConfig& config) {
    spec.validate();
    config.validate();
    if (config.variant != MomentumVariant::asmt)
        throw ValidationError("asmt_series: config.variant must be asmt");
    std::vector<double> out(static_cast<std::size_t>(spec.t_total), 0.0);
    double m = 0.0, v = 0.0, M = 0.0;
    double b1t = 1.0, b2t = 1.0;
    for (std::int64_t t = 1; t < spec.t_total; ++t) {
        const double d = detail::delta_eta(spec, t);
        m = config.beta1 * m + (1.0 - config.beta1) * d;
        v = config.beta2 * v + (1.0 - config.beta2) * d * d;
        b1t *= config.beta1;
        b2t *= config.beta2;
        const double m_hat = m / (1.0 - b1t);
        const double v_hat = v / (1.0 - b2t);
        M += m_hat / std::sqrt(v_hat + config.epsilon);
        out[static_cast<std::size_t>(t)] = M;
    }
    return out;
}

/// Cumulative multiplicative momentum term, computed in linear time via
/// A_i = lambda * A_{i-1} + d_i, M_i = M_{i-1} + A_i. Equals the quadratic
/// double-sum definition exactly (see cmmt_bruteforce).
inline std::vector<double> cmmt_series(const ScheduleSpec& spec, const MomentumConfig& config) {
    spec.validate();
    config.validate();
    if (config.variant != MomentumVariant::cmmt)
        throw ValidationError("cmmt_series: config.variant must be cmmt");
    std::vector<double> out(static_cast<std::size_t>(spec.t_total), 0.0);
    double a = 0.0, M = 0.0;
    for (std::int64_t t = 1; t < spec.t_total; ++t) {
        a = config.lambda_decay * a + detail::delta_eta(spec, t);
        M += a;
        out[static_cast<std::size_t>(t)] = M;
    }
    return out;
}

/// Test oracle: literal evaluation of the nested double sum
/// M_C = sum_{i=1..s} sum_{k=1..i} (eta_{k-1} - eta_k) * lambda^{i-k}
/// over the whole schedule (s = t_total - 1). O(T^2); refuses large T.
inline double cmmt_bruteforce(const ScheduleSpec& spec, double lambda_decay) {
    spec.validate();
    if (!(lambda_decay > 0.0 && lambda_decay < 1.0))
        throw ValidationError("cmmt_bruteforce: lambda_decay must lie in (0, 1)");
    if (spec.t_total > 10000)
        throw ValidationError("cmmt_bruteforce: refusing t_total (" + std::to_string(spec.t_total) +
                              ") > 10000 (quadratic cost)");
    const std::int64_t s = spec.t_total - 1;
    std::vector<double> delta(static_cast<std::size_t>(s) + 1, 0.0);
    for (std::int64_t t = 1; t <= s; ++t) delta[static_cast<std::size_t>(t)] = detail::delta_eta(spec, t);
    std::vector<double> lam_pow(static_cast<std::size_t>(s) + 1, 1.0);
    for (std::int64_t p = 1; p <= s; ++p)
        lam_pow[static_cast<std::size_t>(p)] = lam_pow[static_cast<std::size_t>(p - 1)] * lambda_decay;
    double total = 0.0;
    for (std::int64_t i = 1; i <= s; ++i) {
        double inner = 0.0;
        for (std::int64_t k = 1; k <= i; ++k)
            inner += delta[static_cast<std::size_t>(k)] * lam_pow[static_cast<std::size_t>(i - k)];
        total += inner;
    }
    return total;
}

/// Per-step S and M for one schedule under the given momentum variant.
inline TermSeries compute_terms(const ScheduleSpec& spec, const MomentumConfig& config) {
    TermSeries ts;
    ts.S = forward_series(spec);
    ts.M = config.variant == MomentumVariant::asmt ? asmt_series(spec, config) : cmmt_series(spec, config);
    return ts;
}

} // namespace annealab
