// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "annealab/curve.hpp"
#include "annealab/errors.hpp"
#include "annealab/io.hpp"
#include "annealab/schedule.hpp"

namespace annealab {

/// Run metadata pointing at a loss-curve file; carries everything the laws
/// need (N, batch size, sequence length, schedule).
struct RunManifest {
    std::string curve_path;
    double model_size_params = 0.0;
    std::int64_t batch_size_sequences = 0;
    std::int64_t sequence_length = 0;
    ScheduleSpec schedule;
    double max_lr = 0.0;
    std::uint64_t seed = 0;
    std::string label;

    void validate() const {
        if (curve_path.empty()) throw ValidationError("manifest: curve_path must be non-empty");
        if (!(model_size_params > 0.0)) throw ValidationError("manifest: model_size_params must be > 0");
        if (batch_size_sequences <= 0) throw ValidationError("manifest: batch_size_sequences must be > 0");
        if (sequence_length <= 0) throw ValidationError("manifest: sequence_length must be > 0");
        schedule.validate();
    }
};

namespace detail {

inline void check_point(std::vector<CurvePoint>& points, std::int64_t step, double loss,
                        const std::string& where) {
    if (!std::isfinite(loss) || loss <= 0.0)
        throw DataError(where + ": loss must be finite and > 0, got " + double_to_string(loss));
    if (!points.empty()) {
        if (step == points.back().step) throw DataError(where + ": duplicate step " + std::to_string(step));
        if (step < points.back().step)
            throw DataError(where + ": non-monotone step " + std::to_string(step) + " after " +
                            std::to_string(points.back().step) + " (index " + std::to_string(points.size()) + ")");
    }
    points.push_back({step, loss});
}

} // namespace detail

/// Parse a `step,loss` CSV. Steps must be strictly increasing, losses finite
/// and positive; errors carry the 1-based line number.
inline std::vector<CurvePoint> parse_loss_csv(std::istream& in, const std::string& name = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "step,loss") throw ParseError(name + ": expected header 'step,loss', got '" + line + "'");
    std::vector<CurvePoint> points;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string where = name + ": line " + std::to_string(lineno);
        if (comma == std::string::npos) throw ParseError(where + ": expected 'step,loss' row");
        const std::int64_t step = parse_int(std::string_view(line).substr(0, comma), where);
        const double loss = parse_double(std::string_view(line).substr(comma + 1), where);
        detail::check_point(points, step, loss, where);
    }
    return points;
}

inline std::vector<CurvePoint> parse_loss_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return parse_loss_csv(in, path.string());
}

/// JSONL variant: one {"step": ..., "loss": ...} object per line.
inline std::vector<CurvePoint> parse_loss_jsonl(std::istream& in, const std::string& name = "<stream>") {
    std::vector<CurvePoint> points;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = name + ": line " + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("step") || !j.contains("loss"))
            throw ParseError(where + ": expected {\"step\": ..., \"loss\": ...}");
        detail::check_point(points, j.at("step").get<std::int64_t>(), j.at("loss").get<double>(), where);
    }
    if (points.empty()) throw ParseError(name + ": no data rows");
    return points;
}

inline std::vector<CurvePoint> parse_loss_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return parse_loss_jsonl(in, path.string());
}

/// Exports with shortest round-trip decimal formatting, so
/// parse -> export -> parse is lossless for valid files.
inline void write_loss_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
    os << "step,loss\n";
    for (const auto& p : points) os << p.step << ',' << double_to_string(p.loss) << '\n';
}

inline void write_loss_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot write '" + path.string() + "'");
    write_loss_csv(os, points);
}

inline std::int64_t tokens_to_steps(std::int64_t tokens, std::int64_t batch_size_sequences,
                                    std::int64_t sequence_length) {
    if (batch_size_sequences <= 0 || sequence_length <= 0)
        throw ValidationError("tokens_to_steps: batch size and sequence length must be > 0");
    return tokens / (batch_size_sequences * sequence_length);
}

inline std::int64_t steps_to_tokens(std::int64_t steps, std::int64_t batch_size_sequences,
                                    std::int64_t sequence_length) {
    if (batch_size_sequences <= 0 || sequence_length <= 0)
        throw ValidationError("steps_to_tokens: batch size and sequence length must be > 0");
    return steps * batch_size_sequences * sequence_length;
}

/// Resample curves onto a shared step grid by linear interpolation in step;
/// grid points must fall inside every curve's range and native points are
/// reproduced exactly.
inline std::vector<LossCurve> align_curves(const std::vector<LossCurve>& curves,
                                           const std::vector<std::int64_t>& grid) {
    std::vector<LossCurve> out;
    out.reserve(curves.size());
    for (const auto& curve : curves) {
        if (curve.points.empty()) throw DataError("align_curves: curve '" + curve.meta.label + "' is empty");
        LossCurve aligned;
        aligned.meta = curve.meta;
        std::size_t hi = 0;
        for (std::int64_t g : grid) {
            if (g < curve.points.front().step || g > curve.points.back().step)
                throw ValidationError("align_curves: grid step " + std::to_string(g) +
                                      " outside range of curve '" + curve.meta.label + "'");
            while (curve.points[hi].step < g) ++hi;
            if (curve.points[hi].step == g) {
                aligned.points.push_back({g, curve.points[hi].loss});
                continue;
            }
            const auto& b = curve.points[hi];
            const auto& a = curve.points[hi - 1];
            const double w = static_cast<double>(g - a.step) / static_cast<double>(b.step - a.step);
            aligned.points.push_back({g, a.loss + w * (b.loss - a.loss)});
        }
        out.push_back(std::move(aligned));
    }
    return out;
}

// --- Manifest JSON ---------------------------------------------------------

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    return {{"curve_path", m.curve_path},
            {"model_size_params", m.model_size_params},
            {"batch_size_sequences", m.batch_size_sequences},
            {"sequence_length", m.sequence_length},
            {"schedule", schedule_to_json(m.schedule)},
            {"max_lr", m.max_lr},
            {"seed", m.seed},
            {"label", m.label}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("manifest: expected a JSON object");
    static const char* allowed[] = {"curve_path", "model_size_params", "batch_size_sequences",
                                    "sequence_length", "schedule", "max_lr", "seed", "label"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError("manifest: unknown field '" + key + "'");
    }
    RunManifest m;
    try {
        m.curve_path = j.at("curve_path").get<std::string>();
        m.model_size_params = j.at("model_size_params").get<double>();
        m.batch_size_sequences = j.at("batch_size_sequences").get<std::int64_t>();
        m.sequence_length = j.at("sequence_length").get<std::int64_t>();
        m.schedule = schedule_from_json(j.at("schedule"));
        m.max_lr = j.at("max_lr").get<double>();
        m.seed = j.value("seed", std::uint64_t{0});
        m.label = j.value("label", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
}

/// A manifest file holds either a single run object or {"runs": [...]}.
inline std::vector<RunManifest> load_manifests(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest '" + path.string() + "': " + e.what());
    }
    std::vector<RunManifest> out;
    if (j.is_object() && j.contains("runs")) {
        for (const auto& rj : j.at("runs")) out.push_back(manifest_from_json(rj));
    } else {
        out.push_back(manifest_from_json(j));
    }
    return out;
}

/// Resolve the manifest's curve file (relative paths are relative to the
/// manifest's directory), parse it, and attach the metadata.
inline LossCurve load_curve(const RunManifest& m, const std::filesystem::path& base_dir) {
    std::filesystem::path p(m.curve_path);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p))
        throw ParseError("manifest: curve file '" + p.string() + "' does not exist");
    LossCurve curve;
    if (p.extension() == ".jsonl")
        curve.points = parse_loss_jsonl(p);
    else
        curve.points = parse_loss_csv(p);
    curve.meta.model_size = m.model_size_params;
    curve.meta.batch_size = m.batch_size_sequences;
    curve.meta.sequence_length = m.sequence_length;
    curve.meta.schedule = m.schedule;
    curve.meta.max_lr = m.max_lr;
    curve.meta.seed = m.seed;
    curve.meta.label = m.label;
    curve.validate();
    return curve;
}

} // namespace annealab
