// SPDX-License-Identifier: Apache-2.0
//
// anneal-lab: fit loss-curve scaling laws, predict curves under alternative
// learning-rate schedules, recommend annealing ratios, and run the seeded
// convex toy trainer. Machine-readable output on stdout (bare values, or a
// single JSON document with --format json); human text goes to stderr.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "annealab/annealab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitPartialSimulation = 3;

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw annealab::ParseError("cannot write '" + path.string() + "'");
    os << content;
}

void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

struct CommonFitOptions {
    std::vector<std::string> manifests;
    std::string variant = "forward_momentum_full";
    double huber_delta = 1e-3;
    int max_iter = 1000;
    std::int64_t window = 50;
    bool no_warmup_exclusion = false;
    std::string momentum = "asmt";
    double lambda_decay = 0.999;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;

    annealab::FitConfig to_config(std::optional<double> lambda_override = std::nullopt) const {
        annealab::FitConfig cfg;
        cfg.huber_delta = huber_delta;
        cfg.max_iterations = max_iter;
        cfg.warmup_exclusion = !no_warmup_exclusion;
        cfg.smoothing_window = window;
        cfg.momentum.variant = annealab::momentum_variant_from_string(momentum);
        cfg.momentum.beta1 = beta1;
        cfg.momentum.beta2 = beta2;
        cfg.momentum.epsilon = epsilon;
        cfg.momentum.lambda_decay = lambda_override.value_or(lambda_decay);
        cfg.momentum.validate();
        return cfg;
    }
};

void add_fit_options(CLI::App* cmd, CommonFitOptions& opt, bool with_momentum_choice) {
    cmd->add_option("--manifest", opt.manifests, "Run manifest JSON (repeatable)")->required()->expected(-1);
    cmd->add_option("--variant", opt.variant, "Law variant")
        ->check(CLI::IsMember({"token_law", "step_law", "forward_momentum_reduced", "forward_momentum_full"}));
    cmd->add_option("--huber-delta", opt.huber_delta, "Huber threshold on raw residuals");
    cmd->add_option("--max-iter", opt.max_iter, "Optimizer iteration cap");
    cmd->add_option("--window", opt.window, "Moving-average smoothing window (steps)");
    cmd->add_flag("--no-warmup-exclusion", opt.no_warmup_exclusion, "Keep warmup-phase points in the fit");
    if (with_momentum_choice) {
        cmd->add_option("--momentum", opt.momentum, "Momentum term variant")
            ->check(CLI::IsMember({"asmt", "cmmt"}));
        cmd->add_option("--lambda", opt.lambda_decay, "CMMT decay factor in (0, 1)");
    }
    cmd->add_option("--beta1", opt.beta1, "ASMT first-moment decay");
    cmd->add_option("--beta2", opt.beta2, "ASMT second-moment decay");
    cmd->add_option("--epsilon", opt.epsilon, "ASMT denominator epsilon");
}

std::vector<annealab::LossCurve> load_curves(const std::vector<std::string>& manifest_paths) {
    std::vector<annealab::LossCurve> curves;
    for (const auto& mp : manifest_paths) {
        const fs::path path(mp);
        const auto manifests = annealab::load_manifests(path);
        const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
        for (const auto& m : manifests) curves.push_back(annealab::load_curve(m, base));
    }
    return curves;
}

annealab::ScheduleSpec schedule_from_flags(const std::string& kind, double eta_max, std::int64_t steps,
                                           std::int64_t warmup, double ratio, double beta, double divisor) {
    if (kind == "wsd") return annealab::build_wsd(eta_max, steps, warmup, ratio, beta);
    if (kind == "cosine") return annealab::build_cosine(eta_max, steps, warmup, divisor);
    if (kind == "constant") return annealab::build_constant(eta_max, steps, warmup);
    throw annealab::ValidationError("unsupported schedule kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

struct FitCommand {
    CommonFitOptions common;
    std::string output = "fit_report.json";
    std::string format = "text";

    int run() const {
        const auto curves = load_curves(common.manifests);
        const auto variant = annealab::law_variant_from_string(common.variant);
        const auto report = annealab::fit(curves, variant, common.to_config());
        const json j = annealab::fit_report_to_json(report);
        write_json_file(output, j);
        if (format == "json")
            std::cout << j.dump(2) << '\n';
        else
            std::cout << annealab::double_to_string(report.mape_mean_percent) << '\n';
        std::cerr << "fit: " << curves.size() << " curve(s), mean MAPE " << report.mape_mean_percent
                  << "%, converged=" << (report.trace.converged ? "yes" : "no") << ", report -> " << output
                  << '\n';
        return report.trace.converged ? kExitOk : kExitNotConverged;
    }
};

struct PredictCommand {
    std::string report_path;
    std::string schedule_kind = "wsd";
    double eta_max = 0.0;
    std::int64_t steps = 0;
    std::int64_t warmup = 0;
    double ratio = 0.1;
    double beta = 1.0;
    double divisor = 10.0;
    double model_size = 0.0;
    std::string output = "predicted.csv";
    std::string format = "text";

    int run() const {
        std::ifstream in(report_path);
        if (!in) throw annealab::ParseError("cannot open report '" + report_path + "'");
        json rj;
        in >> rj;
        const auto report = annealab::fit_report_from_json(rj);
        const auto spec = schedule_from_flags(schedule_kind, eta_max, steps, warmup, ratio, beta, divisor);
        const auto curve =
            annealab::predict_curve(report.coefficients, spec, model_size, report.config.momentum);

        std::string csv = "step,predicted_loss\n";
        for (const auto& p : curve.points)
            csv += std::to_string(p.step) + ',' + annealab::double_to_string(p.loss) + '\n';
        write_text_file(output, csv);

        const annealab::TermSeries ts = annealab::compute_terms(spec, report.config.momentum);
        const json summary = {{"final_loss", curve.points.back().loss},
                              {"s_final", ts.S.back()},
                              {"m_final", ts.M.back()},
                              {"steps", spec.t_total},
                              {"schedule", annealab::schedule_to_json(spec)},
                              {"curve_csv", output}};
        fs::path summary_path(output);
        summary_path.replace_extension(".summary.json");
        write_json_file(summary_path, summary);

        if (format == "json")
            std::cout << summary.dump(2) << '\n';
        else
            std::cout << annealab::double_to_string(curve.points.back().loss) << '\n';
        std::cerr << "predict: " << curve.points.size() << " steps -> " << output << " (summary "
                  << summary_path.string() << ")\n";
        return kExitOk;
    }
};

struct RecommendCommand {
    std::string preset_name;
    std::string report_path;
    std::int64_t steps = 0;
    double eta_max = 0.0;
    double model_size = 0.0;
    std::int64_t warmup = 0;
    double grid_min = 0.01;
    double grid_max = 1.0;
    std::size_t grid_points = 20;
    std::string momentum_override;
    double lambda_decay = 0.999;
    std::string output = "recommendation.json";
    std::string csv_output = "recommendation.csv";
    std::string format = "text";

    int run() const {
        if (!preset_name.empty() && !report_path.empty())
            throw annealab::ValidationError("recommend: give either --preset or --report, not both (ambiguous)");
        if (preset_name.empty() && report_path.empty())
            throw annealab::ValidationError("recommend: one of --preset or --report is required");

        annealab::RecommendationReport rec;
        if (!preset_name.empty()) {
            const auto& p = annealab::preset(preset_name);
            annealab::RatioPrediction pred;
            if (p.r_opt_vs_steps && steps > 0) {
                pred = annealab::predict_r_opt_from_steps(steps, *p.r_opt_vs_steps);
            } else if (p.r_opt_vs_lr && eta_max > 0.0) {
                pred = annealab::predict_r_opt_from_lr(eta_max, *p.r_opt_vs_lr);
            } else {
                throw annealab::ValidationError("recommend: preset '" + preset_name + "' needs " +
                                                (p.r_opt_vs_steps ? "--steps" : "--eta-max"));
            }
            if (pred.clamped) std::cerr << "recommend: prediction clamped into (0, 1]\n";
            rec.r_opt = pred.ratio;
            rec.context.t_total = steps;
            rec.context.eta_max = eta_max;
            rec.context.model_size = model_size;
            rec.provenance = "literature:" + preset_name;
        } else {
            std::ifstream in(report_path);
            if (!in) throw annealab::ParseError("cannot open report '" + report_path + "'");
            json rj;
            in >> rj;
            const auto report = annealab::fit_report_from_json(rj);
            if (steps <= 0) throw annealab::ValidationError("recommend: --steps is required for a sweep");
            if (!(eta_max > 0.0)) throw annealab::ValidationError("recommend: --eta-max is required for a sweep");
            annealab::MomentumConfig momentum = report.config.momentum;
            if (!momentum_override.empty()) {
                momentum.variant = annealab::momentum_variant_from_string(momentum_override);
                momentum.lambda_decay = lambda_decay;
            }
            const auto grid = annealab::default_r_grid(grid_points, grid_min, grid_max);
            rec = annealab::sweep_ratio(report.coefficients, steps, eta_max, model_size, grid, momentum, warmup);
        }

        const json j = annealab::recommendation_to_json(rec);
        write_json_file(output, j);
        std::ostringstream csv;
        rec.write_csv(csv);
        write_text_file(csv_output, csv.str());

        if (format == "json")
            std::cout << j.dump(2) << '\n';
        else
            std::cout << annealab::double_to_string(rec.r_opt) << '\n';
        std::cerr << "recommend: r_opt=" << rec.r_opt << " (" << rec.provenance << ") -> " << output << '\n';
        return kExitOk;
    }
};

struct CompareMomentumCommand {
    CommonFitOptions common;
    std::vector<double> lambdas{0.99, 0.999};
    std::string output = "momentum_comparison.csv";
    std::string format = "text";

    int run() const {
        for (double l : lambdas)
            if (!(l > 0.0 && l < 1.0))
                throw annealab::ValidationError("compare-momentum: lambda " + annealab::double_to_string(l) +
                                                " outside (0, 1)");
        const auto curves = load_curves(common.manifests);
        const auto variant = annealab::law_variant_from_string(common.variant);

        struct Row {
            std::string momentum;
            std::optional<double> lambda;
            double mape;
        };
        std::vector<Row> rows;

        annealab::FitConfig asmt_cfg = common.to_config();
        asmt_cfg.momentum.variant = annealab::MomentumVariant::asmt;
        rows.push_back({"asmt", std::nullopt, annealab::fit(curves, variant, asmt_cfg).mape_mean_percent});
        for (double l : lambdas) {
            annealab::FitConfig cfg = common.to_config(l);
            cfg.momentum.variant = annealab::MomentumVariant::cmmt;
            rows.push_back({"cmmt", l, annealab::fit(curves, variant, cfg).mape_mean_percent});
        }

        std::string csv = "momentum,lambda,mean_mape_percent\n";
        json jrows = json::array();
        for (const auto& r : rows) {
            csv += r.momentum + ',' + (r.lambda ? annealab::double_to_string(*r.lambda) : std::string{}) + ',' +
                   annealab::double_to_string(r.mape) + '\n';
            jrows.push_back({{"momentum", r.momentum},
                             {"lambda", r.lambda ? json(*r.lambda) : json(nullptr)},
                             {"mean_mape_percent", r.mape}});
        }
        write_text_file(output, csv);
        if (format == "json")
            std::cout << json{{"rows", jrows}}.dump(2) << '\n';
        else
            std::cout << csv;
        std::cerr << "compare-momentum: " << rows.size() << " fits -> " << output << '\n';
        return kExitOk;
    }
};

struct SimulateCommand {
    std::string config_path;
    std::string out_dir_override;
    std::uint64_t base_seed = 0;
    std::string format = "text";

    struct RunPlan {
        annealab::ScheduleSpec spec;
        double gamma;
        std::uint64_t seed;
        std::string label;
    };

    int run() const {
        std::ifstream in(config_path);
        if (!in) throw annealab::ParseError("cannot open config '" + config_path + "'");
        json cfg;
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            throw annealab::ParseError(std::string("simulate config: ") + e.what());
        }
        for (const auto& [key, value] : cfg.items()) {
            (void)value;
            static const char* allowed[] = {"out_dir", "dim", "condition_number", "noise_sigma",
                                            "problem_seed", "eta_max", "batch_size_sequences",
                                            "sequence_length", "schedules", "t_totals", "gammas", "seeds"};
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) throw annealab::ParseError("simulate config: unknown field '" + key + "'");
        }

        const fs::path out_dir = out_dir_override.empty() ? fs::path(cfg.value("out_dir", "runs")) : fs::path(out_dir_override);
        const int dim = cfg.value("dim", 32);
        const double cond = cfg.value("condition_number", 100.0);
        const double sigma = cfg.value("noise_sigma", 0.0);
        const std::uint64_t problem_seed = cfg.value("problem_seed", std::uint64_t{0});
        const double eta_max = cfg.value("eta_max", 1.0);
        const std::int64_t batch = cfg.value("batch_size_sequences", std::int64_t{1});
        const std::int64_t seq_len = cfg.value("sequence_length", std::int64_t{1});
        if (!cfg.contains("schedules") || !cfg.contains("t_totals") || !cfg.contains("gammas") ||
            !cfg.contains("seeds"))
            throw annealab::ParseError("simulate config: schedules, t_totals, gammas and seeds are required");

        const auto problem = annealab::make_problem(dim, problem_seed, sigma, cond);

        std::vector<RunPlan> plans;
        for (const auto& tmpl : cfg.at("schedules")) {
            for (const auto& tj : cfg.at("t_totals")) {
                const std::int64_t t_total = tj.get<std::int64_t>();
                json sj = tmpl;
                const double warmup_frac = sj.value("warmup_frac", 0.0);
                sj.erase("warmup_frac");
                sj["t_total"] = t_total;
                sj["t_warmup"] = static_cast<std::int64_t>(std::floor(warmup_frac * static_cast<double>(t_total)));
                if (sj.at("kind").get<std::string>() != "piecewise" && !sj.contains("eta_max"))
                    sj["eta_max"] = eta_max;
                const auto spec = annealab::schedule_from_json(sj);
                for (const auto& gj : cfg.at("gammas")) {
                    for (const auto& seedj : cfg.at("seeds")) {
                        RunPlan plan;
                        plan.spec = spec;
                        plan.gamma = gj.get<double>();
                        plan.seed = base_seed + seedj.get<std::uint64_t>();
                        plan.label = std::string(annealab::to_string(spec.kind)) + "-T" +
                                     std::to_string(t_total) + "-g" + annealab::double_to_string(plan.gamma) +
                                     "-s" + std::to_string(plan.seed);
                        plans.push_back(std::move(plan));
                    }
                }
            }
        }

        struct Slot {
            std::optional<annealab::RunResult> result;
            std::string error;
        };
        std::vector<Slot> slots(plans.size());
        annealab::parallel_for_indexed(plans.size(), 0, [&](std::size_t i) {
            try {
                slots[i].result = annealab::run_sgd(problem, plans[i].spec, plans[i].gamma, plans[i].seed,
                                                    plans[i].spec.t_total);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        });

        fs::create_directories(out_dir);
        json runs = json::array();
        bool any_failed = false;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            if (!slots[i].error.empty()) {
                any_failed = true;
                std::cerr << "simulate: run '" << plans[i].label << "' failed: " << slots[i].error << '\n';
                continue;
            }
            char name[32];
            std::snprintf(name, sizeof(name), "curve_%03zu.csv", i);
            annealab::write_loss_csv(out_dir / name, slots[i].result->curve.points);
            annealab::RunManifest m;
            m.curve_path = name;
            m.model_size_params = static_cast<double>(dim);
            m.batch_size_sequences = batch;
            m.sequence_length = seq_len;
            m.schedule = plans[i].spec;
            m.max_lr = plans[i].gamma;
            m.seed = plans[i].seed;
            m.label = plans[i].label;
            runs.push_back(annealab::manifest_to_json(m));
        }
        const json manifest = {{"runs", runs}};
        write_json_file(out_dir / "manifest.json", manifest);

        if (format == "json")
            std::cout << manifest.dump(2) << '\n';
        else
            std::cout << (out_dir / "manifest.json").string() << '\n';
        std::cerr << "simulate: " << runs.size() << '/' << plans.size() << " runs -> " << out_dir.string()
                  << '\n';
        return any_failed ? kExitPartialSimulation : kExitOk;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anneal-lab: loss-curve scaling laws and annealing-ratio recommendations"};
    app.require_subcommand(1);

    FitCommand fit_cmd;
    auto* fit_app = app.add_subcommand("fit", "Fit a law variant to loss curves");
    add_fit_options(fit_app, fit_cmd.common, true);
    fit_app->add_option("--output,-o", fit_cmd.output, "FitReport JSON path");
    fit_app->add_option("--format", fit_cmd.format)->check(CLI::IsMember({"text", "json"}));

    PredictCommand predict_cmd;
    auto* predict_app = app.add_subcommand("predict", "Predict a loss curve under a schedule");
    predict_app->add_option("--report", predict_cmd.report_path, "FitReport JSON")->required();
    predict_app->add_option("--schedule", predict_cmd.schedule_kind)
        ->check(CLI::IsMember({"wsd", "cosine", "constant"}));
    predict_app->add_option("--eta-max", predict_cmd.eta_max)->required();
    predict_app->add_option("--steps", predict_cmd.steps)->required();
    predict_app->add_option("--warmup", predict_cmd.warmup);
    predict_app->add_option("--ratio", predict_cmd.ratio, "WSD annealing ratio");
    predict_app->add_option("--beta", predict_cmd.beta, "WSD decay exponent");
    predict_app->add_option("--final-lr-divisor", predict_cmd.divisor);
    predict_app->add_option("--n", predict_cmd.model_size, "Model size (parameters)");
    predict_app->add_option("--output,-o", predict_cmd.output, "Predicted-curve CSV path");
    predict_app->add_option("--format", predict_cmd.format)->check(CLI::IsMember({"text", "json"}));

    RecommendCommand rec_cmd;
    auto* rec_app = app.add_subcommand("recommend", "Recommend an annealing ratio");
    rec_app->add_option("--preset", rec_cmd.preset_name, "Literature preset (dense-v1, moe-v1, moe1b-steps-v1)");
    rec_app->add_option("--report", rec_cmd.report_path, "FitReport JSON to sweep");
    rec_app->add_option("--steps", rec_cmd.steps);
    rec_app->add_option("--eta-max", rec_cmd.eta_max);
    rec_app->add_option("--n", rec_cmd.model_size);
    rec_app->add_option("--warmup", rec_cmd.warmup);
    rec_app->add_option("--grid-min", rec_cmd.grid_min);
    rec_app->add_option("--grid-max", rec_cmd.grid_max);
    rec_app->add_option("--grid-points", rec_cmd.grid_points);
    rec_app->add_option("--momentum", rec_cmd.momentum_override)->check(CLI::IsMember({"asmt", "cmmt"}));
    rec_app->add_option("--lambda", rec_cmd.lambda_decay);
    rec_app->add_option("--output,-o", rec_cmd.output, "Recommendation JSON path");
    rec_app->add_option("--csv", rec_cmd.csv_output, "Plot-ready CSV path");
    rec_app->add_option("--format", rec_cmd.format)->check(CLI::IsMember({"text", "json"}));

    CompareMomentumCommand cmp_cmd;
    auto* cmp_app = app.add_subcommand("compare-momentum", "Fit per momentum variant and tabulate MAPE");
    add_fit_options(cmp_app, cmp_cmd.common, false);
    cmp_app->add_option("--lambda", cmp_cmd.lambdas, "CMMT decay factors (repeatable)")->expected(-1);
    cmp_app->add_option("--output,-o", cmp_cmd.output, "Comparison CSV path");
    cmp_app->add_option("--format", cmp_cmd.format)->check(CLI::IsMember({"text", "json"}));

    SimulateCommand sim_cmd;
    auto* sim_app = app.add_subcommand("simulate", "Run the seeded convex toy trainer");
    sim_app->add_option("--config", sim_cmd.config_path, "Simulation config JSON")->required();
    sim_app->add_option("--out-dir", sim_cmd.out_dir_override, "Override config out_dir");
    sim_app->add_option("--seed", sim_cmd.base_seed, "Base seed added to each run seed (default 0)");
    sim_app->add_option("--format", sim_cmd.format)->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit_app->parsed()) return fit_cmd.run();
        if (predict_app->parsed()) return predict_cmd.run();
        if (rec_app->parsed()) return rec_cmd.run();
        if (cmp_app->parsed()) return cmp_cmd.run();
        if (sim_app->parsed()) return sim_cmd.run();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
