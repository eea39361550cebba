/* hsmkit: fit quantum-probability and classical models to collections of
   contingency tables, run contextuality diagnostics, compare fits, and
   simulate data.

   Exit codes: 0 success, 1 usage or validation problem, 2 optimizer
   failure, 3 file system problem. */

#include <CLI11.hpp>

#include <hsmkit/hsmkit.hpp>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

using namespace hsmkit;

namespace {

std::uint64_t env_seed() {
    const char* s = std::getenv("HSMKIT_SEED");
    if (!s || !*s) return 0;
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != std::string(s).size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("HSMKIT_SEED must be an unsigned integer, got '" +
                              std::string(s) + "'");
    }
}

/* Seed precedence: --seed beats the config file, the config file beats
   HSMKIT_SEED, and the fallback is 0. */
OptimizerConfig resolve_config(const std::string& config_path, bool seed_given,
                               std::uint64_t seed_flag) {
    OptimizerConfig c;
    c.seed = env_seed();
    if (!config_path.empty()) c = load_optimizer_config(config_path, c);
    if (seed_given) c.seed = seed_flag;
    c.validate();
    return c;
}

std::vector<std::string> split_names(const std::string& arg) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : arg) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void emit(const Json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        detail::write_text_file(out_path, j.dump(2) + "\n");
}

bool is_baseline(const std::string& name) {
    return name == "saturated" || name == "joint" || name == "bayesnet-psa";
}

struct FittedModel {
    std::string name;
    FitResult fit;
    std::function<std::vector<double>(const ContextTable&)> predict;
};

FittedModel fit_one(const std::string& model_arg, const TableCollection& data,
                    const OptimizerConfig& config) {
    FittedModel out;
    out.name = model_arg;

    if (model_arg == "saturated") {
        auto [model, g2] = saturated_fit(data);
        double total = 0.0;
        for (const auto& t : data.tables) total += t.total();
        out.fit.g2 = g2;
        out.fit.n_params = static_cast<int>(saturated_param_count(data));
        out.fit.n_obs = std::llround(total);
        out.fit.bic = bic(g2, out.fit.n_params, out.fit.n_obs);
        out.fit.per_restart_g2 = {g2};
        auto m = std::make_shared<SaturatedModel>(std::move(model));
        out.predict = [m](const ContextTable& t) { return m->tables.at(t.key()); };
        return out;
    }
    if (model_arg == "joint") {
        out.fit = joint_fit(data, config);
        auto models = std::make_shared<std::map<std::string, JointModel>>();
        for (const auto& c : data.conditions)
            (*models)[c] = joint_from_fit(data, out.fit, c);
        out.predict = [models](const ContextTable& t) {
            return joint_predict(models->at(t.condition), t.context);
        };
        return out;
    }
    if (model_arg == "bayesnet-psa") {
        out.fit = bayesnet_fit(data, config);
        auto net = std::make_shared<BayesNetPSA>(
            bayesnet_from_params(data.conditions, out.fit.params));
        out.predict = [net](const ContextTable& t) {
            return bayesnet_predict(*net, t.condition, t.context);
        };
        return out;
    }

    auto spec = std::make_shared<ModelSpec>(load_model(model_arg));
    out.fit = fit_hsm(*spec, data, config);
    auto params = std::make_shared<std::vector<double>>(out.fit.params);
    out.predict = [spec, params](const ContextTable& t) {
        return predict_context(*spec, *params, t.condition, t.context);
    };
    return out;
}

FitReport build_report(const FittedModel& fm, const TableCollection& data,
                       const OptimizerConfig& config) {
    FitReport r;
    r.model = fm.name;
    r.conditions = data.conditions;
    r.fit = fm.fit;
    r.config = config;
    r.seed = config.seed;
    for (const auto& t : data.tables) {
        PredictedTable p;
        p.condition = t.condition;
        p.context = t.context;
        p.observed = t.counts;
        p.predicted = fm.predict(t);
        r.predicted_tables.push_back(std::move(p));
    }
    return r;
}

int run_fit(const std::string& data_path, const std::string& model_arg,
            const OptimizerConfig& config, bool per_individual,
            const std::string& out_path, const std::string& csv_path) {
    if (per_individual) {
        Json j = detail::read_json_file(data_path);
        detail::check_schema(j, "hsmkit/individuals/1");
        Json shell;
        shell["schema_version"] = TABLES_SCHEMA;
        shell["variables"] = detail::require_array(j, "variables", "individuals file");
        if (j.contains("conditions")) shell["conditions"] = j["conditions"];

        Json out;
        out["schema_version"] = "hsmkit/individuals/1";
        out["tool_version"] = HSMKIT_VERSION_STRING;
        out["model"] = model_arg;
        out["seed"] = config.seed;
        out["config"] = config_to_json(config);
        out["individuals"] = Json::array();
        for (const auto& ind : detail::require_array(j, "individuals", "individuals file")) {
            Json one = shell;
            one["tables"] = detail::require_array(ind, "tables", "individual entry");
            TableCollection data = tables_from_json(one);
            FittedModel fm = fit_one(model_arg, data, config);
            Json entry;
            entry["id"] = detail::require_string(ind, "id", "individual entry");
            entry["report"] = report_to_json(build_report(fm, data, config));
            out["individuals"].push_back(std::move(entry));
        }
        emit(out, out_path);
        return 0;
    }

    TableCollection data = load_tables(data_path);
    FittedModel fm = fit_one(model_arg, data, config);
    FitReport report = build_report(fm, data, config);
    emit(report_to_json(report), out_path);
    if (!csv_path.empty()) export_csv(report, data, csv_path);
    return 0;
}

int run_diagnose(const std::string& data_path, const std::string& chsh_arg,
                 const std::string& coding_arg,
                 const std::vector<std::string>& variables, bool joint_test,
                 const OptimizerConfig& config, const std::string& out_path) {
    TableCollection data = load_tables(data_path);

    std::vector<DiagnosticReport> reports;
    reports.push_back(order_effect_report(data));

    for (const auto& v : variables)
        reports.push_back(marginal_invariance_report(data, v));

    if (!chsh_arg.empty()) {
        auto names = split_names(chsh_arg);
        if (names.size() != 8)
            throw ValidationError(
                "--chsh expects 8 comma-separated variable names "
                "(four context pairs), got " + std::to_string(names.size()));
        ChshCoding coding;
        if (coding_arg == "correlation") coding = ChshCoding::Correlation;
        else if (coding_arg == "product") coding = ChshCoding::Product;
        else throw ValidationError("--coding must be 'correlation' or 'product'");
        std::vector<std::pair<std::string, std::string>> quad = {
            {names[0], names[1]}, {names[2], names[3]},
            {names[4], names[5]}, {names[6], names[7]}};
        reports.push_back(chsh_statistic(data, quad, coding));
    }

    if (joint_test) reports.push_back(joint_consistency_test(data, config));

    Json out;
    out["schema_version"] = DIAGNOSTICS_SCHEMA;
    out["tool_version"] = HSMKIT_VERSION_STRING;
    out["data"] = data_path;
    out["diagnostics"] = Json::array();
    for (const auto& r : reports) out["diagnostics"].push_back(diagnostic_to_json(r));
    emit(out, out_path);
    return 0;
}

int run_compare(const std::string& data_path, const std::string& models_arg,
                const OptimizerConfig& config, const std::string& out_path) {
    auto names = split_names(models_arg);
    if (names.size() < 2)
        throw ValidationError("--models expects at least two comma-separated models");
    TableCollection data = load_tables(data_path);

    Json out;
    out["schema_version"] = COMPARISON_SCHEMA;
    out["tool_version"] = HSMKIT_VERSION_STRING;
    out["data"] = data_path;
    out["seed"] = config.seed;
    out["config"] = config_to_json(config);
    out["models"] = Json::array();

    double best_bic = 0.0;
    std::vector<FitResult> fits;
    for (const auto& name : names) {
        FittedModel fm = fit_one(name, data, config);
        fits.push_back(fm.fit);
        if (fits.size() == 1 || fm.fit.bic < best_bic) best_bic = fm.fit.bic;
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        Json m;
        m["name"] = names[i];
        m["g2"] = fits[i].g2;
        m["bic"] = fits[i].bic;
        m["n_params"] = fits[i].n_params;
        m["n_obs"] = fits[i].n_obs;
        m["delta_bic"] = fits[i].bic - best_bic;
        out["models"].push_back(std::move(m));
    }
    emit(out, out_path);
    return 0;
}

int run_predict(const std::string& report_path, const std::string& condition,
                const std::string& context_arg, const std::string& out_path) {
    FitReport report = load_report(report_path);
    if (is_baseline(report.model))
        throw ValidationError("predict needs a report produced from a model file; '" +
                              report.model + "' is a baseline without a specification");
    ModelSpec spec = load_model(report.model);
    auto context = split_names(context_arg);
    if (context.empty()) throw ValidationError("--context must name at least one variable");

    auto probs = predict_context(spec, report.fit.params, condition, context);

    TableCollection labels;
    labels.variables = spec.variables;
    Json out;
    out["schema_version"] = "hsmkit/prediction/1";
    out["tool_version"] = HSMKIT_VERSION_STRING;
    out["model"] = report.model;
    out["condition"] = condition;
    out["context"] = context;
    out["cell_labels"] = Json::array();
    for (std::size_t c = 0; c < probs.size(); ++c)
        out["cell_labels"].push_back(labels.cell_label(context, c));
    out["probabilities"] = probs;
    emit(out, out_path);
    return 0;
}

int run_simulate(const std::string& model_path, const std::string& params_path,
                 const std::string& design_path, std::uint64_t seed,
                 const std::string& out_path) {
    ModelSpec spec = load_model(model_path);
    auto params = load_params(params_path);
    auto design = load_design(design_path);
    TableCollection data = simulate_counts(spec, params, design, seed);
    if (out_path.empty())
        std::cout << tables_to_json(data).dump(2) << "\n";
    else
        save_tables(data, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hsmkit: Hilbert-space models for contingency tables"};
    app.set_version_flag("--version", std::string(HSMKIT_VERSION_STRING));
    app.require_subcommand(1);

    std::string data_path, model_arg, config_path, out_path, csv_path;
    std::string chsh_arg, coding_arg = "correlation", models_arg;
    std::string report_path, condition = "default", context_arg;
    std::string params_path, design_path;
    std::vector<std::string> variables;
    std::uint64_t seed_flag = 0;
    bool per_individual = false, joint_test = false;

    auto* fit = app.add_subcommand("fit", "fit a model and write a report");
    fit->add_option("--data", data_path, "tables file")->required();
    fit->add_option("--model", model_arg,
                    "model file, or one of: saturated, joint, bayesnet-psa")
        ->required();
    fit->add_option("--config", config_path, "optimizer config (TOML or JSON)");
    auto* fit_seed = fit->add_option("--seed", seed_flag, "optimizer seed");
    fit->add_option("--out", out_path, "report path (default: stdout)");
    fit->add_option("--csv", csv_path, "also export observed/predicted CSV");
    fit->add_flag("--per-individual", per_individual,
                  "data file holds many small collections; fit each");

    auto* diag = app.add_subcommand("diagnose", "contextuality diagnostics");
    diag->add_option("--data", data_path, "tables file")->required();
    diag->add_option("--chsh", chsh_arg,
                     "8 comma-separated names: A,I,H,I,H,U,A,U");
    diag->add_option("--coding", coding_arg, "chsh coding: correlation|product");
    diag->add_option("--variable", variables,
                     "variable for a marginal-invariance report (repeatable)");
    diag->add_flag("--joint", joint_test, "run the saturated-vs-joint test");
    diag->add_option("--config", config_path, "optimizer config for --joint");
    auto* diag_seed = diag->add_option("--seed", seed_flag, "optimizer seed");
    diag->add_option("--out", out_path, "output path (default: stdout)");

    auto* cmp = app.add_subcommand("compare", "fit several models, rank by BIC");
    cmp->add_option("--data", data_path, "tables file")->required();
    cmp->add_option("--models", models_arg, "comma-separated model list")->required();
    cmp->add_option("--config", config_path, "optimizer config (TOML or JSON)");
    auto* cmp_seed = cmp->add_option("--seed", seed_flag, "optimizer seed");
    cmp->add_option("--out", out_path, "output path (default: stdout)");

    auto* pred = app.add_subcommand("predict", "predict a new context from a report");
    pred->add_option("--fit", report_path, "report produced by fit")->required();
    pred->add_option("--context", context_arg, "comma-separated variable names")
        ->required();
    pred->add_option("--condition", condition, "condition name (default: default)");
    pred->add_option("--out", out_path, "output path (default: stdout)");

    auto* sim = app.add_subcommand("simulate", "sample counts from a model");
    sim->add_option("--model", model_arg, "model file")->required();
    sim->add_option("--params", params_path, "parameter file")->required();
    sim->add_option("--design", design_path, "design file")->required();
    auto* sim_seed = sim->add_option("--seed", seed_flag, "simulation seed");
    sim->add_option("--out", out_path, "tables path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (fit->parsed())
            return run_fit(data_path, model_arg,
                           resolve_config(config_path, fit_seed->count() > 0, seed_flag),
                           per_individual, out_path, csv_path);
        if (diag->parsed())
            return run_diagnose(data_path, chsh_arg, coding_arg, variables, joint_test,
                                resolve_config(config_path, diag_seed->count() > 0,
                                               seed_flag),
                                out_path);
        if (cmp->parsed())
            return run_compare(data_path, models_arg,
                               resolve_config(config_path, cmp_seed->count() > 0,
                                              seed_flag),
                               out_path);
        if (pred->parsed()) return run_predict(report_path, condition, context_arg, out_path);
        if (sim->parsed()) {
            std::uint64_t seed = sim_seed->count() > 0 ? seed_flag : env_seed();
            return run_simulate(model_arg, params_path, design_path, seed, out_path);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const OptimizationError& e) {
        std::cerr << "optimizer error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
