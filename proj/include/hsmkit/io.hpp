#ifndef HSMKIT_IO_HPP
#define HSMKIT_IO_HPP

/* File formats. Everything on disk is self-describing JSON with a
   schema_version field of the form "hsmkit/<kind>/<major>"; loaders
   reject unknown kinds and major versions. Reports serialize with
   insertion-ordered keys so identical inputs give byte-identical files.

   CSV export is plot-ready: one row per (condition, context, cell) with
   columns condition, context, cell_label, observed, predicted, where
   observed is the observed relative frequency and predicted the model
   probability. */

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "model.hpp"
#include "tables.hpp"
#include "version.hpp"

namespace hsmkit {

using Json = nlohmann::ordered_json;

inline constexpr const char* TABLES_SCHEMA = "hsmkit/tables/1";
inline constexpr const char* MODEL_SCHEMA = "hsmkit/model/1";
inline constexpr const char* PARAMS_SCHEMA = "hsmkit/params/1";
inline constexpr const char* DESIGN_SCHEMA = "hsmkit/design/1";
inline constexpr const char* REPORT_SCHEMA = "hsmkit/report/1";
inline constexpr const char* DIAGNOSTICS_SCHEMA = "hsmkit/diagnostics/1";
inline constexpr const char* COMPARISON_SCHEMA = "hsmkit/comparison/1";

namespace detail {

inline void check_schema(const Json& j, const std::string& expected) {
    if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_string())
        throw ValidationError("file lacks a schema_version field (expected " + expected + ")");
    std::string got = j["schema_version"].get<std::string>();
    std::string::size_type cut = expected.rfind('/');
    std::string kind = expected.substr(0, cut + 1);
    if (got.rfind(kind, 0) != 0)
        throw ValidationError("schema_version '" + got + "' is not a " + kind + "* file");
    if (got != expected)
        throw ValidationError("unsupported major version in schema_version '" + got +
                              "' (supported: " + expected + ")");
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::string require_string(const Json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j[field].is_string())
        throw ValidationError(where + ": missing string field '" + field + "'");
    return j[field].get<std::string>();
}

inline const Json& require_array(const Json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j[field].is_array())
        throw ValidationError(where + ": missing array field '" + field + "'");
    return j[field];
}

inline std::string format_csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}

// ---- contingency tables ----

inline Json tables_to_json(const TableCollection& data) {
    Json j;
    j["schema_version"] = TABLES_SCHEMA;
    j["variables"] = Json::array();
    for (const auto& v : data.variables)
        j["variables"].push_back({{"name", v.name}, {"values", v.values}});
    j["conditions"] = data.conditions;
    j["tables"] = Json::array();
    for (const auto& t : data.tables)
        j["tables"].push_back(
            {{"condition", t.condition}, {"context", t.context}, {"counts", t.counts}});
    return j;
}

inline TableCollection tables_from_json(const Json& j) {
    detail::check_schema(j, TABLES_SCHEMA);
    TableCollection data;
    data.variables.clear();
    for (const auto& v : detail::require_array(j, "variables", "tables file")) {
        VariableSpec spec;
        spec.name = detail::require_string(v, "name", "variable entry");
        for (const auto& val : detail::require_array(v, "values", "variable entry"))
            spec.values.push_back(val.get<std::string>());
        data.variables.push_back(std::move(spec));
    }
    if (j.contains("conditions")) {
        data.conditions.clear();
        for (const auto& c : j["conditions"]) data.conditions.push_back(c.get<std::string>());
    }
    const Json& tables = detail::require_array(j, "tables", "tables file");
    for (std::size_t i = 0; i < tables.size(); ++i) {
        const Json& t = tables[i];
        ContextTable table;
        table.condition = t.contains("condition")
                              ? detail::require_string(t, "condition", "table entry")
                              : data.conditions.front();
        for (const auto& v : detail::require_array(t, "context", "table " + std::to_string(i)))
            table.context.push_back(v.get<std::string>());
        for (const auto& c : detail::require_array(t, "counts", "table " + std::to_string(i))) {
            if (!c.is_number())
                throw ValidationError("table " + std::to_string(i) + ": non-numeric count");
            table.counts.push_back(c.get<double>());
        }
        data.tables.push_back(std::move(table));
    }
    data.validate();
    return data;
}

inline TableCollection load_tables(const std::string& path) {
    return tables_from_json(detail::read_json_file(path));
}

inline void save_tables(const TableCollection& data, const std::string& path) {
    detail::write_text_file(path, tables_to_json(data).dump(2) + "\n");
}

// ---- model specifications ----

namespace detail {

inline std::string frame_kind_name(FrameSpec::Kind k) {
    switch (k) {
        case FrameSpec::Kind::Reference: return "reference";
        case FrameSpec::Kind::RotatedFull: return "rotated_full";
        case FrameSpec::Kind::RotatedPlanar: return "rotated_planar";
    }
    throw ValidationError("unknown frame kind");
}

inline FrameSpec::Kind frame_kind_from_name(const std::string& s) {
    if (s == "reference") return FrameSpec::Kind::Reference;
    if (s == "rotated_full") return FrameSpec::Kind::RotatedFull;
    if (s == "rotated_planar") return FrameSpec::Kind::RotatedPlanar;
    throw ValidationError("unknown frame kind '" + s + "'");
}

}

inline Json model_to_json(const ModelSpec& spec) {
    Json j;
    j["schema_version"] = MODEL_SCHEMA;
    j["parameter_layout"] =
        "per condition: dimension-1 hyperspherical magnitude angles, then "
        "dimension-1 phases (complex state field only); then rotation blocks in "
        "slot order (planar: one theta; full: d-1 diagonals then magnitude,phase "
        "per upper off-diagonal, row-major), repeated per condition when "
        "shared_rotations is false";
    j["variables"] = Json::array();
    for (const auto& v : spec.variables)
        j["variables"].push_back({{"name", v.name}, {"values", v.values}});
    j["slots"] = Json::array();
    for (const auto& s : spec.slots)
        j["slots"].push_back(
            {{"reference_variable", s.reference_variable}, {"multiplicity", s.multiplicity}});
    j["assignment"] = Json::array();
    for (const auto& [name, a] : spec.assignment)
        j["assignment"].push_back({{"variable", name},
                                   {"slot", a.slot},
                                   {"frame", {{"kind", detail::frame_kind_name(a.frame.kind)}}}});
    j["conditions"] = spec.conditions;
    j["shared_rotations"] = spec.shared_rotations;
    j["state_field"] = spec.state_field == ModelSpec::StateField::Complex ? "complex" : "real";
    return j;
}

inline ModelSpec model_from_json(const Json& j) {
    detail::check_schema(j, MODEL_SCHEMA);
    ModelSpec spec;
    for (const auto& v : detail::require_array(j, "variables", "model file")) {
        VariableSpec var;
        var.name = detail::require_string(v, "name", "variable entry");
        for (const auto& val : detail::require_array(v, "values", "variable entry"))
            var.values.push_back(val.get<std::string>());
        spec.variables.push_back(std::move(var));
    }
    for (const auto& s : detail::require_array(j, "slots", "model file")) {
        SlotSpec slot;
        slot.reference_variable = detail::require_string(s, "reference_variable", "slot entry");
        slot.multiplicity = s.value("multiplicity", std::size_t{1});
        spec.slots.push_back(std::move(slot));
    }
    spec.assignment.clear();
    for (const auto& a : detail::require_array(j, "assignment", "model file")) {
        VariableAssignment va;
        std::string name = detail::require_string(a, "variable", "assignment entry");
        if (!a.contains("slot") || !a["slot"].is_number_unsigned())
            throw ValidationError("assignment entry for '" + name + "': missing slot index");
        va.slot = a["slot"].get<std::size_t>();
        if (!a.contains("frame") || !a["frame"].is_object())
            throw ValidationError("assignment entry for '" + name + "': missing frame object");
        va.frame.kind = detail::frame_kind_from_name(
            detail::require_string(a["frame"], "kind", "frame of '" + name + "'"));
        spec.assignment.emplace_back(std::move(name), va);
    }
    if (j.contains("conditions")) {
        spec.conditions.clear();
        for (const auto& c : j["conditions"]) spec.conditions.push_back(c.get<std::string>());
    }
    spec.shared_rotations = j.value("shared_rotations", true);
    std::string field = j.value("state_field", std::string("complex"));
    if (field == "complex") spec.state_field = ModelSpec::StateField::Complex;
    else if (field == "real") spec.state_field = ModelSpec::StateField::Real;
    else throw ValidationError("model file: unknown state_field '" + field + "'");
    spec.validate();
    return spec;
}

inline ModelSpec load_model(const std::string& path) {
    return model_from_json(detail::read_json_file(path));
}

inline void save_model(const ModelSpec& spec, const std::string& path) {
    detail::write_text_file(path, model_to_json(spec).dump(2) + "\n");
}

// ---- parameter vectors and simulation designs ----

inline std::vector<double> load_params(const std::string& path) {
    Json j = detail::read_json_file(path);
    const Json* arr = nullptr;
    if (j.is_array()) {
        arr = &j;
    } else {
        detail::check_schema(j, PARAMS_SCHEMA);
        arr = &detail::require_array(j, "values", "params file");
    }
    std::vector<double> out;
    for (const auto& v : *arr) {
        if (!v.is_number()) throw ValidationError("params file: non-numeric entry");
        out.push_back(v.get<double>());
    }
    return out;
}

inline void save_params(const std::vector<double>& params, const std::string& path) {
    Json j;
    j["schema_version"] = PARAMS_SCHEMA;
    j["values"] = params;
    detail::write_text_file(path, j.dump(2) + "\n");
}

inline std::vector<DesignRow> load_design(const std::string& path) {
    Json j = detail::read_json_file(path);
    detail::check_schema(j, DESIGN_SCHEMA);
    std::vector<DesignRow> rows;
    for (const auto& r : detail::require_array(j, "rows", "design file")) {
        DesignRow row;
        row.condition = r.value("condition", std::string("default"));
        for (const auto& v : detail::require_array(r, "context", "design row"))
            row.context.push_back(v.get<std::string>());
        if (!r.contains("n") || !r["n"].is_number_unsigned())
            throw ValidationError("design row: missing sample size 'n'");
        row.n = r["n"].get<std::uint64_t>();
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("design file: no rows");
    return rows;
}

// ---- diagnostics and fit reports ----

inline Json diagnostic_to_json(const DiagnosticReport& r) {
    Json j;
    j["kind"] = r.kind;
    j["verdict"] = r.verdict;
    j["statistics"] = r.statistics;
    if (!r.labels.empty()) j["labels"] = r.labels;
    j["details"] = Json::array();
    for (const auto& row : r.details)
        j["details"].push_back({{"item", row.item}, {"values", row.values}});
    return j;
}

inline DiagnosticReport diagnostic_from_json(const Json& j) {
    DiagnosticReport r;
    r.kind = detail::require_string(j, "kind", "diagnostic");
    r.verdict = detail::require_string(j, "verdict", "diagnostic");
    if (j.contains("statistics"))
        for (const auto& [k, v] : j["statistics"].items()) r.statistics[k] = v.get<double>();
    if (j.contains("labels"))
        for (const auto& [k, v] : j["labels"].items()) r.labels[k] = v.get<std::string>();
    if (j.contains("details"))
        for (const auto& row : j["details"]) {
            DetailRow d;
            d.item = detail::require_string(row, "item", "diagnostic detail");
            for (const auto& [k, v] : row["values"].items()) d.values[k] = v.get<double>();
            r.details.push_back(std::move(d));
        }
    return r;
}

struct PredictedTable {
    std::string condition;
    std::vector<std::string> context;
    std::vector<double> observed;   // counts
    std::vector<double> predicted;  // probabilities
};

struct FitReport {
    std::string model;  // model file stem or baseline name
    std::vector<std::string> conditions;
    FitResult fit;
    std::vector<PredictedTable> predicted_tables;
    std::vector<DiagnosticReport> diagnostics;
    std::string tool_version = HSMKIT_VERSION_STRING;
    OptimizerConfig config;
    std::uint64_t seed = 0;
};

inline Json config_to_json(const OptimizerConfig& c) {
    Json j;
    j["swarm_size"] = c.swarm_size;
    j["iterations"] = c.iterations;
    j["inertia"] = c.inertia;
    j["cognitive"] = c.cognitive;
    j["social"] = c.social;
    j["restarts"] = c.restarts;
    j["seed"] = c.seed;
    j["polish"] = c.polish;
    j["polish_tolerance"] = c.polish_tolerance;
    return j;
}

inline OptimizerConfig config_from_json(const Json& j, OptimizerConfig base = {}) {
    static const char* known[] = {"swarm_size", "iterations", "inertia",
                                  "cognitive",  "social",     "restarts",
                                  "seed",       "polish",     "polish_tolerance"};
    for (const auto& [k, v] : j.items()) {
        (void)v;
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ValidationError("config: unknown key '" + k + "'");
    }
    base.swarm_size = j.value("swarm_size", base.swarm_size);
    base.iterations = j.value("iterations", base.iterations);
    base.inertia = j.value("inertia", base.inertia);
    base.cognitive = j.value("cognitive", base.cognitive);
    base.social = j.value("social", base.social);
    base.restarts = j.value("restarts", base.restarts);
    base.seed = j.value("seed", base.seed);
    base.polish = j.value("polish", base.polish);
    base.polish_tolerance = j.value("polish_tolerance", base.polish_tolerance);
    base.validate();
    return base;
}

inline Json report_to_json(const FitReport& r) {
    Json j;
    j["schema_version"] = REPORT_SCHEMA;
    j["tool_version"] = r.tool_version;
    j["model"] = r.model;
    j["conditions"] = r.conditions;
    j["seed"] = r.seed;
    j["config"] = config_to_json(r.config);
    Json fit;
    fit["g2"] = r.fit.g2;
    fit["bic"] = r.fit.bic;
    fit["n_params"] = r.fit.n_params;
    fit["n_obs"] = r.fit.n_obs;
    fit["evaluations"] = r.fit.evaluations;
    fit["per_restart_g2"] = r.fit.per_restart_g2;
    fit["params"] = r.fit.params;
    j["fit"] = std::move(fit);
    j["predicted_tables"] = Json::array();
    for (const auto& t : r.predicted_tables)
        j["predicted_tables"].push_back({{"condition", t.condition},
                                         {"context", t.context},
                                         {"observed", t.observed},
                                         {"predicted", t.predicted}});
    j["diagnostics"] = Json::array();
    for (const auto& d : r.diagnostics) j["diagnostics"].push_back(diagnostic_to_json(d));
    return j;
}

inline FitReport report_from_json(const Json& j) {
    detail::check_schema(j, REPORT_SCHEMA);
    FitReport r;
    r.tool_version = detail::require_string(j, "tool_version", "report");
    r.model = detail::require_string(j, "model", "report");
    for (const auto& c : detail::require_array(j, "conditions", "report"))
        r.conditions.push_back(c.get<std::string>());
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("config")) r.config = config_from_json(j["config"]);
    const Json& fit = j.at("fit");
    r.fit.g2 = fit.value("g2", 0.0);
    r.fit.bic = fit.value("bic", 0.0);
    r.fit.n_params = fit.value("n_params", 0);
    r.fit.n_obs = fit.value("n_obs", 0LL);
    r.fit.evaluations = fit.value("evaluations", 0LL);
    for (const auto& v : fit.value("per_restart_g2", Json::array()))
        r.fit.per_restart_g2.push_back(v.get<double>());
    for (const auto& v : fit.value("params", Json::array()))
        r.fit.params.push_back(v.get<double>());
    for (const auto& t : j.value("predicted_tables", Json::array())) {
        PredictedTable p;
        p.condition = detail::require_string(t, "condition", "predicted table");
        for (const auto& v : detail::require_array(t, "context", "predicted table"))
            p.context.push_back(v.get<std::string>());
        for (const auto& v : detail::require_array(t, "observed", "predicted table"))
            p.observed.push_back(v.get<double>());
        for (const auto& v : detail::require_array(t, "predicted", "predicted table"))
            p.predicted.push_back(v.get<double>());
        r.predicted_tables.push_back(std::move(p));
    }
    for (const auto& d : j.value("diagnostics", Json::array()))
        r.diagnostics.push_back(diagnostic_from_json(d));
    return r;
}

inline FitReport load_report(const std::string& path) {
    return report_from_json(detail::read_json_file(path));
}

inline void save_report(const FitReport& r, const std::string& path) {
    detail::write_text_file(path, report_to_json(r).dump(2) + "\n");
}

/* One CSV row per (condition, context, cell); observed is the observed
   relative frequency, predicted the model probability. The cell labels
   need the variable value labels, hence the extra argument. */
inline void export_csv(const FitReport& r, const TableCollection& data, const std::string& path) {
    std::ostringstream out;
    out << "condition,context,cell_label,observed,predicted\n";
    for (const auto& t : r.predicted_tables) {
        double total = 0.0;
        for (double c : t.observed) total += c;
        std::string context;
        for (std::size_t i = 0; i < t.context.size(); ++i)
            context += (i ? "," : "") + t.context[i];
        for (std::size_t cell = 0; cell < t.observed.size(); ++cell) {
            out << t.condition << ",\"" << context << "\"," << data.cell_label(t.context, cell)
                << ',' << detail::format_csv_number(total > 0.0 ? t.observed[cell] / total : 0.0)
                << ',' << detail::format_csv_number(t.predicted[cell]) << '\n';
        }
    }
    detail::write_text_file(path, out.str());
}

// ---- optimizer config files (TOML or JSON) ----

namespace detail {

inline std::string strip_toml(const std::string& line) {
    std::string out;
    bool in_string = false;
    for (char ch : line) {
        if (ch == '"') in_string = !in_string;
        if (ch == '#' && !in_string) break;
        out += ch;
    }
    std::size_t a = out.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = out.find_last_not_of(" \t\r");
    return out.substr(a, b - a + 1);
}

// Flat TOML subset: key = value lines, '#' comments, optional [table]
// headers (ignored). Values: integers, floats, booleans.
inline Json parse_flat_toml(std::istream& in, const std::string& where) {
    Json j = Json::object();
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_toml(raw);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(where + " line " + std::to_string(lineno) +
                                  ": expected key = value");
        std::string key = strip_toml(line.substr(0, eq));
        std::string value = strip_toml(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError(where + " line " + std::to_string(lineno) +
                                  ": empty key or value");
        if (value == "true" || value == "false") {
            j[key] = value == "true";
        } else {
            try {
                std::size_t used = 0;
                if (value.find_first_of(".eE") == std::string::npos &&
                    value.find("inf") == std::string::npos) {
                    long long v = std::stoll(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                    j[key] = v;
                } else {
                    double v = std::stod(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                    j[key] = v;
                }
            } catch (const std::exception&) {
                throw ValidationError(where + " line " + std::to_string(lineno) +
                                      ": cannot parse value '" + value + "'");
            }
        }
    }
    return j;
}

}

/* Accepts either JSON (content starts with '{') or a flat TOML file;
   keys mirror the OptimizerConfig field names. */
inline OptimizerConfig load_optimizer_config(const std::string& path, OptimizerConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    Json j;
    if (first != std::string::npos && text[first] == '{') {
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("'" + path + "': " + e.what());
        }
    } else {
        std::istringstream stream(text);
        j = detail::parse_flat_toml(stream, "'" + path + "'");
    }
    return config_from_json(j, base);
}

}

#endif
