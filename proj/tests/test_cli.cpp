#include <catch2/catch_amalgamated.hpp>

#include <hsmkit/io.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace hsmkit;

namespace {

std::string cli() { return HSMKIT_CLI_PATH; }

std::string data_path(const std::string& name) {
    return std::string(HSMKIT_DATA_DIR) + "/" + name;
}

std::filesystem::path tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "hsmkit_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string tmp_path(const std::string& name) { return (tmp_dir() / name).string(); }

int run(const std::string& cmd) {
    int rc = std::system((cmd + " 2> /dev/null").c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string quick_config() {
    auto path = tmp_path("quick.toml");
    spit(path, "swarm_size = 12\niterations = 120\nrestarts = 2\nseed = 5\n");
    return path;
}

Json parse_file(const std::string& path) { return Json::parse(slurp(path)); }

}  // namespace

TEST_CASE("version flag and usage errors", "[cli]") {
    auto out = tmp_path("version.txt");
    CHECK(run(cli() + " --version > " + out) == 0);
    CHECK(slurp(out).find(HSMKIT_VERSION_STRING) != std::string::npos);

    CHECK(run(cli() + " > /dev/null") == 1);
    CHECK(run(cli() + " fit --nonsense x > /dev/null") == 1);
    CHECK(run(cli() + " fit > /dev/null") == 1);  // --data and --model required
}

TEST_CASE("fit with the joint baseline writes a full report", "[cli]") {
    auto report_path = tmp_path("joint_report.json");
    auto csv_path = tmp_path("joint_report.csv");
    int rc = run(cli() + " fit --data " + data_path("artificial_tables.json") +
                 " --model joint --config " + quick_config() + " --out " + report_path +
                 " --csv " + csv_path);
    REQUIRE(rc == 0);

    auto report = load_report(report_path);
    CHECK(report.model == "joint");
    CHECK(report.seed == 5);
    CHECK(report.config.swarm_size == 12);
    CHECK(report.fit.n_params == 15);
    CHECK(report.fit.n_obs == 800);
    CHECK(report.fit.bic ==
          Catch::Approx(report.fit.g2 + 15.0 * std::log(800.0)).margin(1e-9));
    REQUIRE(report.predicted_tables.size() == 8);
    for (const auto& t : report.predicted_tables) {
        double sum = 0.0;
        for (double p : t.predicted) sum += p;
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    }

    std::istringstream csv(slurp(csv_path));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 1 + 8 * 4);
}

TEST_CASE("fit with a model file reports its parameter count", "[cli]") {
    auto report_path = tmp_path("hsm_report.json");
    int rc = run(cli() + " fit --data " + data_path("artificial_tables.json") +
                 " --model " + data_path("artificial_hsm_model.json") + " --config " +
                 quick_config() + " --out " + report_path);
    REQUIRE(rc == 0);
    auto report = load_report(report_path);
    CHECK(report.fit.n_params == 12);
    CHECK(report.model == data_path("artificial_hsm_model.json"));
}

TEST_CASE("fit prints to stdout when --out is omitted", "[cli]") {
    auto out = tmp_path("stdout_report.json");
    int rc = run(cli() + " fit --data " + data_path("artificial_tables.json") +
                 " --model saturated > " + out);
    REQUIRE(rc == 0);
    auto report = report_from_json(parse_file(out));
    CHECK(report.model == "saturated");
    CHECK(report.fit.n_params == 24);
    CHECK(report.fit.g2 == Catch::Approx(report.fit.bic - 24.0 * std::log(800.0))
                               .margin(1e-9));
}

TEST_CASE("per-individual fit emits one report per entry", "[cli]") {
    auto input = tmp_path("individuals.json");
    spit(input, R"({
  "schema_version": "hsmkit/individuals/1",
  "variables": [{"name": "A", "values": ["yes", "no"]},
                {"name": "B", "values": ["yes", "no"]}],
  "individuals": [
    {"id": "s01", "tables": [
      {"context": ["A", "B"], "counts": [5, 3, 2, 6]},
      {"context": ["B", "A"], "counts": [4, 4, 3, 5]}]},
    {"id": "s02", "tables": [
      {"context": ["A", "B"], "counts": [8, 1, 1, 6]},
      {"context": ["B", "A"], "counts": [7, 2, 2, 5]}]}
  ]
})");
    auto out = tmp_path("individuals_out.json");
    int rc = run(cli() + " fit --data " + input + " --model joint --config " +
                 quick_config() + " --per-individual --out " + out);
    REQUIRE(rc == 0);
    Json j = parse_file(out);
    CHECK(j["schema_version"] == "hsmkit/individuals/1");
    REQUIRE(j["individuals"].size() == 2);
    CHECK(j["individuals"][0]["id"] == "s01");
    auto rep = report_from_json(j["individuals"][1]["report"]);
    CHECK(rep.fit.n_params == 3);
    CHECK(rep.predicted_tables.size() == 2);
}

TEST_CASE("compare ranks joint against saturated", "[cli]") {
    auto cfg = tmp_path("compare.toml");
    spit(cfg, "swarm_size = 40\niterations = 800\nrestarts = 3\nseed = 11\n");
    auto out = tmp_path("comparison.json");
    int rc = run(cli() + " compare --data " + data_path("artificial_tables.json") +
                 " --models joint,saturated --config " + cfg + " --out " + out);
    REQUIRE(rc == 0);

    Json j = parse_file(out);
    CHECK(j["schema_version"] == COMPARISON_SCHEMA);
    REQUIRE(j["models"].size() == 2);
    CHECK(j["models"][0]["name"] == "joint");
    CHECK(j["models"][1]["name"] == "saturated");

    double g2_joint = j["models"][0]["g2"].get<double>();
    double g2_sat = j["models"][1]["g2"].get<double>();
    // the artificial tables cannot come from one joint distribution
    CHECK(g2_joint - g2_sat == Catch::Approx(17.91).margin(0.5));

    double d0 = j["models"][0]["delta_bic"].get<double>();
    double d1 = j["models"][1]["delta_bic"].get<double>();
    CHECK(std::min(d0, d1) == 0.0);
    CHECK(std::max(d0, d1) > 0.0);
}

TEST_CASE("predict evaluates a new context from a fitted report", "[cli]") {
    auto report_path = tmp_path("predict_source.json");
    int rc = run(cli() + " fit --data " + data_path("artificial_tables.json") +
                 " --model " + data_path("artificial_hsm_model.json") + " --config " +
                 quick_config() + " --out " + report_path);
    REQUIRE(rc == 0);

    auto out = tmp_path("prediction.json");
    rc = run(cli() + " predict --fit " + report_path +
             " --context A,H,I --condition default --out " + out);
    REQUIRE(rc == 0);
    Json j = parse_file(out);
    CHECK(j["schema_version"] == "hsmkit/prediction/1");
    REQUIRE(j["probabilities"].size() == 8);
    CHECK(j["cell_labels"][0] == "YYY");
    double sum = 0.0;
    for (const auto& p : j["probabilities"]) sum += p.get<double>();
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));

    // baseline reports have no model specification to predict from
    auto sat_report = tmp_path("sat_report.json");
    REQUIRE(run(cli() + " fit --data " + data_path("artificial_tables.json") +
                " --model saturated --out " + sat_report) == 0);
    CHECK(run(cli() + " predict --fit " + sat_report + " --context A,H > /dev/null") == 1);
}

TEST_CASE("simulate is deterministic in the seed", "[cli]") {
    std::string base = cli() + " simulate --model " +
                       data_path("artificial_hsm_model.json") + " --params " +
                       data_path("artificial_hsm_params.json") + " --design " +
                       data_path("artificial_design.json");
    auto s1 = tmp_path("sim1.json");
    auto s2 = tmp_path("sim2.json");
    auto s3 = tmp_path("sim3.json");
    REQUIRE(run(base + " --seed 9 --out " + s1) == 0);
    REQUIRE(run(base + " --seed 9 --out " + s2) == 0);
    REQUIRE(run(base + " --seed 10 --out " + s3) == 0);
    CHECK(slurp(s1) == slurp(s2));
    CHECK(slurp(s1) != slurp(s3));

    auto sim = load_tables(s1);
    REQUIRE(sim.tables.size() == 8);
    for (const auto& t : sim.tables) CHECK(t.total() == 100.0);
}

TEST_CASE("seed precedence: flag beats config beats environment", "[cli]") {
    auto no_seed_cfg = tmp_path("noseed.toml");
    spit(no_seed_cfg, "swarm_size = 8\niterations = 30\nrestarts = 1\n");
    auto seeded_cfg = tmp_path("seeded.toml");
    spit(seeded_cfg, "swarm_size = 8\niterations = 30\nrestarts = 1\nseed = 33\n");
    std::string fit_cmd = cli() + " fit --data " + data_path("artificial_tables.json") +
                          " --model joint";
    auto out = tmp_path("seed_report.json");

    REQUIRE(run("HSMKIT_SEED=77 " + fit_cmd + " --config " + no_seed_cfg + " --out " +
                out) == 0);
    CHECK(load_report(out).seed == 77);

    REQUIRE(run("HSMKIT_SEED=77 " + fit_cmd + " --config " + seeded_cfg + " --out " +
                out) == 0);
    CHECK(load_report(out).seed == 33);

    REQUIRE(run("HSMKIT_SEED=77 " + fit_cmd + " --config " + seeded_cfg +
                " --seed 5 --out " + out) == 0);
    CHECK(load_report(out).seed == 5);

    CHECK(run("HSMKIT_SEED=banana " + fit_cmd + " --config " + no_seed_cfg +
              " > /dev/null") == 1);
}

TEST_CASE("diagnose bundles the requested reports", "[cli]") {
    auto out = tmp_path("diagnostics.json");
    int rc = run(cli() + " diagnose --data " + data_path("artificial_tables_printed.json") +
                 " --chsh A,I,H,I,H,U,A,U --variable I --joint --config " +
                 quick_config() + " --out " + out);
    REQUIRE(rc == 0);

    Json j = parse_file(out);
    CHECK(j["schema_version"] == DIAGNOSTICS_SCHEMA);
    REQUIRE(j["diagnostics"].size() == 4);

    bool saw_chsh = false, saw_marginal = false, saw_order = false, saw_joint = false;
    for (const auto& d : j["diagnostics"]) {
        auto r = diagnostic_from_json(d);
        if (r.kind == "chsh") {
            saw_chsh = true;
            CHECK(r.verdict == "violated");
            CHECK(r.statistics.at("chsh") == Catch::Approx(2.248).margin(1e-9));
        } else if (r.kind == "marginal_invariance") {
            saw_marginal = true;
            CHECK(r.statistics.at("max_discrepancy") ==
                  Catch::Approx(0.065).margin(1e-9));
        } else if (r.kind == "order_effect") {
            saw_order = true;
            CHECK(r.details.size() == 2);
        } else if (r.kind == "joint_test") {
            saw_joint = true;
            CHECK(r.statistics.at("df") == 9.0);
        }
    }
    CHECK(saw_chsh);
    CHECK(saw_marginal);
    CHECK(saw_order);
    CHECK(saw_joint);

    CHECK(run(cli() + " diagnose --data " + data_path("artificial_tables.json") +
              " --chsh A,I,H,I > /dev/null") == 1);
}

TEST_CASE("exit codes distinguish io from validation problems", "[cli]") {
    CHECK(run(cli() + " fit --data /no/such/file.json --model joint > /dev/null") == 3);

    auto future = tmp_path("future_schema.json");
    spit(future, "{\"schema_version\": \"hsmkit/tables/2\", \"variables\": [], "
                 "\"tables\": []}\n");
    CHECK(run(cli() + " fit --data " + future + " --model joint > /dev/null") == 1);

    auto garbled = tmp_path("garbled.json");
    spit(garbled, "{ not json");
    CHECK(run(cli() + " fit --data " + garbled + " --model joint > /dev/null") == 1);
}
