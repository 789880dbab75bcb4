#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qlink/config.hpp"
#include "qlink/experiments.hpp"

using namespace qlink;
using nlohmann::json;

namespace {

bool throws_mentioning(const std::string& text, const std::string& needle) {
    try {
        parse_config(text);
    } catch (const std::invalid_argument& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

}  // namespace

TEST_CASE("parse_config minimal document and defaults") {
    const ExperimentConfig cfg = parse_config(R"({"scenario": "qst", "seed": 42})");
    CHECK(cfg.scenario == Scenario::Qst);
    CHECK(cfg.seed == 42);
    CHECK(cfg.protocol.mu == 0.29);
    CHECK(cfg.link.detector_efficiency == 0.8);
    CHECK(cfg.qst.shots_per_basis == 1'000'000);
    for (double f : cfg.channel_fidelities) CHECK(f == 1.0);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("parse_config rejects malformed input") {
    CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
    // required fields
    CHECK(throws_mentioning(R"({"scenario": "qst"})", "seed"));
    CHECK(throws_mentioning(R"({"seed": 1})", "scenario"));
    // unknown keys, top-level and nested
    CHECK(throws_mentioning(R"({"scenario": "qst", "seed": 1, "bogus": 2})", "bogus"));
    CHECK(throws_mentioning(
        R"({"scenario": "qst", "seed": 1, "link": {"frobnicate": 1}})", "frobnicate"));
    // bad scenario name
    CHECK(throws_mentioning(R"({"scenario": "teleport", "seed": 1})", "teleport"));
    // domain violation caught by validate with a field-qualified message
    CHECK(throws_mentioning(
        R"({"scenario": "qst", "seed": 1, "protocol": {"mu": -1.0}})", "mu"));
}

TEST_CASE("canonical serialization round-trips and hashes stably") {
    const std::string text = R"({
        "scenario": "skr_sweep",
        "seed": 7,
        "link": {"channel_loss_db": 12.95},
        "skr": {"qber": 0.0025, "visibility": 0.992}
    })";
    const ExperimentConfig cfg = parse_config(text);
    const std::string canon = canonical_config_json(cfg);
    const ExperimentConfig again = parse_config(canon);
    CHECK(canonical_config_json(again) == canon);
    CHECK(config_hash(again) == config_hash(cfg));

    ExperimentConfig other = cfg;
    other.seed = 8;
    CHECK(config_hash(other) != config_hash(cfg));
    ExperimentConfig other2 = cfg;
    other2.link.channel_loss_db = 28.02;
    CHECK(config_hash(other2) != config_hash(cfg));
}

TEST_CASE("scenario names round-trip") {
    for (Scenario s : {Scenario::Qst, Scenario::Qpt, Scenario::Cow, Scenario::SkrSweep})
        CHECK(parse_scenario(scenario_name(s)) == s);
    CHECK_THROWS_AS(parse_scenario("nope"), std::invalid_argument);
}

TEST_CASE("qst run on a noiseless link reports unit fidelities") {
    ExperimentConfig cfg = parse_config(R"({
        "scenario": "qst",
        "seed": 11,
        "link": {"channel_loss_db": 0.0, "detector_efficiency": 1.0,
                 "dark_count_rate_per_ns": 0.0},
        "qst": {"shots_per_basis": 20000, "mc_samples": 100}
    })");
    const RunReport report = run_experiment(cfg);
    REQUIRE(report.files.count("report.json") == 1);
    REQUIRE(report.files.count("state_fidelities.csv") == 1);
    REQUIRE(report.files.count("counts.csv") == 1);

    const json j = json::parse(report.files.at("report.json"));
    CHECK(j["scenario"] == "qst");
    CHECK(j["config_hash"] == report.config_hash);
    const json& table = j["metrics"]["state_fidelities"];
    REQUIRE(table.size() == 6);
    for (const json& row : table) {
        // Transverse-axis shot noise pulls the point estimate slightly inside
        // the Bloch sphere even with a perfect link; the deficit is O(1/shots).
        CHECK(row["fidelity"].get<double>() > 1.0 - 1e-3);
    }
}

TEST_CASE("runs are deterministic in the config") {
    for (const char* text :
         {R"({"scenario": "qst", "seed": 3, "qst": {"shots_per_basis": 5000, "mc_samples": 100}})",
          R"({"scenario": "skr_sweep", "seed": 3})",
          R"({"scenario": "cow", "seed": 3, "cow": {"duration_s": 5.0, "event_export_slots": 500}})"}) {
        const ExperimentConfig cfg = parse_config(text);
        const RunReport a = run_experiment(cfg);
        const RunReport b = run_experiment(cfg);
        REQUIRE(a.files.size() == b.files.size());
        for (const auto& [name, content] : a.files) {
            REQUIRE(b.files.count(name) == 1);
            CHECK(content == b.files.at(name));
        }
    }
}

TEST_CASE("skr_sweep run produces the calibrated curve") {
    const ExperimentConfig cfg = parse_config(R"({"scenario": "skr_sweep", "seed": 1})");
    const RunReport report = run_experiment(cfg);
    REQUIRE(report.files.count("skr_curve.csv") == 1);
    const json j = json::parse(report.files.at("report.json"));
    CHECK(j["metrics"].contains("fitted_excess_loss_db"));
    CHECK(j["metrics"].contains("cutoff_attenuation_db"));
    const std::string& csv = report.files.at("skr_curve.csv");
    CHECK(csv.rfind("attenuation_db,", 0) == 0);
}

TEST_CASE("emit_plot_data targets and errors") {
    const ExperimentConfig cfg = parse_config(
        R"({"scenario": "qst", "seed": 2, "qst": {"shots_per_basis": 2000, "mc_samples": 100}})");
    const RunReport report = run_experiment(cfg);
    CHECK(emit_plot_data(report, "state_fidelities").rfind("state,", 0) == 0);
    CHECK_THROWS_AS((void)emit_plot_data(report, "skr_curve"), std::invalid_argument);
    CHECK_THROWS_AS((void)emit_plot_data(report, "spectrogram"), std::invalid_argument);
}

TEST_CASE("write_report materializes every file") {
    const ExperimentConfig cfg = parse_config(R"({"scenario": "skr_sweep", "seed": 5})");
    const RunReport report = run_experiment(cfg);
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "qlink_report_test";
    std::filesystem::remove_all(dir);
    write_report(report, dir.string());
    for (const auto& [name, content] : report.files) {
        std::ifstream in(dir / name, std::ios::binary);
        REQUIRE(in.good());
        std::string disk((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        CHECK(disk == content);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("counts file feeds the qst pipeline") {
    // Generate counts with one run, reload them via the counts_file path, and
    // check the reconstruction agrees.
    ExperimentConfig gen = parse_config(R"({
        "scenario": "qst",
        "seed": 13,
        "link": {"channel_loss_db": 0.0, "detector_efficiency": 1.0,
                 "dark_count_rate_per_ns": 0.0},
        "qst": {"shots_per_basis": 5000, "mc_samples": 100}
    })");
    const RunReport first = run_experiment(gen);
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "qlink_counts_test.csv";
    {
        std::ofstream out(path, std::ios::binary);
        out << first.files.at("counts.csv");
    }
    ExperimentConfig reuse = gen;
    reuse.qst.counts_file = path.string();
    const RunReport second = run_experiment(reuse);
    CHECK(second.files.at("counts.csv") == first.files.at("counts.csv"));
    CHECK(second.files.at("state_fidelities.csv") == first.files.at("state_fidelities.csv"));
    std::filesystem::remove(path);
}
