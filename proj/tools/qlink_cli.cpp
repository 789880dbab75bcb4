// Command-line experiment runner:
//   qlink run --config <path> --out-dir <path> [--seed N]
//   qlink validate --config <path>
//   qlink plot --report-dir <path> --target <name> [--out <path>]

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlink/config.hpp"
#include "qlink/experiments.hpp"

namespace {

// Rehydrate a report written by `run` so plot extraction can work offline.
qlink::RunReport load_report(const std::string& dir) {
    qlink::RunReport report;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        report.files[entry.path().filename().string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    const auto it = report.files.find("report.json");
    if (it == report.files.end())
        throw std::invalid_argument(dir + " does not contain report.json; run a scenario first");
    const nlohmann::json j = nlohmann::json::parse(it->second);
    report.scenario = j.at("scenario").get<std::string>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    return report;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-bin qubit link characterization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;

    CLI::App* run = app.add_subcommand("run", "Run a configured experiment scenario");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out-dir", out_dir, "Output directory");
    run->add_option("--seed", seed_override, "Override the config seed");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Check a config file and exit");
    validate->add_option("--config", validate_path, "Experiment config (JSON)")->required();

    std::string report_dir;
    std::string target;
    std::string plot_out;
    CLI::App* plot = app.add_subcommand("plot", "Extract one plot-ready CSV from a report");
    plot->add_option("--report-dir", report_dir, "Directory written by `run`")->required();
    plot->add_option("--target", target,
                     "state_fidelities | bloch_mesh | qber_timeseries | skr_curve")
        ->required();
    plot->add_option("--out", plot_out, "Destination file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) {
            const std::string& data = qlink::emit_plot_data(load_report(report_dir), target);
            if (plot_out.empty()) {
                std::fwrite(data.data(), 1, data.size(), stdout);
            } else {
                std::ofstream out(plot_out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + plot_out);
                out << data;
            }
            return 0;
        }
        if (validate->parsed()) {
            qlink::ExperimentConfig cfg = qlink::load_config(validate_path);
            std::printf("ok: scenario=%s seed=%llu hash=%s\n", qlink::scenario_name(cfg.scenario),
                        static_cast<unsigned long long>(cfg.seed),
                        qlink::config_hash(cfg).c_str());
            return 0;
        }
        qlink::ExperimentConfig cfg = qlink::load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        const qlink::RunReport report = qlink::run_experiment(cfg);
        qlink::write_report(report, out_dir);
        std::printf("scenario=%s seed=%llu hash=%s -> %s (%zu files)\n",
                    report.scenario.c_str(), static_cast<unsigned long long>(report.seed),
                    report.config_hash.c_str(), out_dir.c_str(), report.files.size());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
