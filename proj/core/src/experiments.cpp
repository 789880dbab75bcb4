#include "qlink/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlink/cow.hpp"
#include "qlink/photonics.hpp"
#include "qlink/rng.hpp"
#include "qlink/tomography.hpp"

namespace qlink {

using nlohmann::json;

namespace {

StateRecords simulate_tomogram(StateLabel state, const ChannelModel& channel,
                               const LinkBudget& link, double mu, std::int64_t shots,
                               std::uint64_t seed, const char* stream) {
    StateRecords records;
    for (size_t b = 0; b < 3; ++b) {
        const Basis basis = static_cast<Basis>(b);
        const std::string name = std::string(stream) + "/" + state_name(state) + "/" +
                                 basis_name(basis);
        Rng rng(substream_seed(seed, name));
        records[b] = measure_in_basis(state, basis, shots, link, channel, mu, rng);
    }
    return records;
}

std::string format_counts_csv(const std::array<StateRecords, 6>& all) {
    std::string out = "input_state,basis,outcome,count\n";
    char buf[96];
    for (size_t s = 0; s < 6; ++s) {
        for (const MeasurementRecord& rec : all[s]) {
            std::snprintf(buf, sizeof buf, "%s,%s,+,%lld\n",
                          state_name(static_cast<StateLabel>(s)), basis_name(rec.basis),
                          static_cast<long long>(rec.n_plus));
            out += buf;
            std::snprintf(buf, sizeof buf, "%s,%s,-,%lld\n",
                          state_name(static_cast<StateLabel>(s)), basis_name(rec.basis),
                          static_cast<long long>(rec.n_minus));
            out += buf;
        }
    }
    return out;
}

std::string format_fidelity_csv(const std::array<StateEstimate, 6>& est) {
    std::string out = "state,fidelity,std\n";
    char buf[96];
    for (size_t s = 0; s < 6; ++s) {
        std::snprintf(buf, sizeof buf, "%s,%.9f,%.3e\n",
                      state_name(static_cast<StateLabel>(s)), est[s].fidelity_to_ideal,
                      est[s].fidelity_std);
        out += buf;
    }
    return out;
}

void run_qst(const ExperimentConfig& cfg, RunReport& report, json& metrics) {
    const ChannelModel channel = cfg.channel();
    std::array<StateRecords, 6> records{};
    if (cfg.qst.counts_file) {
        const CountsTable table = load_counts_csv(*cfg.qst.counts_file);
        for (size_t s = 0; s < 6; ++s) records[s] = table.require(static_cast<StateLabel>(s));
    } else {
        for (size_t s = 0; s < 6; ++s)
            records[s] = simulate_tomogram(static_cast<StateLabel>(s), channel, cfg.link,
                                           cfg.protocol.mu, cfg.qst.shots_per_basis,
                                           cfg.seed, "qst");
    }
    std::array<StateEstimate, 6> estimates{};
    json table = json::array();
    for (size_t s = 0; s < 6; ++s) {
        const StateLabel label = static_cast<StateLabel>(s);
        estimates[s] = reconstruct_state(records[s], ideal_ket(label), cfg.qst.mc_samples,
                                         substream_seed(cfg.seed, std::string("qst/mc/") +
                                                                      state_name(label)));
        table.push_back({{"state", state_name(label)},
                         {"fidelity", estimates[s].fidelity_to_ideal},
                         {"fidelity_std", estimates[s].fidelity_std}});
    }
    metrics["state_fidelities"] = table;
    report.files["state_fidelities.csv"] = format_fidelity_csv(estimates);
    report.files["counts.csv"] = format_counts_csv(records);
}

void run_qpt(const ExperimentConfig& cfg, RunReport& report, json& metrics) {
    const ChannelModel channel = cfg.channel();
    constexpr std::array<StateLabel, 4> probes = {StateLabel::Zero, StateLabel::One,
                                                  StateLabel::Plus, StateLabel::PlusI};
    ProcessRecords out_records{};
    ProcessRecords in_records{};
    if (cfg.qpt.counts_file) {
        const CountsTable tbl = load_counts_csv(*cfg.qpt.counts_file);
        for (size_t p = 0; p < 4; ++p) {
            out_records[p] = tbl.require(probes[p]);
            in_records[p] = out_records[p];  // no separate back-to-back data in a counts file
        }
    } else {
        const ChannelModel ident = ChannelModel::identity();
        for (size_t p = 0; p < 4; ++p) {
            out_records[p] = simulate_tomogram(probes[p], channel, cfg.link, cfg.protocol.mu,
                                               cfg.qpt.shots_per_basis, cfg.seed, "qpt/out");
            in_records[p] = simulate_tomogram(probes[p], ident, cfg.link, cfg.protocol.mu,
                                              cfg.qpt.shots_per_basis, cfg.seed, "qpt/in");
        }
    }

    auto estimate_from = [&](const ProcessRecords& recs) {
        std::array<ProcessPair, 4> pairs = {
            ProcessPair{DensityMatrix::from_label(probes[0]), DensityMatrix::maximally_mixed()},
            ProcessPair{DensityMatrix::from_label(probes[1]), DensityMatrix::maximally_mixed()},
            ProcessPair{DensityMatrix::from_label(probes[2]), DensityMatrix::maximally_mixed()},
            ProcessPair{DensityMatrix::from_label(probes[3]), DensityMatrix::maximally_mixed()}};
        for (size_t p = 0; p < 4; ++p)
            pairs[p].second = project_physical_state(qst_linear(recs[p]));
        return reconstruct_process(pairs);
    };
    const ProcessEstimate out_est = estimate_from(out_records);
    const ProcessEstimate in_est = estimate_from(in_records);

    FidelityReport fid;
    fid.f0 = out_est.f_proc;
    fid.f1 = in_est.f_proc;
    fid.f2 = process_fidelity(out_est.chi, in_est.chi);
    fid.uncertainties[0] = monte_carlo_process_uncertainty(
        out_records, cfg.qpt.mc_samples, substream_seed(cfg.seed, "qpt/mc/out"));
    fid.uncertainties[1] = monte_carlo_process_uncertainty(
        in_records, cfg.qpt.mc_samples, substream_seed(cfg.seed, "qpt/mc/in"));
    // F2 spread: the output-side resampling dominates; reuse its scale.
    fid.uncertainties[2] = fid.uncertainties[0];

    metrics["f_proc"] = out_est.f_proc;
    metrics["f0"] = fid.f0;
    metrics["f1"] = fid.f1;
    metrics["f2"] = fid.f2;
    metrics["f0_std"] = fid.uncertainties[0];
    metrics["f1_std"] = fid.uncertainties[1];
    metrics["f2_std"] = fid.uncertainties[2];
    metrics["tp_deviation"] = out_est.tp_deviation;
    metrics["psd_correction"] = out_est.psd_correction;

    report.files["chi.txt"] = format_process_matrix(out_est.chi);
    report.files["bloch_mesh.csv"] = format_mesh_csv(bloch_ellipsoid(out_est.chi, 25, 48));
    report.files["counts.csv"] = format_counts_csv({out_records[0], out_records[1],
                                                    out_records[2], out_records[3],
                                                    in_records[2], in_records[3]});
}

void run_cow(const ExperimentConfig& cfg, RunReport& report, json& metrics) {
    FieldTrialConfig trial;
    trial.duration_s = cfg.cow.duration_s;
    trial.link = cfg.link;
    trial.protocol = cfg.protocol;
    trial.optics = cfg.optics;
    trial.drift = cfg.drift;
    trial.feedback = cfg.feedback;
    trial.pid_enabled = cfg.cow.pid_enabled;

    Rng trial_rng(substream_seed(cfg.seed, "cow/trial"));
    const std::vector<WindowStats> windows = run_field_trial(trial, trial_rng);
    const TrialSummary summary = summarize_trial(windows);

    metrics["mean_qber"] = summary.mean_qber;
    metrics["mean_visibility"] = summary.mean_visibility;
    metrics["min_visibility"] = summary.min_visibility;
    metrics["total_sifted"] = summary.total_sifted;
    metrics["n_windows"] = windows.size();

    SkrParams skr;
    skr.config = cfg.protocol;
    skr.link = cfg.link;
    skr.qber = summary.mean_qber;
    skr.visibility = summary.mean_visibility;
    const SkrResult headline = secret_key_rate(skr);
    metrics["skr_bits_per_pulse"] = headline.bits_per_pulse;
    metrics["skr_bits_per_s"] = headline.bits_per_s;

    report.files["sift_report.csv"] = format_sift_csv(windows);

    if (cfg.cow.event_export_slots > 0) {
        // Slot-level segment for event-format export and decoding checks.
        Rng seg_rng(substream_seed(cfg.seed, "cow/segment"));
        std::vector<std::uint8_t> bits;
        bits.reserve(static_cast<size_t>(cfg.cow.event_export_slots));
        std::uniform_int_distribution<int> coin(0, 1);
        for (std::int64_t i = 0; i < cfg.cow.event_export_slots; ++i)
            bits.push_back(static_cast<std::uint8_t>(coin(seg_rng)));
        const SlotSequence sent = encode(bits, cfg.protocol, seg_rng);
        const DetectionRecord det = transmit_and_detect(
            sent, cfg.link, cfg.protocol, cfg.optics, cfg.drift.initial_phase_rad, seg_rng);
        report.files["detections.csv"] = format_detection_csv(det);
        const SiftStats seg = decode_and_sift(sent, det);
        metrics["segment_sifted"] = seg.n_sifted;
        metrics["segment_qber"] = seg.qber;
    }
}

void run_skr(const ExperimentConfig& cfg, RunReport& report, json& metrics) {
    SkrParams base;
    base.config = cfg.protocol;
    base.link = cfg.link;
    base.qber = cfg.skr.qber;
    base.visibility = cfg.skr.visibility;

    if (cfg.skr.fit_enabled) {
        base.link.excess_loss_db =
            fit_excess_loss(base, cfg.skr.fit_attenuation_db, cfg.skr.fit_bits_per_pulse);
        metrics["fitted_excess_loss_db"] = base.link.excess_loss_db;
    }

    std::vector<double> attens;
    for (double db = cfg.skr.attenuation_min_db; db <= cfg.skr.attenuation_max_db + 1e-9;
         db += cfg.skr.attenuation_step_db)
        attens.push_back(db);
    const std::vector<SkrPoint> curve = skr_sweep(base, attens);
    report.files["skr_curve.csv"] = format_skr_csv(curve);

    json points = json::array();
    for (const SkrPoint& p : curve)
        points.push_back({{"attenuation_db", p.attenuation_db},
                          {"bits_per_pulse", p.result.bits_per_pulse}});
    metrics["curve"] = points;

    // Locate the key-rate cutoff when the sweep brackets it.
    if (curve.front().result.bits_per_pulse > 0.0 &&
        curve.back().result.bits_per_pulse == 0.0) {
        metrics["cutoff_attenuation_db"] = skr_cutoff_attenuation(
            base, cfg.skr.attenuation_min_db, cfg.skr.attenuation_max_db);
    }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    RunReport report;
    report.scenario = scenario_name(config.scenario);
    report.config_hash = config_hash(config);
    report.seed = config.seed;

    json metrics = json::object();
    switch (config.scenario) {
        case Scenario::Qst: run_qst(config, report, metrics); break;
        case Scenario::Qpt: run_qpt(config, report, metrics); break;
        case Scenario::Cow: run_cow(config, report, metrics); break;
        case Scenario::SkrSweep: run_skr(config, report, metrics); break;
    }

    json j;
    j["scenario"] = report.scenario;
    j["config_hash"] = report.config_hash;
    j["seed"] = report.seed;
    j["format_version"] = 1;
    j["metrics"] = metrics;
    j["config"] = json::parse(canonical_config_json(config));
    report.files["report.json"] = j.dump(2) + "\n";
    return report;
}

void write_report(const RunReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : report.files) {
        const std::filesystem::path path = std::filesystem::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
    }
}

const std::string& emit_plot_data(const RunReport& report, const std::string& target) {
    static const std::map<std::string, std::string> kTargets = {
        {"state_fidelities", "state_fidelities.csv"},
        {"bloch_mesh", "bloch_mesh.csv"},
        {"qber_timeseries", "sift_report.csv"},
        {"skr_curve", "skr_curve.csv"}};
    const auto it = kTargets.find(target);
    if (it == kTargets.end())
        throw std::invalid_argument("unknown plot target '" + target +
                                    "' (expected state_fidelities|bloch_mesh|qber_timeseries|skr_curve)");
    const auto file = report.files.find(it->second);
    if (file == report.files.end())
        throw std::invalid_argument("report for scenario '" + report.scenario +
                                    "' does not contain " + it->second +
                                    "; run the matching scenario first");
    return file->second;
}

}  // namespace qlink
