#pragma once

// Structured experiment configuration: one JSON file with nested sections per
// subsystem, a mandatory seed, and a stable content hash for reproducibility
// tracking.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "qlink/cow.hpp"
#include "qlink/photonics.hpp"

namespace qlink {

enum class Scenario { Qst, Qpt, Cow, SkrSweep };

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

struct TomographyRunConfig {
    std::int64_t shots_per_basis = 1'000'000;
    int mc_samples = 200;
    // When set, reconstruct from this counts CSV instead of simulating.
    std::optional<std::string> counts_file;
};

struct CowRunConfig {
    double duration_s = 600.0;
    bool pid_enabled = true;
    // Size of the slot-level segment exported as a detection-event CSV.
    std::int64_t event_export_slots = 2000;
};

struct SkrRunConfig {
    double attenuation_min_db = 2.0;
    double attenuation_max_db = 60.0;
    double attenuation_step_db = 0.5;
    // Excess-loss calibration anchor; fit skipped when disabled.
    bool fit_enabled = true;
    double fit_attenuation_db = 12.95;
    double fit_bits_per_pulse = 5.78e-4;
    double qber = 0.0025;
    double visibility = 0.992;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Qst;
    std::uint64_t seed = 0;
    bool seed_set = false;

    LinkBudget link;
    ProtocolConfig protocol;
    // Six state-fidelity targets (|0>,|1>,|+>,|->,|+i>,|-i>) defining the
    // simulated channel's Bloch deformation.
    std::array<double, 6> channel_fidelities = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    PhaseDriftModel drift;
    FeedbackConfig feedback;
    OpticalImperfections optics;

    TomographyRunConfig qst;
    TomographyRunConfig qpt;
    CowRunConfig cow;
    SkrRunConfig skr;

    ChannelModel channel() const { return ChannelModel::from_state_fidelities(channel_fidelities); }

    // Throws std::invalid_argument with a field-qualified message.
    void validate() const;
};

// Parse from JSON text. Unknown keys are rejected; messages carry the
// offending field path. `source_name` is used in diagnostics.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::string& path);

// Canonical JSON serialization (sorted keys, full precision). Re-parsing the
// result reproduces the config exactly.
std::string canonical_config_json(const ExperimentConfig& config);

// FNV-1a hash of the canonical serialization, as a hex string.
std::string config_hash(const ExperimentConfig& config);

}  // namespace qlink
