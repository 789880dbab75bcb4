#include "qlink/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qlink {

using nlohmann::json;

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Qst: return "qst";
        case Scenario::Qpt: return "qpt";
        case Scenario::Cow: return "cow";
        case Scenario::SkrSweep: return "skr_sweep";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    if (name == "qst") return Scenario::Qst;
    if (name == "qpt") return Scenario::Qpt;
    if (name == "cow") return Scenario::Cow;
    if (name == "skr_sweep") return Scenario::SkrSweep;
    throw std::invalid_argument("scenario: unknown value '" + name +
                                "' (expected qst|qpt|cow|skr_sweep)");
}

namespace {

// Strict section reader: every key consumed exactly once, leftovers rejected.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                out = it->get<T>();
            } catch (const json::exception&) {
                throw std::invalid_argument(path_ + "." + key + ": wrong type");
            }
            used_.insert(key);
        }
    }

    bool has(const char* key) {
        used_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const char* key) {
        used_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw std::invalid_argument(path_ + "." + it.key() + ": unknown field");
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void read_link(const json& j, const std::string& path, LinkBudget& link) {
    Section s(j, path);
    s.get("channel_loss_db", link.channel_loss_db);
    s.get("excess_loss_db", link.excess_loss_db);
    s.get("detector_efficiency", link.detector_efficiency);
    s.get("dark_count_rate_per_ns", link.dark_count_rate_per_ns);
    s.get("gate_window_ns", link.gate_window_ns);
    s.finish();
}

void read_protocol(const json& j, const std::string& path, ProtocolConfig& p) {
    Section s(j, path);
    s.get("mu", p.mu);
    s.get("p_signal", p.p_signal);
    s.get("p_decoy", p.p_decoy);
    s.get("p_empty", p.p_empty);
    s.get("bs_data_fraction", p.bs_data_fraction);
    s.get("f_ec", p.f_ec);
    if (s.has("pulse")) {
        Section t(s.raw("pulse"), path + ".pulse");
        t.get("width_ns", p.timing.width_ns);
        t.get("separation_ns", p.timing.separation_ns);
        t.get("rate_hz", p.timing.rate_hz);
        t.finish();
    }
    s.finish();
}

void read_tomo(const json& j, const std::string& path, TomographyRunConfig& t) {
    Section s(j, path);
    s.get("shots_per_basis", t.shots_per_basis);
    s.get("mc_samples", t.mc_samples);
    if (s.has("counts_file")) t.counts_file = s.raw("counts_file").get<std::string>();
    s.finish();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& source_name) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(source_name + ": " + e.what());
    }
    ExperimentConfig cfg;
    Section root(j, source_name);

    if (!root.has("scenario"))
        throw std::invalid_argument(source_name + ".scenario: required field missing");
    cfg.scenario = parse_scenario(root.raw("scenario").get<std::string>());
    if (!root.has("seed"))
        throw std::invalid_argument(source_name +
                                    ".seed: required field missing (no wall-clock entropy)");
    cfg.seed = root.raw("seed").get<std::uint64_t>();
    cfg.seed_set = true;

    if (root.has("link")) read_link(root.raw("link"), source_name + ".link", cfg.link);
    if (root.has("protocol"))
        read_protocol(root.raw("protocol"), source_name + ".protocol", cfg.protocol);
    if (root.has("channel")) {
        Section s(root.raw("channel"), source_name + ".channel");
        if (s.has("state_fidelity_targets")) {
            const json& arr = s.raw("state_fidelity_targets");
            if (!arr.is_array() || arr.size() != 6)
                throw std::invalid_argument(source_name +
                                            ".channel.state_fidelity_targets: expected 6 values");
            for (size_t i = 0; i < 6; ++i) cfg.channel_fidelities[i] = arr[i].get<double>();
        }
        s.finish();
    }
    if (root.has("drift")) {
        Section s(root.raw("drift"), source_name + ".drift");
        s.get("sigma_rad_per_sqrt_s", cfg.drift.sigma);
        s.get("initial_phase_rad", cfg.drift.initial_phase_rad);
        s.finish();
    }
    if (root.has("feedback")) {
        Section s(root.raw("feedback"), source_name + ".feedback");
        s.get("kp", cfg.feedback.kp);
        s.get("ki", cfg.feedback.ki);
        s.get("kd", cfg.feedback.kd);
        s.get("period_s", cfg.feedback.period_s);
        s.get("setpoint", cfg.feedback.setpoint);
        s.get("integral_limit", cfg.feedback.integral_limit);
        s.get("dither_rad", cfg.feedback.dither_rad);
        s.finish();
    }
    if (root.has("optics")) {
        Section s(root.raw("optics"), source_name + ".optics");
        s.get("error_prob", cfg.optics.error_prob);
        s.get("fringe_visibility", cfg.optics.fringe_visibility);
        s.finish();
    }
    if (root.has("qst")) read_tomo(root.raw("qst"), source_name + ".qst", cfg.qst);
    if (root.has("qpt")) read_tomo(root.raw("qpt"), source_name + ".qpt", cfg.qpt);
    if (root.has("cow")) {
        Section s(root.raw("cow"), source_name + ".cow");
        s.get("duration_s", cfg.cow.duration_s);
        s.get("pid_enabled", cfg.cow.pid_enabled);
        s.get("event_export_slots", cfg.cow.event_export_slots);
        s.finish();
    }
    if (root.has("skr")) {
        Section s(root.raw("skr"), source_name + ".skr");
        s.get("attenuation_min_db", cfg.skr.attenuation_min_db);
        s.get("attenuation_max_db", cfg.skr.attenuation_max_db);
        s.get("attenuation_step_db", cfg.skr.attenuation_step_db);
        s.get("fit_enabled", cfg.skr.fit_enabled);
        s.get("fit_attenuation_db", cfg.skr.fit_attenuation_db);
        s.get("fit_bits_per_pulse", cfg.skr.fit_bits_per_pulse);
        s.get("qber", cfg.skr.qber);
        s.get("visibility", cfg.skr.visibility);
        s.finish();
    }
    root.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void ExperimentConfig::validate() const {
    if (!seed_set) throw std::invalid_argument("seed: required field missing");
    link.validate();
    protocol.validate();
    drift.validate();
    feedback.validate();
    optics.validate();
    for (double f : channel_fidelities)
        if (f < 0.0 || f > 1.0)
            throw std::invalid_argument("channel.state_fidelity_targets: values must be in [0,1]");
    for (const TomographyRunConfig* t : {&qst, &qpt}) {
        if (t->shots_per_basis <= 0)
            throw std::invalid_argument("qst/qpt.shots_per_basis must be positive");
        if (t->mc_samples < 100)
            throw std::invalid_argument("qst/qpt.mc_samples must be >= 100");
    }
    if (!(cow.duration_s > 0.0)) throw std::invalid_argument("cow.duration_s must be positive");
    if (cow.event_export_slots < 0)
        throw std::invalid_argument("cow.event_export_slots must be non-negative");
    if (!(skr.attenuation_step_db > 0.0))
        throw std::invalid_argument("skr.attenuation_step_db must be positive");
    if (skr.attenuation_max_db < skr.attenuation_min_db)
        throw std::invalid_argument("skr attenuation range is empty");
    if (skr.qber < 0.0 || skr.qber > 1.0)
        throw std::invalid_argument("skr.qber must be in [0,1]");
    if (skr.visibility < -1.0 || skr.visibility > 1.0)
        throw std::invalid_argument("skr.visibility must be in [-1,1]");
}

std::string canonical_config_json(const ExperimentConfig& c) {
    json j;
    j["scenario"] = scenario_name(c.scenario);
    j["seed"] = c.seed;
    j["link"] = {{"channel_loss_db", c.link.channel_loss_db},
                 {"excess_loss_db", c.link.excess_loss_db},
                 {"detector_efficiency", c.link.detector_efficiency},
                 {"dark_count_rate_per_ns", c.link.dark_count_rate_per_ns},
                 {"gate_window_ns", c.link.gate_window_ns}};
    j["protocol"] = {{"mu", c.protocol.mu},
                     {"p_signal", c.protocol.p_signal},
                     {"p_decoy", c.protocol.p_decoy},
                     {"p_empty", c.protocol.p_empty},
                     {"bs_data_fraction", c.protocol.bs_data_fraction},
                     {"f_ec", c.protocol.f_ec},
                     {"pulse",
                      {{"width_ns", c.protocol.timing.width_ns},
                       {"separation_ns", c.protocol.timing.separation_ns},
                       {"rate_hz", c.protocol.timing.rate_hz}}}};
    j["channel"] = {{"state_fidelity_targets", c.channel_fidelities}};
    j["drift"] = {{"sigma_rad_per_sqrt_s", c.drift.sigma},
                  {"initial_phase_rad", c.drift.initial_phase_rad}};
    j["feedback"] = {{"kp", c.feedback.kp},       {"ki", c.feedback.ki},
                     {"kd", c.feedback.kd},       {"period_s", c.feedback.period_s},
                     {"setpoint", c.feedback.setpoint},
                     {"integral_limit", c.feedback.integral_limit},
                     {"dither_rad", c.feedback.dither_rad}};
    j["optics"] = {{"error_prob", c.optics.error_prob},
                   {"fringe_visibility", c.optics.fringe_visibility}};
    auto tomo = [](const TomographyRunConfig& t) {
        json o = {{"shots_per_basis", t.shots_per_basis}, {"mc_samples", t.mc_samples}};
        if (t.counts_file) o["counts_file"] = *t.counts_file;
        return o;
    };
    j["qst"] = tomo(c.qst);
    j["qpt"] = tomo(c.qpt);
    j["cow"] = {{"duration_s", c.cow.duration_s},
                {"pid_enabled", c.cow.pid_enabled},
                {"event_export_slots", c.cow.event_export_slots}};
    j["skr"] = {{"attenuation_min_db", c.skr.attenuation_min_db},
                {"attenuation_max_db", c.skr.attenuation_max_db},
                {"attenuation_step_db", c.skr.attenuation_step_db},
                {"fit_enabled", c.skr.fit_enabled},
                {"fit_attenuation_db", c.skr.fit_attenuation_db},
                {"fit_bits_per_pulse", c.skr.fit_bits_per_pulse},
                {"qber", c.skr.qber},
                {"visibility", c.skr.visibility}};
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = canonical_config_json(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : text) {
        h ^= static_cast<std::uint8_t>(ch);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qlink
