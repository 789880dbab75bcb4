// Acceptance suite: one line per criterion, exit 0 iff all pass.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "qlink/config.hpp"
#include "qlink/cow.hpp"
#include "qlink/experiments.hpp"
#include "qlink/photonics.hpp"
#include "qlink/qmath.hpp"
#include "qlink/rng.hpp"
#include "qlink/tomography.hpp"

using namespace qlink;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool g_all_ok = true;

void report(int id, const std::string& label, bool ok, const std::string& detail) {
    std::printf("criterion %d [%s] %s (%s)\n", id, ok ? "PASS" : "FAIL", label.c_str(),
                detail.c_str());
    if (!ok) g_all_ok = false;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Noise-free measurement records with expected counts rounded to integers.
StateRecords exact_records(const std::array<double, 3>& r, std::int64_t shots_per_basis) {
    StateRecords recs;
    for (size_t b = 0; b < 3; ++b) {
        const Basis basis = kAllBases[b];
        const double rk = r[basis == Basis::Z ? 2 : (basis == Basis::X ? 0 : 1)];
        recs[b].basis = basis;
        recs[b].n_plus = std::llround(0.5 * (1.0 + rk) * static_cast<double>(shots_per_basis));
        recs[b].n_minus = shots_per_basis - recs[b].n_plus;
    }
    return recs;
}

StateRecords simulate_state(StateLabel s, const ChannelModel& ch, const LinkBudget& link,
                            double mu, std::int64_t shots, std::uint64_t seed) {
    StateRecords recs;
    for (size_t b = 0; b < 3; ++b) {
        Rng rng(substream_seed(seed, b + 16 * static_cast<std::uint64_t>(s)));
        recs[b] = measure_in_basis(s, kAllBases[b], shots, link, ch, mu, rng);
    }
    return recs;
}

ProcessEstimate qpt_from_simulation(const ChannelModel& ch, const LinkBudget& link,
                                    double mu, std::int64_t shots, std::uint64_t seed) {
    constexpr std::array<StateLabel, 4> probes = {StateLabel::Zero, StateLabel::One,
                                                  StateLabel::Plus, StateLabel::PlusI};
    std::array<ProcessPair, 4> pairs = {
        ProcessPair{DensityMatrix::from_label(probes[0]), DensityMatrix::maximally_mixed()},
        ProcessPair{DensityMatrix::from_label(probes[1]), DensityMatrix::maximally_mixed()},
        ProcessPair{DensityMatrix::from_label(probes[2]), DensityMatrix::maximally_mixed()},
        ProcessPair{DensityMatrix::from_label(probes[3]), DensityMatrix::maximally_mixed()}};
    for (size_t p = 0; p < 4; ++p) {
        const StateRecords recs =
            simulate_state(probes[p], ch, link, mu, shots, seed + 1000 * p);
        pairs[p].second = project_physical_state(qst_linear(recs));
    }
    return reconstruct_process(pairs);
}

std::uint64_t fnv_hash(const std::string& s, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// --- criteria ------------------------------------------------------------------

void criterion_1() {
    const auto t0 = Clock::now();
    const ProcessEstimate est =
        reconstruct_process(ChannelModel::identity().exact_probe_pairs());
    const double elapsed = seconds_since(t0);
    const bool ok = est.f_proc >= 1.0 - 1e-9 && elapsed < 1.0;
    report(1, "identity-channel process reconstruction", ok,
           fmt("F_proc = %.12f, %.3f s", est.f_proc, elapsed));
}

void criterion_2() {
    const auto t0 = Clock::now();
    const std::array<double, 6> targets = {0.997429, 0.998614, 0.9944,
                                           0.9962,   0.9957,   0.9940};
    const ChannelModel ch = ChannelModel::from_state_fidelities(targets);
    LinkBudget link;
    link.detector_efficiency = 1.0;
    link.dark_count_rate_per_ns = 0.0;
    const std::int64_t shots = 1'000'000;

    bool states_ok = true;
    double worst = 0.0;
    for (size_t s = 0; s < 6; ++s) {
        const StateLabel label = static_cast<StateLabel>(s);
        const StateRecords recs = simulate_state(label, ch, link, 1e9, shots, 7000 + s);
        const StateEstimate est =
            reconstruct_state(recs, ideal_ket(label), 100, 9000 + s);
        const double dev = std::abs(est.fidelity_to_ideal - targets[s]);
        worst = std::max(worst, dev);
        if (dev > 0.001) states_ok = false;
    }

    const ProcessEstimate qpt = qpt_from_simulation(ch, link, 1e9, shots, 11000);
    const double elapsed = seconds_since(t0);
    const bool ok = states_ok && std::abs(qpt.f_proc - 0.993) <= 0.010 && elapsed < 60.0;
    report(2, "calibrated six-state fidelities and process fidelity", ok,
           fmt("max |dF| = %.2e, F_proc = %.4f, %.1f s", worst, qpt.f_proc, elapsed));
}

void criterion_3() {
    // Fidelity std vs total counts over three decades of statistics.
    const std::array<double, 3> bloch = {0.30, 0.20, 0.40};
    std::vector<double> log_n, log_std;
    for (std::int64_t shots : {std::int64_t(1000), std::int64_t(10000),
                               std::int64_t(100000), std::int64_t(1000000)}) {
        const StateRecords recs = exact_records(bloch, shots);
        const StateEstimate est =
            reconstruct_state(recs, ideal_ket(StateLabel::Zero), 400, 31ull + shots);
        log_n.push_back(std::log10(3.0 * static_cast<double>(shots)));
        log_std.push_back(std::log10(est.fidelity_std));
    }
    // least-squares slope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(log_n.size());
    for (size_t i = 0; i < log_n.size(); ++i) {
        sx += log_n[i];
        sy += log_std[i];
        sxx += log_n[i] * log_n[i];
        sxy += log_n[i] * log_std[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const bool ok = std::abs(slope + 0.5) <= 0.05;
    report(3, "Monte-Carlo uncertainty scales as counts^-1/2", ok,
           fmt("log-log slope = %.4f", slope));
}

void criterion_4() {
    bool ok = visibility(996, 4).value() == 0.992;
    ok = ok && visibility(123, 0).value() == 1.0 && visibility(1, 0).value() == 1.0;
    ok = ok && visibility(57, 57).value() == 0.0;
    // exhaustive small-pair sweep against the closed form
    for (std::int64_t c1 = 0; c1 <= 40 && ok; ++c1) {
        for (std::int64_t c2 = 0; c2 <= 40; ++c2) {
            if (c1 + c2 == 0) {
                if (visibility(c1, c2).has_value()) { ok = false; break; }
                continue;
            }
            const double v = visibility(c1, c2).value();
            if (v != static_cast<double>(c1 - c2) / static_cast<double>(c1 + c2) ||
                v < -1.0 || v > 1.0 || ((v == 1.0) != (c2 == 0))) {
                ok = false;
                break;
            }
        }
    }
    report(4, "interference visibility formula is exact on integer counts", ok,
           fmt("V(996,4) = %.6f", visibility(996, 4).value()));
}

void criterion_5() {
    const auto t0 = Clock::now();
    FieldTrialConfig trial;
    trial.duration_s = 600.0;
    trial.link.channel_loss_db = 28.02;

    Rng rng_on(substream_seed(515, "acceptance/cow/on"));
    const TrialSummary on = summarize_trial(run_field_trial(trial, rng_on));

    trial.pid_enabled = false;
    Rng rng_off(substream_seed(515, "acceptance/cow/off"));
    const TrialSummary off = summarize_trial(run_field_trial(trial, rng_off));

    const double elapsed = seconds_since(t0);
    const bool ok = on.mean_qber <= 0.005 && on.mean_visibility >= 0.985 &&
                    off.min_visibility < 0.9 && elapsed < 300.0;
    report(5, "stabilized 600 s field trial at 28.02 dB", ok,
           fmt("QBER = %.4f%%, V = %.4f, unstabilized min V = %.3f", 100.0 * on.mean_qber,
               on.mean_visibility, off.min_visibility));
}

void criterion_6() {
    SkrParams params;
    params.qber = 0.0025;
    params.visibility = 0.992;
    params.link.excess_loss_db = fit_excess_loss(params, 12.95, 5.78e-4);

    SkrParams far = params;
    far.link.channel_loss_db = 28.02;
    const double rate = secret_key_rate(far).bits_per_pulse;
    const double rel = std::abs(rate - 1.82e-5) / 1.82e-5;
    const bool ok = rel <= 0.15;
    report(6, "two-point key-rate calibration", ok,
           fmt("excess = %.2f dB, rate(28.02 dB) = %.3e (dev %.1f%%)",
               params.link.excess_loss_db, rate, 100.0 * rel));
}

void criterion_7() {
    SkrParams clean;
    clean.qber = 0.0025;
    clean.visibility = 0.992;
    clean.link.dark_count_rate_per_ns = 0.0;
    auto rate_at = [](SkrParams p, double db) {
        p.link.channel_loss_db = db;
        return secret_key_rate(p).bits_per_pulse;
    };
    const double slope =
        (std::log10(rate_at(clean, 45.0)) - std::log10(rate_at(clean, 15.0))) / 30.0;
    const bool slope_ok = std::abs(slope + 0.1) <= 0.001;

    SkrParams dark = clean;
    dark.link.dark_count_rate_per_ns = 1e-7;
    const double cutoff = skr_cutoff_attenuation(dark, 2.0, 80.0);
    double scan = 0.0;  // first grid point with zero rate
    for (double db = 2.0; db <= 80.0; db += 0.1) {
        if (rate_at(dark, db) == 0.0) {
            scan = db;
            break;
        }
    }
    const bool cutoff_ok = scan > 0.0 && std::abs(cutoff - scan) <= 0.5;
    report(7, "key-rate curve shape and finite cutoff", slope_ok && cutoff_ok,
           fmt("slope = %.5f/dB, cutoff = %.2f dB (scan %.2f dB)", slope, cutoff, scan));
}

void criterion_8() {
    const std::array<const char*, 4> configs = {
        R"({"scenario": "qst", "seed": 88, "qst": {"shots_per_basis": 20000, "mc_samples": 100}})",
        R"({"scenario": "qpt", "seed": 88, "qpt": {"shots_per_basis": 20000, "mc_samples": 100}})",
        R"({"scenario": "cow", "seed": 88, "cow": {"duration_s": 20.0, "event_export_slots": 1000}})",
        R"({"scenario": "skr_sweep", "seed": 88})"};
    bool ok = true;
    std::string detail;
    for (const char* text : configs) {
        const ExperimentConfig cfg = parse_config(text);
        std::uint64_t h1 = 14695981039346656037ull, h2 = h1;
        for (const auto& [name, content] : run_experiment(cfg).files)
            h1 = fnv_hash(content, fnv_hash(name, h1));
        for (const auto& [name, content] : run_experiment(cfg).files)
            h2 = fnv_hash(content, fnv_hash(name, h2));
        if (h1 != h2) ok = false;
        if (!detail.empty()) detail += ", ";
        detail += scenario_name(cfg.scenario);
        detail += h1 == h2 ? " ok" : " differs";
    }
    report(8, "byte-identical reruns for every scenario", ok, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::printf("%s\n", g_all_ok ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return g_all_ok ? 0 : 1;
}
