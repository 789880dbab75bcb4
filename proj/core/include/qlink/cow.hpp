#pragma once

// Coherent-one-way QKD engine: slot encoding, transmission/detection at slot
// granularity, sifting, the window-aggregated field-trial loop with PID phase
// stabilization, and the infinite-key secret-key-rate model.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlink/photonics.hpp"
#include "qlink/qmath.hpp"
#include "qlink/rng.hpp"

namespace qlink {

struct ProtocolConfig {
    double mu = 0.29;            // mean photons per non-empty pulse
    double p_signal = 0.90;
    double p_decoy = 0.07;
    double p_empty = 0.03;
    double bs_data_fraction = 0.9;  // passive beam-splitter routing to the data line
    PulseTiming timing;
    double f_ec = 1.16;          // error-correction efficiency

    void validate() const;
};

// Device imperfections not covered by the link budget: the residual
// probability that a detected data-line photon lands in the wrong time bin
// (modulator extinction, timing tails) and the intrinsic fringe visibility of
// the monitor interferometer.
struct OpticalImperfections {
    double error_prob = 0.002;
    double fringe_visibility = 0.9985;

    void validate() const;
};

enum class SlotKind { Signal0, Signal1, Decoy, Empty };

struct Slot {
    SlotKind kind = SlotKind::Empty;
    double mu_early = 0.0;
    double mu_late = 0.0;
    double phase = 0.0;  // common coherent phase of the non-empty pulses
};

struct SlotSequence {
    std::vector<Slot> slots;
};

// Bits map to signal slots (bit 0 -> (mu, 0), bit 1 -> (0, mu)); decoy and
// empty slots are interleaved by independent sampling at p_decoy / p_empty.
// Encoding stops once every bit has been placed.
SlotSequence encode(const std::vector<std::uint8_t>& bits, const ProtocolConfig& config,
                    Rng& rng);

struct SiftStats {
    std::int64_t n_sifted = 0;
    std::int64_t n_errors = 0;
    double qber = 0.0;  // n_errors / n_sifted when n_sifted > 0
    std::optional<double> visibility;
    std::int64_t c_d1 = 0;
    std::int64_t c_d2 = 0;
};

// (c1 - c2) / (c1 + c2); absent when both are zero.
std::optional<double> visibility(std::int64_t c_d1, std::int64_t c_d2);

// Slot-level transmission and detection: data line arrival-time clicks plus
// monitor-line interference clicks for adjacent non-empty pulse pairs.
// phase_error is the interferometer phase offset relative to Alice's pulses.
DetectionRecord transmit_and_detect(const SlotSequence& sent, const LinkBudget& link,
                                    const ProtocolConfig& config,
                                    const OpticalImperfections& optics, double phase_error,
                                    Rng& rng);

// Arrival-time decoding against the sent sequence: early/late clicks in signal
// slots become raw bits (double clicks discarded), monitor interference clicks
// at valid coherent pairs accumulate c_d1/c_d2. Throws on slot-clock mismatch.
SiftStats decode_and_sift(const SlotSequence& sent, const DetectionRecord& detections);

// --- field trial --------------------------------------------------------------

struct FieldTrialConfig {
    double duration_s = 600.0;
    LinkBudget link;
    ProtocolConfig protocol;
    OpticalImperfections optics;
    PhaseDriftModel drift;
    FeedbackConfig feedback;
    bool pid_enabled = true;
};

struct WindowStats {
    double t_start_s = 0.0;
    double qber = 0.0;
    std::optional<double> visibility;
    std::int64_t n_sifted = 0;
    double phase_error_rad = 0.0;  // true interferometer offset at window start
};

// Window-aggregated simulation of a stabilized COW run: per feedback period
// the expected data/monitor counts are computed analytically and sampled as
// Poisson aggregates (statistically exact for rare independent clicks, and
// cheap enough for hour-scale runs). The PID loop recovers the drift sign by
// splitting each window into two dither half-windows.
std::vector<WindowStats> run_field_trial(const FieldTrialConfig& config, Rng& rng);

struct TrialSummary {
    double mean_qber = 0.0;
    double mean_visibility = 0.0;
    double min_visibility = 0.0;
    std::int64_t total_sifted = 0;
};

TrialSummary summarize_trial(const std::vector<WindowStats>& windows);

// Sift report CSV: `window_start_s,qber,visibility,n_sifted`.
std::string format_sift_csv(const std::vector<WindowStats>& windows);

// --- secret key rate ----------------------------------------------------------

struct SkrParams {
    ProtocolConfig config;
    LinkBudget link;
    double qber = 0.0025;      // optical error probability (loss independent)
    double visibility = 0.992;
};

struct SkrResult {
    double bits_per_pulse = 0.0;
    double bits_per_s = 0.0;
    double q_total = 0.0;       // effective QBER including dark counts
    double secret_fraction = 0.0;
};

// Infinite-key collective-attack key-rate model:
//   R_sift = p_signal * bs_data * (p_det/2 + p_dc)   per pulse
//   Q      = (qber * p_det/2 + 0.5 * p_dc) / (p_det/2 + p_dc)
//   r      = max(0, 1 - f_ec h2(Q) - (1-Q) h2((1+eps)/2)),  eps = clamp(2V-1, 0, 1)
// This is a documented stand-in for the cited security bound, kept behind this
// interface so an exact transcription can replace it.
SkrResult secret_key_rate(const SkrParams& params);

struct SkrPoint {
    double attenuation_db = 0.0;
    SkrResult result;
};

// Per-attenuation evaluation; the base link's excess loss is kept fixed.
std::vector<SkrPoint> skr_sweep(const SkrParams& base, const std::vector<double>& attenuations_db);

// Fit the single excess-loss calibration constant so the model yields
// target_bits_per_pulse at the given channel attenuation (bisection).
double fit_excess_loss(const SkrParams& base, double attenuation_db,
                       double target_bits_per_pulse);

// Smallest attenuation at which the key rate vanishes (bisection oracle).
double skr_cutoff_attenuation(const SkrParams& base, double lo_db, double hi_db);

// SKR curve CSV: `attenuation_db,bits_per_pulse,bits_per_s`.
std::string format_skr_csv(const std::vector<SkrPoint>& curve);

}  // namespace qlink
