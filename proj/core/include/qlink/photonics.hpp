#pragma once

// Monte-Carlo model of the optical chain: weak coherent pulse pairs, fiber
// attenuation, slow interferometer phase drift, Faraday-Michelson
// interferometer readout, gated detectors with dark counts, and the PID
// phase-stabilization loop.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qlink/qmath.hpp"
#include "qlink/rng.hpp"
#include "qlink/tomography.hpp"

namespace qlink {

struct PulseTiming {
    double width_ns = 1.5;
    double separation_ns = 5.0;
    double rate_hz = 2.0e8;

    void validate() const;  // width < separation; rate = 1/separation within 1%
};

struct LinkBudget {
    double channel_loss_db = 0.0;
    double excess_loss_db = 0.0;  // calibration constant for Bob-side losses
    double detector_efficiency = 0.8;
    double dark_count_rate_per_ns = 1.0e-7;
    double gate_window_ns = 1.5;  // matched to the pulse width

    void validate() const;
    double dark_click_probability() const { return dark_count_rate_per_ns * gate_window_ns; }
};

// t = 10^(-(channel + excess)/10)
double channel_transmission(const LinkBudget& link);

// Mean-photon-number -> click probability for a weak coherent pulse after
// transmission t and detector efficiency eta: 1 - exp(-mu t eta).
double click_probability(double mu, const LinkBudget& link);

// One gated detection: click with probability 1 - (1 - p_signal eta)(1 - p_dc).
bool detect(double p_signal, const LinkBudget& link, Rng& rng);

// Wiener-process phase drift; sigma in rad/sqrt(s).
struct PhaseDriftModel {
    double sigma = 0.03;
    double initial_phase_rad = 0.0;

    void validate() const;
};

double evolve_phase(double phase, const PhaseDriftModel& drift, double dt, Rng& rng);

// Mean photon numbers in the three output time bins of each FMI port.
struct FmiOutcome {
    double d1_early = 0.0, d1_interference = 0.0, d1_late = 0.0;
    double d2_early = 0.0, d2_interference = 0.0, d2_late = 0.0;

    double total() const {
        return d1_early + d1_interference + d1_late + d2_early + d2_interference + d2_late;
    }
};

// Unbalanced interferometer with arm delay equal to the pulse separation.
// Side bins split 50/50 between ports; the central bin interferes:
// D1 = (mu_e + mu_l)/4 + sqrt(mu_e mu_l)/2 * cos(phase - phi_I), D2 with the
// opposite sign. Basis Y offsets phi_I by pi/2. Total photon number conserved.
FmiOutcome fmi_measure(double mu_early, double mu_late, double relative_phase,
                       double interferometer_phase, Basis which_basis);

struct FeedbackConfig {
    double kp = 0.12;
    double ki = 0.01;
    double kd = 0.0;
    double period_s = 0.47;
    double setpoint = 0.0;          // target monitor error fraction
    double integral_limit = 3.0;    // anti-windup clamp on the integral term
    double dither_rad = 0.04;       // lock-in dither amplitude for sign recovery

    void validate() const;
};

class PidController {
  public:
    explicit PidController(const FeedbackConfig& cfg) : cfg_(cfg) {}

    // Standard discrete PID with clamped integral; returns the actuation.
    double step(double error, double dt);
    void reset();

    double integral() const { return integral_; }

  private:
    FeedbackConfig cfg_;
    double integral_ = 0.0;
    double prev_error_ = 0.0;
    bool has_prev_ = false;
};

enum class Detector { Ds, D1, D2 };
enum class TimeBin { Early, Late, Interference };

const char* detector_name(Detector d);
const char* time_bin_name(TimeBin b);

struct DetectionRecord {
    struct Event {
        std::int64_t slot = 0;
        Detector detector = Detector::Ds;
        TimeBin bin = TimeBin::Early;
    };
    std::vector<Event> events;  // slot indices non-decreasing
};

// CSV export: `slot,detector,bin`.
std::string format_detection_csv(const DetectionRecord& record);

// Affine Bloch-sphere description of the transmission channel. The simulated
// channel is specified by what it does to states, not by a chi matrix; the
// tomography layer reconstructs chi from its action.
struct ChannelModel {
    std::array<double, 3> lambda = {1.0, 1.0, 1.0};  // diagonal Bloch scaling
    std::array<double, 3> shift = {0.0, 0.0, 0.0};

    static ChannelModel identity() { return {}; }

    // Solve lambda/shift so the six canonical states come out with exactly
    // these fidelities to their ideals (order |0>,|1>,|+>,|->,|+i>,|-i>).
    static ChannelModel from_state_fidelities(const std::array<double, 6>& f);

    DensityMatrix apply(const DensityMatrix& rho) const;

    // Exact output states for the four process-tomography probes.
    std::array<ProcessPair, 4> exact_probe_pairs() const;
};

// Tomographic measurement of a prepared state after the channel and link.
// Z basis by arrival-time discrimination, X/Y through the FMI central bin
// (phi_I = 0 or pi/2). Losses discard shots; dark counts add background.
MeasurementRecord measure_in_basis(StateLabel prep, Basis basis, std::int64_t shots,
                                   const LinkBudget& link, const ChannelModel& channel,
                                   double mu, Rng& rng);

}  // namespace qlink
