#include "qlink/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace qlink {

void PulseTiming::validate() const {
    if (!(width_ns > 0.0) || !(separation_ns > 0.0) || !(rate_hz > 0.0))
        throw std::invalid_argument("pulse timing values must be positive");
    if (!(width_ns < separation_ns))
        throw std::invalid_argument("pulse width must be smaller than the separation");
    const double implied = 1.0e9 / separation_ns;
    if (std::abs(rate_hz - implied) > 0.01 * implied)
        throw std::invalid_argument("pulse rate inconsistent with separation (>1%)");
}

void LinkBudget::validate() const {
    if (channel_loss_db < 0.0 || excess_loss_db < 0.0)
        throw std::invalid_argument("losses must be non-negative");
    if (detector_efficiency < 0.0 || detector_efficiency > 1.0)
        throw std::invalid_argument("detector efficiency must be in [0,1]");
    if (dark_count_rate_per_ns < 0.0)
        throw std::invalid_argument("dark count rate must be non-negative");
    if (gate_window_ns <= 0.0) throw std::invalid_argument("gate window must be positive");
}

double channel_transmission(const LinkBudget& link) {
    return std::pow(10.0, -(link.channel_loss_db + link.excess_loss_db) / 10.0);
}

double click_probability(double mu, const LinkBudget& link) {
    if (mu < 0.0) throw std::invalid_argument("mean photon number must be non-negative");
    return 1.0 - std::exp(-mu * channel_transmission(link) * link.detector_efficiency);
}

bool detect(double p_signal, const LinkBudget& link, Rng& rng) {
    if (p_signal < 0.0 || p_signal > 1.0)
        throw std::invalid_argument("p_signal must be in [0,1]");
    const double p_dc = link.dark_click_probability();
    const double p = 1.0 - (1.0 - p_signal * link.detector_efficiency) * (1.0 - p_dc);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

void PhaseDriftModel::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("drift sigma must be non-negative");
}

double evolve_phase(double phase, const PhaseDriftModel& drift, double dt, Rng& rng) {
    if (dt < 0.0) throw std::invalid_argument("dt must be non-negative");
    if (drift.sigma == 0.0 || dt == 0.0) return phase;
    return phase + std::normal_distribution<double>(0.0, drift.sigma * std::sqrt(dt))(rng);
}

FmiOutcome fmi_measure(double mu_early, double mu_late, double relative_phase,
                       double interferometer_phase, Basis which_basis) {
    if (mu_early < 0.0 || mu_late < 0.0)
        throw std::invalid_argument("pulse intensities must be non-negative");
    if (which_basis == Basis::Z)
        throw std::invalid_argument("the FMI measures X or Y, not Z");
    const double phi_i = interferometer_phase +
                         (which_basis == Basis::Y ? 0.5 * std::numbers::pi : 0.0);
    FmiOutcome out;
    out.d1_early = 0.25 * mu_early;
    out.d2_early = 0.25 * mu_early;
    out.d1_late = 0.25 * mu_late;
    out.d2_late = 0.25 * mu_late;
    const double cross = 0.5 * std::sqrt(mu_early * mu_late) * std::cos(relative_phase - phi_i);
    out.d1_interference = 0.25 * (mu_early + mu_late) + cross;
    out.d2_interference = 0.25 * (mu_early + mu_late) - cross;
    return out;
}

void FeedbackConfig::validate() const {
    if (!(period_s > 0.0)) throw std::invalid_argument("feedback period must be positive");
    if (integral_limit < 0.0) throw std::invalid_argument("integral limit must be non-negative");
    if (dither_rad < 0.0) throw std::invalid_argument("dither amplitude must be non-negative");
}

double PidController::step(double error, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const double e = error - cfg_.setpoint;
    integral_ += e * dt;
    integral_ = std::clamp(integral_, -cfg_.integral_limit, cfg_.integral_limit);
    double derivative = 0.0;
    if (has_prev_) derivative = (e - prev_error_) / dt;
    prev_error_ = e;
    has_prev_ = true;
    return cfg_.kp * e + cfg_.ki * integral_ + cfg_.kd * derivative;
}

void PidController::reset() {
    integral_ = 0.0;
    prev_error_ = 0.0;
    has_prev_ = false;
}

const char* detector_name(Detector d) {
    switch (d) {
        case Detector::Ds: return "Ds";
        case Detector::D1: return "D1";
        case Detector::D2: return "D2";
    }
    return "?";
}

const char* time_bin_name(TimeBin b) {
    switch (b) {
        case TimeBin::Early: return "early";
        case TimeBin::Late: return "late";
        case TimeBin::Interference: return "interference";
    }
    return "?";
}

std::string format_detection_csv(const DetectionRecord& record) {
    std::string out = "slot,detector,bin\n";
    char buf[64];
    for (const DetectionRecord::Event& e : record.events) {
        std::snprintf(buf, sizeof buf, "%lld,%s,%s\n", static_cast<long long>(e.slot),
                      detector_name(e.detector), time_bin_name(e.bin));
        out += buf;
    }
    return out;
}

ChannelModel ChannelModel::from_state_fidelities(const std::array<double, 6>& f) {
    for (double v : f)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("fidelity targets must be in [0,1]");
    ChannelModel ch;
    ch.lambda = {f[2] + f[3] - 1.0, f[4] + f[5] - 1.0, f[0] + f[1] - 1.0};
    ch.shift = {f[2] - f[3], f[4] - f[5], f[0] - f[1]};
    return ch;
}

DensityMatrix ChannelModel::apply(const DensityMatrix& rho) const {
    const std::array<double, 3> r = bloch_vector(rho);
    std::array<double, 3> out{};
    for (size_t k = 0; k < 3; ++k) out[k] = lambda[k] * r[k] + shift[k];
    const double n = std::sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
    if (n > 1.0) {
        // Clip marginal positivity violations from non-CP parameter choices.
        for (double& v : out) v /= n;
    }
    return DensityMatrix::from_bloch(out[0], out[1], out[2]);
}

std::array<ProcessPair, 4> ChannelModel::exact_probe_pairs() const {
    constexpr std::array<StateLabel, 4> probes = {StateLabel::Zero, StateLabel::One,
                                                  StateLabel::Plus, StateLabel::PlusI};
    std::array<ProcessPair, 4> pairs = {
        ProcessPair{DensityMatrix::from_label(probes[0]), DensityMatrix::maximally_mixed()},
        ProcessPair{DensityMatrix::from_label(probes[1]), DensityMatrix::maximally_mixed()},
        ProcessPair{DensityMatrix::from_label(probes[2]), DensityMatrix::maximally_mixed()},
        ProcessPair{DensityMatrix::from_label(probes[3]), DensityMatrix::maximally_mixed()}};
    for (auto& p : pairs) p.second = apply(p.first);
    return pairs;
}

MeasurementRecord measure_in_basis(StateLabel prep, Basis basis, std::int64_t shots,
                                   const LinkBudget& link, const ChannelModel& channel,
                                   double mu, Rng& rng) {
    if (shots <= 0) throw std::invalid_argument("shots must be positive");
    link.validate();
    const DensityMatrix rho = channel.apply(DensityMatrix::from_label(prep));
    const std::array<double, 3> r = bloch_vector(rho);
    double component = 0.0;
    switch (basis) {
        case Basis::Z: component = r[2]; break;  // arrival-time discrimination
        case Basis::X: component = r[0]; break;  // FMI, phi_I = 0
        case Basis::Y: component = r[1]; break;  // FMI, phi_I = pi/2
    }
    const double p_click = click_probability(mu, link);
    const std::int64_t n_det =
        std::binomial_distribution<std::int64_t>(shots, p_click)(rng);
    const double p_plus = std::clamp(0.5 * (1.0 + component), 0.0, 1.0);
    std::int64_t n_plus =
        n_det > 0 ? std::binomial_distribution<std::int64_t>(n_det, p_plus)(rng) : 0;
    std::int64_t n_minus = n_det - n_plus;
    // Dark counts land uniformly in either outcome gate.
    const double p_dc = link.dark_click_probability();
    if (p_dc > 0.0) {
        n_plus += std::binomial_distribution<std::int64_t>(shots, p_dc)(rng);
        n_minus += std::binomial_distribution<std::int64_t>(shots, p_dc)(rng);
    }
    return MeasurementRecord{basis, n_plus, n_minus};
}

}  // namespace qlink
