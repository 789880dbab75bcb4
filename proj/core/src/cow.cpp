#include "qlink/cow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qlink {

void ProtocolConfig::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (p_signal < 0.0 || p_decoy < 0.0 || p_empty < 0.0)
        throw std::invalid_argument("sequence probabilities must be non-negative");
    if (std::abs(p_signal + p_decoy + p_empty - 1.0) > 1e-12)
        throw std::invalid_argument("sequence probabilities must sum to 1");
    if (!(bs_data_fraction > 0.0) || !(bs_data_fraction < 1.0))
        throw std::invalid_argument("bs_data_fraction must be in (0,1)");
    if (!(f_ec >= 1.0)) throw std::invalid_argument("f_ec must be >= 1");
    timing.validate();
}

void OpticalImperfections::validate() const {
    if (error_prob < 0.0 || error_prob > 1.0)
        throw std::invalid_argument("error_prob must be in [0,1]");
    if (fringe_visibility < 0.0 || fringe_visibility > 1.0)
        throw std::invalid_argument("fringe_visibility must be in [0,1]");
}

SlotSequence encode(const std::vector<std::uint8_t>& bits, const ProtocolConfig& config,
                    Rng& rng) {
    config.validate();
    SlotSequence seq;
    seq.slots.reserve(bits.size() + bits.size() / 8 + 4);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    size_t next_bit = 0;
    while (next_bit < bits.size()) {
        const double u = uni(rng);
        Slot slot;
        if (u < config.p_decoy) {
            slot = {SlotKind::Decoy, config.mu, config.mu, 0.0};
        } else if (u < config.p_decoy + config.p_empty) {
            slot = {SlotKind::Empty, 0.0, 0.0, 0.0};
        } else if (bits[next_bit] == 0) {
            slot = {SlotKind::Signal0, config.mu, 0.0, 0.0};
            ++next_bit;
        } else {
            slot = {SlotKind::Signal1, 0.0, config.mu, 0.0};
            ++next_bit;
        }
        seq.slots.push_back(slot);
    }
    return seq;
}

std::optional<double> visibility(std::int64_t c_d1, std::int64_t c_d2) {
    if (c_d1 < 0 || c_d2 < 0) throw std::invalid_argument("negative counts");
    const std::int64_t total = c_d1 + c_d2;
    if (total == 0) return std::nullopt;
    return static_cast<double>(c_d1 - c_d2) / static_cast<double>(total);
}

namespace {

bool slot_qualifies_for_monitor(const SlotSequence& sent, size_t i) {
    const Slot& s = sent.slots[i];
    if (s.mu_early > 0.0 && s.mu_late > 0.0) return true;  // intra-slot pair
    if (i > 0 && sent.slots[i - 1].mu_late > 0.0 && s.mu_early > 0.0) return true;
    return false;
}

bool bernoulli(double p, Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace

DetectionRecord transmit_and_detect(const SlotSequence& sent, const LinkBudget& link,
                                    const ProtocolConfig& config,
                                    const OpticalImperfections& optics, double phase_error,
                                    Rng& rng) {
    link.validate();
    config.validate();
    optics.validate();
    const double t_eta = channel_transmission(link) * link.detector_efficiency;
    const double f_data = config.bs_data_fraction;
    const double f_mon = 1.0 - f_data;
    const double p_dc = link.dark_click_probability();
    const double cos_d = std::cos(phase_error);

    DetectionRecord rec;
    for (size_t i = 0; i < sent.slots.size(); ++i) {
        const Slot& s = sent.slots[i];
        // Data line: arrival-time gates, with a small crosstalk of detected
        // photons into the wrong bin.
        const double mu_eff_early =
            s.mu_early * (1.0 - optics.error_prob) + s.mu_late * optics.error_prob;
        const double mu_eff_late =
            s.mu_late * (1.0 - optics.error_prob) + s.mu_early * optics.error_prob;
        const double p_early =
            1.0 - (1.0 - (1.0 - std::exp(-mu_eff_early * t_eta * f_data))) * (1.0 - p_dc);
        const double p_late =
            1.0 - (1.0 - (1.0 - std::exp(-mu_eff_late * t_eta * f_data))) * (1.0 - p_dc);
        if (bernoulli(p_early, rng))
            rec.events.push_back({static_cast<std::int64_t>(i), Detector::Ds, TimeBin::Early});
        if (bernoulli(p_late, rng))
            rec.events.push_back({static_cast<std::int64_t>(i), Detector::Ds, TimeBin::Late});

        // Monitor line: interference bin of adjacent non-empty pulse pairs.
        double n_d1 = 0.0, n_d2 = 0.0;
        auto add_pair = [&](double mu_a, double mu_b) {
            const double cross =
                0.5 * std::sqrt(mu_a * mu_b) * optics.fringe_visibility * cos_d;
            n_d1 += 0.25 * (mu_a + mu_b) + cross;
            n_d2 += 0.25 * (mu_a + mu_b) - cross;
        };
        if (i > 0 && sent.slots[i - 1].mu_late > 0.0 && s.mu_early > 0.0)
            add_pair(sent.slots[i - 1].mu_late, s.mu_early);
        if (s.mu_early > 0.0 && s.mu_late > 0.0) add_pair(s.mu_early, s.mu_late);
        const double p_d1 =
            1.0 - (1.0 - (1.0 - std::exp(-n_d1 * t_eta * f_mon))) * (1.0 - p_dc);
        const double p_d2 =
            1.0 - (1.0 - (1.0 - std::exp(-n_d2 * t_eta * f_mon))) * (1.0 - p_dc);
        if (bernoulli(p_d1, rng))
            rec.events.push_back(
                {static_cast<std::int64_t>(i), Detector::D1, TimeBin::Interference});
        if (bernoulli(p_d2, rng))
            rec.events.push_back(
                {static_cast<std::int64_t>(i), Detector::D2, TimeBin::Interference});
    }
    return rec;
}

SiftStats decode_and_sift(const SlotSequence& sent, const DetectionRecord& detections) {
    const std::int64_t n_slots = static_cast<std::int64_t>(sent.slots.size());
    std::int64_t prev_slot = 0;
    for (const DetectionRecord::Event& e : detections.events) {
        if (e.slot < prev_slot) throw std::invalid_argument("detection slots not ordered");
        if (e.slot >= n_slots)
            throw std::invalid_argument("detection record does not match the slot clock");
        prev_slot = e.slot;
    }

    SiftStats stats;
    // Per-slot data-line click pattern.
    std::vector<std::uint8_t> early(sent.slots.size(), 0), late(sent.slots.size(), 0);
    for (const DetectionRecord::Event& e : detections.events) {
        const size_t i = static_cast<size_t>(e.slot);
        switch (e.detector) {
            case Detector::Ds:
                (e.bin == TimeBin::Early ? early[i] : late[i]) = 1;
                break;
            case Detector::D1:
                if (e.bin == TimeBin::Interference && slot_qualifies_for_monitor(sent, i))
                    ++stats.c_d1;
                break;
            case Detector::D2:
                if (e.bin == TimeBin::Interference && slot_qualifies_for_monitor(sent, i))
                    ++stats.c_d2;
                break;
        }
    }
    for (size_t i = 0; i < sent.slots.size(); ++i) {
        const SlotKind kind = sent.slots[i].kind;
        if (kind != SlotKind::Signal0 && kind != SlotKind::Signal1) continue;
        if (early[i] == late[i]) continue;  // no click, or double click: discard
        const int bit = late[i] ? 1 : 0;
        const int sent_bit = (kind == SlotKind::Signal1) ? 1 : 0;
        ++stats.n_sifted;
        if (bit != sent_bit) ++stats.n_errors;
    }
    if (stats.n_sifted > 0)
        stats.qber = static_cast<double>(stats.n_errors) / static_cast<double>(stats.n_sifted);
    stats.visibility = visibility(stats.c_d1, stats.c_d2);
    return stats;
}

// --- field trial --------------------------------------------------------------

namespace {

std::int64_t poisson(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
}

}  // namespace

std::vector<WindowStats> run_field_trial(const FieldTrialConfig& config, Rng& rng) {
    config.link.validate();
    config.protocol.validate();
    config.optics.validate();
    config.drift.validate();
    config.feedback.validate();
    if (!(config.duration_s > 0.0)) throw std::invalid_argument("duration must be positive");

    const ProtocolConfig& proto = config.protocol;
    const double period = config.feedback.period_s;
    const double slots_per_window = proto.timing.rate_hz * period / 2.0;
    const double t_eta = channel_transmission(config.link) * config.link.detector_efficiency;
    const double f_data = proto.bs_data_fraction;
    const double f_mon = 1.0 - f_data;
    const double p_dc = config.link.dark_click_probability();

    // Data line, per signal slot.
    const double p_det = 1.0 - std::exp(-proto.mu * t_eta * f_data);
    const double p_ok = p_det * (1.0 - config.optics.error_prob) + p_dc;
    const double p_err = p_det * config.optics.error_prob + p_dc;

    // Monitor line: density of adjacent non-empty pulse pairs per slot.
    const double p_nonempty_side = 0.5 * proto.p_signal + proto.p_decoy;
    const double pair_density = proto.p_decoy + p_nonempty_side * p_nonempty_side;
    const double pair_scale = proto.mu * 0.5 * t_eta * f_mon;  // per-pair detected mean / (1 +- Vcos)

    const int n_windows = static_cast<int>(std::ceil(config.duration_s / period));
    std::vector<WindowStats> out;
    out.reserve(static_cast<size_t>(n_windows));

    double phase_error = config.drift.initial_phase_rad;
    PidController pid(config.feedback);
    const double dither = config.pid_enabled ? config.feedback.dither_rad : 0.0;

    for (int w = 0; w < n_windows; ++w) {
        WindowStats ws;
        ws.t_start_s = static_cast<double>(w) * period;
        ws.phase_error_rad = phase_error;

        // Data line over the whole window.
        const double n_signal_slots = slots_per_window * proto.p_signal;
        const std::int64_t ok = poisson(n_signal_slots * p_ok, rng);
        const std::int64_t err = poisson(n_signal_slots * p_err, rng);
        ws.n_sifted = ok + err;
        ws.qber = ws.n_sifted > 0
                      ? static_cast<double>(err) / static_cast<double>(ws.n_sifted)
                      : 0.0;

        // Monitor line in two dither half-windows.
        const double half_slots = 0.5 * slots_per_window;
        const double lambda_pairs = half_slots * pair_density;
        // Monitor darks are gated: only interference bins of announced pairs
        // enter the visibility estimate (matches decode_and_sift).
        const double lambda_dark = lambda_pairs * p_dc;
        std::int64_t c1_total = 0, c2_total = 0;
        double err_frac[2] = {0.0, 0.0};
        bool err_valid[2] = {false, false};
        for (int half = 0; half < 2; ++half) {
            const double delta = phase_error + (half == 0 ? dither : -dither);
            const double vis_cos = config.optics.fringe_visibility * std::cos(delta);
            const std::int64_t c1 =
                poisson(lambda_pairs * pair_scale * (1.0 + vis_cos) + lambda_dark, rng);
            const std::int64_t c2 =
                poisson(lambda_pairs * pair_scale * (1.0 - vis_cos) + lambda_dark, rng);
            c1_total += c1;
            c2_total += c2;
            if (c1 + c2 > 0) {
                err_frac[half] = static_cast<double>(c2) / static_cast<double>(c1 + c2);
                err_valid[half] = true;
            }
            phase_error = evolve_phase(phase_error, config.drift, 0.5 * period, rng);
        }
        ws.visibility = visibility(c1_total, c2_total);
        out.push_back(ws);

        if (config.pid_enabled && err_valid[0] && err_valid[1] && dither > 0.0) {
            // Lock-in sign recovery: f(delta +- d) differ by ~ V sin(delta) sin(d).
            const double signed_error = (err_frac[0] - err_frac[1]) / std::sin(dither);
            phase_error -= pid.step(signed_error, period);
        }
    }
    return out;
}

TrialSummary summarize_trial(const std::vector<WindowStats>& windows) {
    TrialSummary s;
    if (windows.empty()) return s;
    double vis_sum = 0.0;
    std::int64_t vis_n = 0;
    s.min_visibility = 1.0;
    double qber_sum = 0.0;
    for (const WindowStats& w : windows) {
        qber_sum += w.qber;
        s.total_sifted += w.n_sifted;
        if (w.visibility) {
            vis_sum += *w.visibility;
            s.min_visibility = std::min(s.min_visibility, *w.visibility);
            ++vis_n;
        }
    }
    s.mean_qber = qber_sum / static_cast<double>(windows.size());
    s.mean_visibility = vis_n > 0 ? vis_sum / static_cast<double>(vis_n) : 0.0;
    return s;
}

std::string format_sift_csv(const std::vector<WindowStats>& windows) {
    std::string out = "window_start_s,qber,visibility,n_sifted\n";
    char buf[128];
    for (const WindowStats& w : windows) {
        if (w.visibility) {
            std::snprintf(buf, sizeof buf, "%.3f,%.8f,%.8f,%lld\n", w.t_start_s, w.qber,
                          *w.visibility, static_cast<long long>(w.n_sifted));
        } else {
            std::snprintf(buf, sizeof buf, "%.3f,%.8f,,%lld\n", w.t_start_s, w.qber,
                          static_cast<long long>(w.n_sifted));
        }
        out += buf;
    }
    return out;
}

// --- secret key rate ----------------------------------------------------------

SkrResult secret_key_rate(const SkrParams& params) {
    params.config.validate();
    params.link.validate();
    if (params.qber < 0.0 || params.qber > 1.0)
        throw std::invalid_argument("qber must be in [0,1]");

    const double p_det = click_probability(params.config.mu, params.link);
    const double half = 0.5 * p_det;  // per-pulse click rate of a signal slot
    const double p_dc = params.link.dark_click_probability();

    SkrResult res;
    const double r_sift = params.config.p_signal * params.config.bs_data_fraction *
                          (half + p_dc);
    res.q_total = (half + p_dc) > 0.0
                      ? (params.qber * half + 0.5 * p_dc) / (half + p_dc)
                      : 0.5;
    const double eps = std::clamp(2.0 * params.visibility - 1.0, 0.0, 1.0);
    const double leak_ec = params.config.f_ec * binary_entropy(std::clamp(res.q_total, 0.0, 1.0));
    const double i_eve = (1.0 - res.q_total) * binary_entropy(0.5 * (1.0 + eps));
    res.secret_fraction = std::max(0.0, 1.0 - leak_ec - i_eve);
    res.bits_per_pulse = r_sift * res.secret_fraction;
    res.bits_per_s = res.bits_per_pulse * params.config.timing.rate_hz;
    return res;
}

std::vector<SkrPoint> skr_sweep(const SkrParams& base, const std::vector<double>& attenuations_db) {
    if (attenuations_db.empty()) throw std::invalid_argument("empty attenuation range");
    std::vector<SkrPoint> curve;
    curve.reserve(attenuations_db.size());
    for (double db : attenuations_db) {
        SkrParams p = base;
        p.link.channel_loss_db = db;
        curve.push_back({db, secret_key_rate(p)});
    }
    return curve;
}

double fit_excess_loss(const SkrParams& base, double attenuation_db,
                       double target_bits_per_pulse) {
    if (!(target_bits_per_pulse > 0.0))
        throw std::invalid_argument("target key rate must be positive");
    auto rate_at = [&](double excess) {
        SkrParams p = base;
        p.link.channel_loss_db = attenuation_db;
        p.link.excess_loss_db = excess;
        return secret_key_rate(p).bits_per_pulse;
    };
    double lo = 0.0, hi = 40.0;
    if (rate_at(lo) < target_bits_per_pulse)
        throw std::invalid_argument("target key rate unreachable even at zero excess loss");
    if (rate_at(hi) > target_bits_per_pulse)
        throw std::invalid_argument("target key rate exceeded even at 40 dB excess loss");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rate_at(mid) >= target_bits_per_pulse ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double skr_cutoff_attenuation(const SkrParams& base, double lo_db, double hi_db) {
    auto rate_at = [&](double db) {
        SkrParams p = base;
        p.link.channel_loss_db = db;
        return secret_key_rate(p).bits_per_pulse;
    };
    if (!(rate_at(lo_db) > 0.0)) throw std::invalid_argument("key rate already zero at lower bound");
    if (rate_at(hi_db) > 0.0) throw std::invalid_argument("key rate still positive at upper bound");
    double lo = lo_db, hi = hi_db;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rate_at(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string format_skr_csv(const std::vector<SkrPoint>& curve) {
    std::string out = "attenuation_db,bits_per_pulse,bits_per_s\n";
    char buf[128];
    for (const SkrPoint& p : curve) {
        std::snprintf(buf, sizeof buf, "%.4f,%.9e,%.9e\n", p.attenuation_db,
                      p.result.bits_per_pulse, p.result.bits_per_s);
        out += buf;
    }
    return out;
}

}  // namespace qlink
