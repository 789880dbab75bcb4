#include "qlink/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qlink/rng.hpp"

namespace qlink {

const char* basis_name(Basis b) {
    switch (b) {
        case Basis::Z: return "Z";
        case Basis::X: return "X";
        case Basis::Y: return "Y";
    }
    return "?";
}

std::array<double, 3> AffineMap::apply(const std::array<double, 3>& r) const {
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[static_cast<size_t>(i)] = c[static_cast<size_t>(i)];
        for (int j = 0; j < 3; ++j)
            out[static_cast<size_t>(i)] += m[static_cast<size_t>(i * 3 + j)] * r[static_cast<size_t>(j)];
    }
    return out;
}

Mat2 qst_linear(const StateRecords& records) {
    std::array<double, 3> r{};
    std::array<bool, 3> seen{};
    for (const MeasurementRecord& rec : records) {
        const size_t k = static_cast<size_t>(rec.basis);
        if (seen[k]) throw std::invalid_argument("duplicate basis in tomogram");
        seen[k] = true;
        if (rec.n_plus < 0 || rec.n_minus < 0)
            throw std::invalid_argument("negative counts");
        const std::int64_t total = rec.n_plus + rec.n_minus;
        if (total == 0) throw std::invalid_argument("zero total counts in a basis");
        r[k] = static_cast<double>(rec.n_plus - rec.n_minus) / static_cast<double>(total);
    }
    if (!(seen[0] && seen[1] && seen[2])) throw std::invalid_argument("missing basis");
    // Stored as (Z, X, Y) per the Basis enum; map onto sigma_x, sigma_y, sigma_z.
    Mat2 m = 0.5 * cplx(1.0) *
             (Mat2::identity() + cplx(r[1]) * pauli(1) + cplx(r[2]) * pauli(2) +
              cplx(r[0]) * pauli(3));
    return m;
}

DensityMatrix project_physical_state(const Mat2& raw) {
    Mat2 h = 0.5 * cplx(1.0) * (raw + raw.adjoint());
    const Eig2 e = eig_hermitian_2x2(h);
    std::array<double, 2> w = {std::max(0.0, e.values[0]), std::max(0.0, e.values[1])};
    const double sum = w[0] + w[1];
    if (sum <= 0.0) throw std::invalid_argument("projection input has no positive spectrum");
    w[0] /= sum;
    w[1] /= sum;
    Mat2 out;
    for (int i = 0; i < 2; ++i) {
        const Ket& v = e.vectors[static_cast<size_t>(i)];
        const cplx lam = w[static_cast<size_t>(i)];
        out(0, 0) += lam * v.a * std::conj(v.a);
        out(0, 1) += lam * v.a * std::conj(v.b);
        out(1, 0) += lam * v.b * std::conj(v.a);
        out(1, 1) += lam * v.b * std::conj(v.b);
    }
    // Exact trace 1 by construction up to rounding; clean it up.
    out(0, 0) = cplx(out(0, 0).real(), 0.0);
    out(1, 1) = cplx(1.0 - out(0, 0).real(), 0.0);
    out(1, 0) = std::conj(out(0, 1));
    return DensityMatrix::from_matrix(out);
}

namespace {

StateRecords poisson_resample(const StateRecords& records, Rng& rng) {
    StateRecords out = records;
    for (MeasurementRecord& rec : out) {
        rec.n_plus = std::poisson_distribution<std::int64_t>(
            static_cast<double>(rec.n_plus))(rng);
        rec.n_minus = std::poisson_distribution<std::int64_t>(
            static_cast<double>(rec.n_minus))(rng);
        if (rec.n_plus + rec.n_minus == 0) rec.n_plus = 1;  // keep the tomogram usable
    }
    return out;
}

double stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(xs.size() - 1));
}

}  // namespace

StateEstimate reconstruct_state(const StateRecords& records, const Ket& ideal,
                                int mc_samples, std::uint64_t seed) {
    if (mc_samples < 100) throw std::invalid_argument("mc_samples must be >= 100");
    StateEstimate est;
    est.rho = project_physical_state(qst_linear(records));
    est.fidelity_to_ideal = state_fidelity(est.rho, ideal);

    std::vector<double> fids;
    fids.reserve(static_cast<size_t>(mc_samples));
    for (int i = 0; i < mc_samples; ++i) {
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(i)));
        const StateRecords resampled = poisson_resample(records, rng);
        const DensityMatrix rho = project_physical_state(qst_linear(resampled));
        fids.push_back(state_fidelity(rho, ideal));
    }
    est.fidelity_std = stddev(fids);
    return est;
}

namespace {

constexpr int kN = 16;

// Gaussian elimination with partial pivoting on a dense complex 16x16 system.
std::array<cplx, 16> solve_16(std::array<std::array<cplx, kN>, kN> a,
                              std::array<cplx, kN> b) {
    for (int col = 0; col < kN; ++col) {
        int piv = col;
        double best = std::abs(a[static_cast<size_t>(col)][static_cast<size_t>(col)]);
        for (int r = col + 1; r < kN; ++r) {
            const double mag = std::abs(a[static_cast<size_t>(r)][static_cast<size_t>(col)]);
            if (mag > best) {
                best = mag;
                piv = r;
            }
        }
        if (best < 1e-12) throw std::invalid_argument("singular tomography system");
        std::swap(a[static_cast<size_t>(col)], a[static_cast<size_t>(piv)]);
        std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
        const cplx inv = 1.0 / a[static_cast<size_t>(col)][static_cast<size_t>(col)];
        for (int r = col + 1; r < kN; ++r) {
            const cplx f = a[static_cast<size_t>(r)][static_cast<size_t>(col)] * inv;
            if (f == cplx{}) continue;
            for (int c = col; c < kN; ++c)
                a[static_cast<size_t>(r)][static_cast<size_t>(c)] -=
                    f * a[static_cast<size_t>(col)][static_cast<size_t>(c)];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
        }
    }
    std::array<cplx, kN> x{};
    for (int r = kN - 1; r >= 0; --r) {
        cplx acc = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < kN; ++c)
            acc -= a[static_cast<size_t>(r)][static_cast<size_t>(c)] * x[static_cast<size_t>(c)];
        x[static_cast<size_t>(r)] = acc / a[static_cast<size_t>(r)][static_cast<size_t>(r)];
    }
    return x;
}

constexpr std::array<StateLabel, 4> kProbeStates = {StateLabel::Zero, StateLabel::One,
                                                    StateLabel::Plus, StateLabel::PlusI};

}  // namespace

ProcessEstimate reconstruct_process(const std::array<ProcessPair, 4>& pairs) {
    for (size_t i = 0; i < 4; ++i) {
        const double f = state_fidelity(pairs[i].first, ideal_ket(kProbeStates[i]));
        if (f < 1.0 - 1e-9)
            throw std::invalid_argument(
                "process tomography inputs must be |0>, |1>, |+>, |+i> in order");
    }

    std::array<std::array<cplx, kN>, kN> a{};
    std::array<cplx, kN> b{};
    for (int p = 0; p < 4; ++p) {
        const Mat2& rho_in = pairs[static_cast<size_t>(p)].first.matrix();
        const Mat2& rho_out = pairs[static_cast<size_t>(p)].second.matrix();
        for (int elem = 0; elem < 4; ++elem) {
            const int row = p * 4 + elem;
            const int er = elem / 2, ec = elem % 2;
            b[static_cast<size_t>(row)] = rho_out(er, ec);
            for (int l = 0; l < 4; ++l) {
                for (int k = 0; k < 4; ++k) {
                    const Mat2 slrs = pauli(l) * rho_in * pauli(k);
                    a[static_cast<size_t>(row)][static_cast<size_t>(l * 4 + k)] = slrs(er, ec);
                }
            }
        }
    }
    const std::array<cplx, 16> raw = solve_16(a, b);

    ProcessEstimate est;
    // Hermitize.
    std::array<cplx, 16> h{};
    for (int l = 0; l < 4; ++l) {
        for (int k = 0; k < 4; ++k) {
            const cplx v = 0.5 * (raw[static_cast<size_t>(l * 4 + k)] +
                                  std::conj(raw[static_cast<size_t>(k * 4 + l)]));
            h[static_cast<size_t>(l * 4 + k)] = v;
            est.hermitian_defect =
                std::max(est.hermitian_defect,
                         std::abs(raw[static_cast<size_t>(l * 4 + k)] -
                                  std::conj(raw[static_cast<size_t>(k * 4 + l)])));
        }
    }
    // PSD clip, keeping the eigenvalue sum (= trace) fixed.
    const Eig4 eig = eig_hermitian_4x4(h);
    double trace = 0.0, clipped_sum = 0.0;
    for (double w : eig.values) {
        trace += w;
        if (w < 0.0) est.psd_correction = std::min(est.psd_correction, w);
        clipped_sum += std::max(0.0, w);
    }
    est.psd_correction = -est.psd_correction;
    if (clipped_sum <= 0.0) throw std::invalid_argument("chi spectrum entirely non-positive");
    const double rescale = trace / clipped_sum;
    ProcessMatrix chi;
    for (int i = 0; i < 4; ++i) {
        const double w = std::max(0.0, eig.values[static_cast<size_t>(i)]) * rescale;
        if (w == 0.0) continue;
        const auto& v = eig.vectors[static_cast<size_t>(i)];
        for (int l = 0; l < 4; ++l)
            for (int k = 0; k < 4; ++k)
                chi(l, k) += w * v[static_cast<size_t>(l)] * std::conj(v[static_cast<size_t>(k)]);
    }
    // Trace-preservation rescale: S = sum chi_lk s_k s_l should equal I.
    est.tp_deviation = chi.trace_preservation_defect();
    Mat2 s;
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k) s = s + chi(l, k) * (pauli(k) * pauli(l));
    const double s_trace = s.trace().real();
    if (s_trace <= 0.0) throw std::invalid_argument("degenerate trace-preservation constraint");
    const double tp_scale = 2.0 / s_trace;
    for (cplx& e : chi.chi) e *= tp_scale;

    est.chi = chi;
    est.f_proc = process_fidelity(chi, ProcessMatrix::identity_process());
    est.affine_map = affine_of_process(chi);
    return est;
}

double monte_carlo_process_uncertainty(const ProcessRecords& records, int mc_samples,
                                       std::uint64_t seed) {
    if (mc_samples < 100) throw std::invalid_argument("mc_samples must be >= 100");
    std::vector<double> fids;
    fids.reserve(static_cast<size_t>(mc_samples));
    for (int i = 0; i < mc_samples; ++i) {
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(i)));
        std::array<ProcessPair, 4> pairs = {
            ProcessPair{DensityMatrix::from_label(kProbeStates[0]), DensityMatrix::maximally_mixed()},
            ProcessPair{DensityMatrix::from_label(kProbeStates[1]), DensityMatrix::maximally_mixed()},
            ProcessPair{DensityMatrix::from_label(kProbeStates[2]), DensityMatrix::maximally_mixed()},
            ProcessPair{DensityMatrix::from_label(kProbeStates[3]), DensityMatrix::maximally_mixed()}};
        for (size_t p = 0; p < 4; ++p) {
            const StateRecords resampled = poisson_resample(records[p], rng);
            pairs[p].second = project_physical_state(qst_linear(resampled));
        }
        fids.push_back(reconstruct_process(pairs).f_proc);
    }
    return stddev(fids);
}

AffineMap affine_of_process(const ProcessMatrix& chi) {
    AffineMap map;
    const std::array<double, 3> c = bloch_vector(apply_process(chi, DensityMatrix::maximally_mixed()));
    map.c = c;
    for (int k = 0; k < 3; ++k) {
        std::array<double, 3> e{};
        e[static_cast<size_t>(k)] = 1.0;
        const DensityMatrix probe = DensityMatrix::from_bloch(e[0], e[1], e[2]);
        const std::array<double, 3> img = bloch_vector(apply_process(chi, probe));
        for (int j = 0; j < 3; ++j)
            map.m[static_cast<size_t>(j * 3 + k)] = img[static_cast<size_t>(j)] - c[static_cast<size_t>(j)];
    }
    return map;
}

std::vector<MeshPoint> bloch_ellipsoid(const ProcessMatrix& chi, int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 2) throw std::invalid_argument("mesh resolution must be >= 2");
    const AffineMap map = affine_of_process(chi);
    std::vector<MeshPoint> mesh;
    mesh.reserve(static_cast<size_t>(n_theta) * static_cast<size_t>(n_phi));
    for (int it = 0; it < n_theta; ++it) {
        const double theta = std::numbers::pi * static_cast<double>(it) /
                             static_cast<double>(n_theta - 1);
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(ip) /
                               static_cast<double>(n_phi);
            MeshPoint pt;
            pt.theta = theta;
            pt.phi = phi;
            pt.r = map.apply({std::sin(theta) * std::cos(phi),
                              std::sin(theta) * std::sin(phi), std::cos(theta)});
            mesh.push_back(pt);
        }
    }
    return mesh;
}

// --- file formats ------------------------------------------------------------

namespace {

StateLabel parse_state(const std::string& s) {
    for (StateLabel l : kAllStates)
        if (s == state_name(l)) return l;
    throw std::invalid_argument("unknown input_state '" + s + "'");
}

Basis parse_basis(const std::string& s) {
    for (Basis b : kAllBases)
        if (s == basis_name(b)) return b;
    throw std::invalid_argument("unknown basis '" + s + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim spaces
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

const StateRecords& CountsTable::require(StateLabel s) const {
    const auto& rec = records[static_cast<size_t>(s)];
    if (!rec)
        throw std::invalid_argument(std::string("counts table missing state ") + state_name(s));
    return *rec;
}

CountsTable parse_counts_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty counts file");
    // tolerate an optional header
    std::array<std::array<std::array<std::int64_t, 2>, 3>, 6> counts{};
    std::array<std::array<bool, 3>, 6> seen{};
    int lineno = 1;
    auto handle = [&](const std::string& l) {
        const std::vector<std::string> f = split_csv_line(l);
        if (f.size() == 1 && f[0].empty()) return;
        if (f.size() != 4)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected input_state,basis,outcome,count");
        const size_t s = static_cast<size_t>(parse_state(f[0]));
        const size_t b = static_cast<size_t>(parse_basis(f[1]));
        size_t o;
        if (f[2] == "+") o = 0;
        else if (f[2] == "-") o = 1;
        else throw std::invalid_argument("line " + std::to_string(lineno) + ": outcome must be + or -");
        const std::int64_t n = std::stoll(f[3]);
        if (n < 0) throw std::invalid_argument("line " + std::to_string(lineno) + ": negative count");
        counts[s][b][o] += n;
        seen[s][b] = true;
    };
    if (line.find("input_state") == std::string::npos) handle(line);
    while (std::getline(in, line)) {
        ++lineno;
        handle(line);
    }
    CountsTable table;
    for (size_t s = 0; s < 6; ++s) {
        if (!(seen[s][0] && seen[s][1] && seen[s][2])) continue;
        StateRecords recs;
        for (size_t b = 0; b < 3; ++b)
            recs[b] = {static_cast<Basis>(b), counts[s][b][0], counts[s][b][1]};
        table.records[s] = recs;
    }
    return table;
}

CountsTable load_counts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open counts file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_counts_csv(ss.str());
}

std::string format_process_matrix(const ProcessMatrix& chi) {
    std::string out;
    char buf[64];
    out += "# chi real part (rows/cols ordered I,X,Y,Z)\n";
    for (int l = 0; l < 4; ++l) {
        for (int k = 0; k < 4; ++k) {
            std::snprintf(buf, sizeof buf, "%.12e%s", chi(l, k).real(), k == 3 ? "\n" : ",");
            out += buf;
        }
    }
    out += "# chi imaginary part\n";
    for (int l = 0; l < 4; ++l) {
        for (int k = 0; k < 4; ++k) {
            std::snprintf(buf, sizeof buf, "%.12e%s", chi(l, k).imag(), k == 3 ? "\n" : ",");
            out += buf;
        }
    }
    return out;
}

std::string format_mesh_csv(const std::vector<MeshPoint>& mesh) {
    std::string out = "theta,phi,x,y,z\n";
    char buf[160];
    for (const MeshPoint& p : mesh) {
        std::snprintf(buf, sizeof buf, "%.9f,%.9f,%.12e,%.12e,%.12e\n", p.theta, p.phi,
                      p.r[0], p.r[1], p.r[2]);
        out += buf;
    }
    return out;
}

}  // namespace qlink
