#pragma once

// State and process reconstruction from measurement counts, with Poissonian
// Monte-Carlo uncertainty estimation and the Bloch-ellipsoid image of a
// channel.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qlink/qmath.hpp"

namespace qlink {

enum class Basis { Z, X, Y };

const char* basis_name(Basis b);
constexpr std::array<Basis, 3> kAllBases = {Basis::Z, Basis::X, Basis::Y};

struct MeasurementRecord {
    Basis basis = Basis::Z;
    std::int64_t n_plus = 0;   // counts in the +1 eigenstate outcome
    std::int64_t n_minus = 0;  // counts in the -1 eigenstate outcome
};

// One record per basis, forming a complete single-qubit tomogram.
using StateRecords = std::array<MeasurementRecord, 3>;

struct StateEstimate {
    DensityMatrix rho = DensityMatrix::maximally_mixed();
    double fidelity_to_ideal = 0.0;
    double fidelity_std = 0.0;
};

struct AffineMap {
    std::array<double, 9> m{};  // row-major 3x3
    std::array<double, 3> c{};

    std::array<double, 3> apply(const std::array<double, 3>& r) const;
};

struct ProcessEstimate {
    ProcessMatrix chi;
    double f_proc = 0.0;  // vs the identity process
    double f_proc_std = 0.0;
    AffineMap affine_map;
    // Physicality corrections applied during reconstruction.
    double hermitian_defect = 0.0;   // |chi_raw - chi_raw^dagger| max element
    double psd_correction = 0.0;     // most negative eigenvalue clipped away
    double tp_deviation = 0.0;       // trace-preservation defect before rescale
};

// Linear-inversion tomography: (I + sum_k r_k sigma_k)/2 with
// r_k = (n_plus - n_minus)/(n_plus + n_minus). Result has trace 1 exactly but
// may be non-PSD. Throws if a basis is missing/duplicated or has zero counts.
Mat2 qst_linear(const StateRecords& records);

// Closest trace-1 PSD matrix in Frobenius norm (eigenvalue clipping and
// renormalization on the 2x2 spectrum). Idempotent on physical inputs.
DensityMatrix project_physical_state(const Mat2& raw);

// Linear inversion + physical projection, with fidelity uncertainty from a
// parametric Poisson bootstrap (each count redrawn Poisson(observed), done
// mc_samples times, deterministic in seed).
StateEstimate reconstruct_state(const StateRecords& records, const Ket& ideal,
                                int mc_samples, std::uint64_t seed);

// Input/output state pair for process tomography.
using ProcessPair = std::pair<DensityMatrix, DensityMatrix>;

// Solve rho_out = sum chi_lk s_l rho_in s_k for chi from the four canonical
// inputs |0>, |1>, |+>, |+i>, then enforce physicality
// (Hermitize -> PSD-clip -> trace-preservation rescale).
// Throws if the inputs are not the canonical informationally complete set.
ProcessEstimate reconstruct_process(const std::array<ProcessPair, 4>& pairs);

// Raw tomograms of the four channel outputs, ordered |0>, |1>, |+>, |+i>.
using ProcessRecords = std::array<StateRecords, 4>;

// Std of F_proc over Poisson-resampled reconstructions; deterministic in seed.
double monte_carlo_process_uncertainty(const ProcessRecords& records, int mc_samples,
                                       std::uint64_t seed);

struct MeshPoint {
    double theta = 0.0;
    double phi = 0.0;
    std::array<double, 3> r{};
};

// Affine Bloch map of chi, consistent with apply_process by construction.
AffineMap affine_of_process(const ProcessMatrix& chi);

// Image of an (n_theta x n_phi) latitude/longitude sphere mesh under the
// channel's affine Bloch map.
std::vector<MeshPoint> bloch_ellipsoid(const ProcessMatrix& chi, int n_theta, int n_phi);

// --- file formats ------------------------------------------------------------

// Counts CSV: header `input_state,basis,outcome,count` with
// input_state in {0,1,+,-,+i,-i}, basis in {Z,X,Y}, outcome in {+,-}.
struct CountsTable {
    // records[state] present iff the file provided all three bases for it.
    std::array<std::optional<StateRecords>, 6> records{};

    const StateRecords& require(StateLabel s) const;
};

CountsTable parse_counts_csv(const std::string& text);
CountsTable load_counts_csv(const std::string& path);

// chi as two labeled 4x4 numeric blocks (real part, imaginary part).
std::string format_process_matrix(const ProcessMatrix& chi);

// Mesh CSV: `theta,phi,x,y,z`.
std::string format_mesh_csv(const std::vector<MeshPoint>& mesh);

}  // namespace qlink
