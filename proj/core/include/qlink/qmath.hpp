#pragma once

// Small complex-matrix kernel for single time-bin qubits: density matrices,
// Pauli algebra, chi-matrix process application, fidelities and entropy.
// Everything here is fixed-size (2x2 states, 4x4 process matrices) and pure.

#include <array>
#include <complex>
#include <cstddef>
#include <string>

namespace qlink {

using cplx = std::complex<double>;

// Row-major 2x2 complex matrix.
struct Mat2 {
    std::array<cplx, 4> m{};

    cplx& operator()(int r, int c) { return m[static_cast<size_t>(r) * 2 + c]; }
    const cplx& operator()(int r, int c) const { return m[static_cast<size_t>(r) * 2 + c]; }

    static Mat2 zero() { return Mat2{}; }
    static Mat2 identity();

    Mat2 adjoint() const;
    cplx trace() const { return m[0] + m[3]; }

    Mat2 operator+(const Mat2& o) const;
    Mat2 operator-(const Mat2& o) const;
    Mat2 operator*(const Mat2& o) const;
    Mat2 operator*(cplx s) const;
};

Mat2 operator*(cplx s, const Mat2& a);

// Two-component state vector in the {|0>=early, |1>=late} basis.
struct Ket {
    cplx a{0.0, 0.0};
    cplx b{0.0, 0.0};

    double norm_sq() const { return std::norm(a) + std::norm(b); }
};

// Fixed Pauli operator basis sigma_0=I, sigma_1=X, sigma_2=Y, sigma_3=Z.
// The whole project shares this ordering.
const Mat2& pauli(int k);

// The six canonical preparation states.
enum class StateLabel { Zero, One, Plus, Minus, PlusI, MinusI };

Ket ideal_ket(StateLabel s);
const char* state_name(StateLabel s);
constexpr std::array<StateLabel, 6> kAllStates = {
    StateLabel::Zero,  StateLabel::One,   StateLabel::Plus,
    StateLabel::Minus, StateLabel::PlusI, StateLabel::MinusI};

// 2x2 Hermitian, trace-1, PSD state of a time-bin qubit.
// Construction validates the invariants (Hermitian to 1e-12, trace to 1e-9,
// eigenvalues >= -1e-9) and throws std::invalid_argument on violation.
class DensityMatrix {
  public:
    static DensityMatrix from_matrix(const Mat2& m);
    static DensityMatrix from_pure(const Ket& psi);
    static DensityMatrix from_bloch(double x, double y, double z);
    static DensityMatrix maximally_mixed();
    static DensityMatrix from_label(StateLabel s) { return from_pure(ideal_ket(s)); }

    const Mat2& matrix() const { return m_; }
    cplx operator()(int r, int c) const { return m_(r, c); }

  private:
    explicit DensityMatrix(const Mat2& m) : m_(m) {}
    Mat2 m_;
};

// 4x4 Hermitian chi matrix in the Pauli basis: rho_out = sum chi_lk s_l rho s_k.
struct ProcessMatrix {
    std::array<cplx, 16> chi{};

    cplx& operator()(int l, int k) { return chi[static_cast<size_t>(l) * 4 + k]; }
    const cplx& operator()(int l, int k) const { return chi[static_cast<size_t>(l) * 4 + k]; }

    static ProcessMatrix identity_process();
    // chi_kk = 1/4 for all k: the fully depolarizing channel.
    static ProcessMatrix depolarizing_process();

    // max |sum_{l,k} chi_lk s_k s_l - I| elementwise (trace-preservation defect).
    double trace_preservation_defect() const;
    bool is_hermitian(double tol = 1e-12) const;
};

struct FidelityReport {
    double f0 = 0.0;  // output process vs ideal
    double f1 = 0.0;  // input (back-to-back) process vs ideal
    double f2 = 0.0;  // output process vs input process
    std::array<double, 3> uncertainties{};
};

// <ideal|rho|ideal>. Throws if the ideal ket is not normalized.
double state_fidelity(const DensityMatrix& rho, const Ket& ideal);

// Fidelity between two qubit mixed states: Tr(rho sigma) + 2 sqrt(det rho det sigma).
double state_overlap_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// rho_out = sum_{l,k} chi_lk s_l rho s_k. The result is renormalized to unit
// trace; if trace_deviation is non-null it receives |Tr(rho_out) - 1| so a
// non-trace-preserving chi can be flagged by the caller.
DensityMatrix apply_process(const ProcessMatrix& chi, const DensityMatrix& rho,
                            double* trace_deviation = nullptr);

// F_proc = Re Tr(chi_ideal chi).
double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal);

// r_k = Tr(rho sigma_k), k = x,y,z.
std::array<double, 3> bloch_vector(const DensityMatrix& rho);

// h2(x) = -x log2 x - (1-x) log2 (1-x), with h2(0)=h2(1)=0.
// Throws std::invalid_argument outside [0,1].
double binary_entropy(double x);

// --- Hermitian eigensolvers -------------------------------------------------

struct Eig2 {
    std::array<double, 2> values{};  // ascending
    std::array<Ket, 2> vectors{};
};

// Closed-form spectral decomposition of a 2x2 Hermitian matrix. Eigenvector
// phase convention: first nonzero component real and positive.
Eig2 eig_hermitian_2x2(const Mat2& a);

struct Eig4 {
    std::array<double, 4> values{};            // ascending
    std::array<std::array<cplx, 4>, 4> vectors{};  // vectors[i] pairs values[i]
};

// Cyclic complex Jacobi iteration, convergence tolerance 1e-12 on the
// off-diagonal norm. Input must be Hermitian.
Eig4 eig_hermitian_4x4(const std::array<cplx, 16>& a);

}  // namespace qlink
