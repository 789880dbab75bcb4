#include "qlink/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlink {

namespace {
constexpr double kHermTol = 1e-12;
constexpr double kTraceTol = 1e-9;
constexpr double kPsdTol = 1e-9;
const cplx kI{0.0, 1.0};
}  // namespace

Mat2 Mat2::identity() {
    Mat2 r;
    r(0, 0) = 1.0;
    r(1, 1) = 1.0;
    return r;
}

Mat2 Mat2::adjoint() const {
    Mat2 r;
    r(0, 0) = std::conj((*this)(0, 0));
    r(0, 1) = std::conj((*this)(1, 0));
    r(1, 0) = std::conj((*this)(0, 1));
    r(1, 1) = std::conj((*this)(1, 1));
    return r;
}

Mat2 Mat2::operator+(const Mat2& o) const {
    Mat2 r;
    for (size_t i = 0; i < 4; ++i) r.m[i] = m[i] + o.m[i];
    return r;
}

Mat2 Mat2::operator-(const Mat2& o) const {
    Mat2 r;
    for (size_t i = 0; i < 4; ++i) r.m[i] = m[i] - o.m[i];
    return r;
}

Mat2 Mat2::operator*(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j);
    return r;
}

Mat2 Mat2::operator*(cplx s) const {
    Mat2 r;
    for (size_t i = 0; i < 4; ++i) r.m[i] = m[i] * s;
    return r;
}

Mat2 operator*(cplx s, const Mat2& a) { return a * s; }

const Mat2& pauli(int k) {
    static const std::array<Mat2, 4> sig = [] {
        std::array<Mat2, 4> s;
        s[0] = Mat2::identity();
        s[1](0, 1) = 1.0;
        s[1](1, 0) = 1.0;
        s[2](0, 1) = -kI;
        s[2](1, 0) = kI;
        s[3](0, 0) = 1.0;
        s[3](1, 1) = -1.0;
        return s;
    }();
    if (k < 0 || k > 3) throw std::invalid_argument("pauli index out of range");
    return sig[static_cast<size_t>(k)];
}

Ket ideal_ket(StateLabel s) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (s) {
        case StateLabel::Zero: return {1.0, 0.0};
        case StateLabel::One: return {0.0, 1.0};
        case StateLabel::Plus: return {r, r};
        case StateLabel::Minus: return {r, -r};
        case StateLabel::PlusI: return {r, r * kI};
        case StateLabel::MinusI: return {r, -r * kI};
    }
    throw std::invalid_argument("bad state label");
}

const char* state_name(StateLabel s) {
    switch (s) {
        case StateLabel::Zero: return "0";
        case StateLabel::One: return "1";
        case StateLabel::Plus: return "+";
        case StateLabel::Minus: return "-";
        case StateLabel::PlusI: return "+i";
        case StateLabel::MinusI: return "-i";
    }
    return "?";
}

DensityMatrix DensityMatrix::from_matrix(const Mat2& m) {
    if (std::abs(m(0, 0).imag()) > kHermTol || std::abs(m(1, 1).imag()) > kHermTol ||
        std::abs(m(0, 1) - std::conj(m(1, 0))) > kHermTol)
        throw std::invalid_argument("density matrix not Hermitian");
    if (std::abs(m.trace() - 1.0) > kTraceTol)
        throw std::invalid_argument("density matrix trace != 1");
    // 2x2 PSD check via the closed-form spectrum.
    const double a = m(0, 0).real(), d = m(1, 1).real();
    const double mean = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
    if (mean - rad < -kPsdTol)
        throw std::invalid_argument("density matrix not positive semidefinite");
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::from_pure(const Ket& psi) {
    const double n = psi.norm_sq();
    if (std::abs(n - 1.0) > 1e-9) throw std::invalid_argument("ket not normalized");
    Mat2 m;
    m(0, 0) = psi.a * std::conj(psi.a);
    m(0, 1) = psi.a * std::conj(psi.b);
    m(1, 0) = psi.b * std::conj(psi.a);
    m(1, 1) = psi.b * std::conj(psi.b);
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::from_bloch(double x, double y, double z) {
    const double r2 = x * x + y * y + z * z;
    if (r2 > 1.0 + 1e-9) throw std::invalid_argument("Bloch vector outside unit ball");
    Mat2 m = 0.5 * cplx(1.0) *
             (Mat2::identity() + cplx(x) * pauli(1) + cplx(y) * pauli(2) + cplx(z) * pauli(3));
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::maximally_mixed() {
    return DensityMatrix(Mat2::identity() * cplx(0.5));
}

ProcessMatrix ProcessMatrix::identity_process() {
    ProcessMatrix p;
    p(0, 0) = 1.0;
    return p;
}

ProcessMatrix ProcessMatrix::depolarizing_process() {
    ProcessMatrix p;
    for (int k = 0; k < 4; ++k) p(k, k) = 0.25;
    return p;
}

double ProcessMatrix::trace_preservation_defect() const {
    Mat2 s;
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k) s = s + (*this)(l, k) * (pauli(k) * pauli(l));
    const Mat2 d = s - Mat2::identity();
    double worst = 0.0;
    for (const cplx& e : d.m) worst = std::max(worst, std::abs(e));
    return worst;
}

bool ProcessMatrix::is_hermitian(double tol) const {
    for (int l = 0; l < 4; ++l)
        for (int k = l; k < 4; ++k)
            if (std::abs((*this)(l, k) - std::conj((*this)(k, l))) > tol) return false;
    return true;
}

double state_fidelity(const DensityMatrix& rho, const Ket& ideal) {
    if (std::abs(ideal.norm_sq() - 1.0) > 1e-9)
        throw std::invalid_argument("ideal ket not normalized");
    const Mat2& m = rho.matrix();
    const cplx f = std::conj(ideal.a) * (m(0, 0) * ideal.a + m(0, 1) * ideal.b) +
                   std::conj(ideal.b) * (m(1, 0) * ideal.a + m(1, 1) * ideal.b);
    return f.real();
}

double state_overlap_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    const Mat2& a = rho.matrix();
    const Mat2& b = sigma.matrix();
    const cplx tr = (a * b).trace();
    const double det_a = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)).real();
    const double det_b = (b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0)).real();
    const double f = tr.real() + 2.0 * std::sqrt(std::max(0.0, det_a) * std::max(0.0, det_b));
    return std::clamp(f, 0.0, 1.0);
}

DensityMatrix apply_process(const ProcessMatrix& chi, const DensityMatrix& rho,
                            double* trace_deviation) {
    Mat2 out;
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k)
            out = out + chi(l, k) * (pauli(l) * rho.matrix() * pauli(k));
    // Hermitize away floating-point asymmetry before validating.
    out = 0.5 * cplx(1.0) * (out + out.adjoint());
    const double tr = out.trace().real();
    if (trace_deviation) *trace_deviation = std::abs(tr - 1.0);
    if (tr <= 0.0) throw std::invalid_argument("process output has non-positive trace");
    out = out * cplx(1.0 / tr);
    return DensityMatrix::from_matrix(out);
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal) {
    cplx f = 0.0;
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k) f += chi_ideal(l, k) * chi(k, l);
    return f.real();
}

std::array<double, 3> bloch_vector(const DensityMatrix& rho) {
    std::array<double, 3> r{};
    for (int k = 1; k <= 3; ++k) r[static_cast<size_t>(k - 1)] = (rho.matrix() * pauli(k)).trace().real();
    return r;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("binary_entropy argument outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

namespace {
// Rotate the phase of a vector so its first component of non-negligible
// magnitude is real and positive.
void fix_phase(cplx* v, int n) {
    for (int i = 0; i < n; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            const cplx ph = std::conj(v[i]) / std::abs(v[i]);
            for (int j = 0; j < n; ++j) v[j] *= ph;
            return;
        }
    }
}
}  // namespace

Eig2 eig_hermitian_2x2(const Mat2& a) {
    const double p = a(0, 0).real(), q = a(1, 1).real();
    const cplx b = a(0, 1);
    const double mean = 0.5 * (p + q);
    const double rad = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(b));
    Eig2 e;
    e.values = {mean - rad, mean + rad};
    for (int i = 0; i < 2; ++i) {
        const double w = e.values[static_cast<size_t>(i)];
        Ket v;
        if (std::abs(b) > 1e-15) {
            v = {b, cplx(w - p)};
        } else if (p <= q) {
            v = (i == 0) ? Ket{1.0, 0.0} : Ket{0.0, 1.0};
        } else {
            v = (i == 0) ? Ket{0.0, 1.0} : Ket{1.0, 0.0};
        }
        const double n = std::sqrt(v.norm_sq());
        v.a /= n;
        v.b /= n;
        cplx comps[2] = {v.a, v.b};
        fix_phase(comps, 2);
        e.vectors[static_cast<size_t>(i)] = {comps[0], comps[1]};
    }
    return e;
}

Eig4 eig_hermitian_4x4(const std::array<cplx, 16>& a_in) {
    constexpr int n = 4;
    std::array<cplx, 16> a = a_in;
    std::array<cplx, 16> v{};
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i * n + i)] = 1.0;

    auto at = [](std::array<cplx, 16>& mat, int r, int c) -> cplx& {
        return mat[static_cast<size_t>(r * n + c)];
    };

    double norm = 0.0;
    for (const cplx& e : a) norm += std::norm(e);
    norm = std::sqrt(norm);
    const double tol = 1e-12 * std::max(norm, 1.0);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(at(a, p, q));
        if (std::sqrt(2.0 * off) < tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = at(a, p, q);
                const double mag = std::abs(apq);
                if (mag < tol * 1e-4) continue;
                // Phase so the pivot becomes real, then a real Jacobi rotation.
                const cplx ph = apq / mag;  // a_pq * conj(ph) is real = mag
                const double app = at(a, p, p).real();
                const double aqq = at(a, q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // Column update: U_pp=c, U_qp=-s*conj(ph), U_pq=s*ph, U_qq=c
                // with columns p,q of A and V mapped through U; rows through U^dagger.
                const cplx upq = s * ph;
                const cplx uqp = -s * std::conj(ph);
                for (int i = 0; i < n; ++i) {
                    const cplx aip = at(a, i, p), aiq = at(a, i, q);
                    at(a, i, p) = c * aip + uqp * aiq;
                    at(a, i, q) = upq * aip + c * aiq;
                    const cplx vip = at(v, i, p), viq = at(v, i, q);
                    at(v, i, p) = c * vip + uqp * viq;
                    at(v, i, q) = upq * vip + c * viq;
                }
                for (int j = 0; j < n; ++j) {
                    const cplx apj = at(a, p, j), aqj = at(a, q, j);
                    at(a, p, j) = c * apj + std::conj(uqp) * aqj;
                    at(a, q, j) = std::conj(upq) * apj + c * aqj;
                }
            }
        }
    }

    std::array<int, 4> order = {0, 1, 2, 3};
    std::array<double, 4> w{};
    for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = at(a, i, i).real();
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return w[static_cast<size_t>(x)] < w[static_cast<size_t>(y)];
    });

    Eig4 e;
    for (int i = 0; i < n; ++i) {
        const int src = order[static_cast<size_t>(i)];
        e.values[static_cast<size_t>(i)] = w[static_cast<size_t>(src)];
        std::array<cplx, 4> vec{};
        for (int r = 0; r < n; ++r) vec[static_cast<size_t>(r)] = at(v, r, src);
        fix_phase(vec.data(), n);
        e.vectors[static_cast<size_t>(i)] = vec;
    }
    return e;
}

}  // namespace qlink
