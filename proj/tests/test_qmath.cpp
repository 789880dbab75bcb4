#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qlink/qmath.hpp"

using namespace qlink;

TEST_CASE("pauli orthogonality Tr(s_j s_k) = 2 delta_jk") {
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            const cplx tr = (pauli(j) * pauli(k)).trace();
            CHECK(std::abs(tr.imag()) < 1e-12);
            CHECK(std::abs(tr.real() - (j == k ? 2.0 : 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("pauli squares are the identity") {
    for (int k = 1; k <= 3; ++k) {
        const Mat2 sq = pauli(k) * pauli(k);
        CHECK(std::abs(sq(0, 0) - cplx(1.0)) < 1e-15);
        CHECK(std::abs(sq(1, 1) - cplx(1.0)) < 1e-15);
        CHECK(std::abs(sq(0, 1)) < 1e-15);
    }
}

TEST_CASE("state_fidelity identity and mixed cases") {
    CHECK(state_fidelity(DensityMatrix::from_label(StateLabel::Zero),
                         ideal_ket(StateLabel::Zero)) == doctest::Approx(1.0));
    CHECK(state_fidelity(DensityMatrix::maximally_mixed(), ideal_ket(StateLabel::Zero)) ==
          doctest::Approx(0.5));
    CHECK_THROWS_AS(state_fidelity(DensityMatrix::maximally_mixed(), Ket{0.5, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("state_fidelity is 1 iff rho is the ideal projector") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double x = uni(rng), y = uni(rng), z = uni(rng);
        const double n = std::sqrt(x * x + y * y + z * z);
        if (n > 1.0) { x /= n; y /= n; z /= n; }
        const DensityMatrix rho = DensityMatrix::from_bloch(x, y, z);
        const double f = state_fidelity(rho, ideal_ket(StateLabel::Plus));
        const std::array<double, 3> r = bloch_vector(rho);
        const bool is_plus = std::abs(r[0] - 1.0) < 1e-9 && std::abs(r[1]) < 1e-9 &&
                             std::abs(r[2]) < 1e-9;
        CHECK((f >= 1.0 - 1e-9) == is_plus);
    }
}

TEST_CASE("apply_process trivial channels") {
    const DensityMatrix zero = DensityMatrix::from_label(StateLabel::Zero);

    SUBCASE("identity chi is a no-op") {
        const DensityMatrix out = apply_process(ProcessMatrix::identity_process(), zero);
        CHECK(std::abs(out(0, 0) - cplx(1.0)) < 1e-12);
    }
    SUBCASE("bit-flip chi maps |0><0| to |1><1|") {
        ProcessMatrix flip;
        flip(1, 1) = 1.0;
        const DensityMatrix out = apply_process(flip, zero);
        CHECK(std::abs(out(1, 1) - cplx(1.0)) < 1e-12);
        CHECK(std::abs(out(0, 0)) < 1e-12);
    }
    SUBCASE("half identity + half phase-flip fully dephases |+>") {
        ProcessMatrix chi;
        chi(0, 0) = 0.5;
        chi(3, 3) = 0.5;
        const DensityMatrix out =
            apply_process(chi, DensityMatrix::from_label(StateLabel::Plus));
        // oracle: 0.5 rho + 0.5 Z rho Z evaluated directly
        const Mat2 rho = DensityMatrix::from_label(StateLabel::Plus).matrix();
        const Mat2 expect = cplx(0.5) * rho + cplx(0.5) * (pauli(3) * rho * pauli(3));
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(out(r, c) - expect(r, c)) < 1e-12);
        CHECK(std::abs(out(0, 1)) < 1e-12);  // coherence gone: I/2
        CHECK(std::abs(out(0, 0) - cplx(0.5)) < 1e-12);
    }
}

TEST_CASE("apply_process is linear in rho") {
    ProcessMatrix chi;
    chi(0, 0) = 0.85;
    chi(1, 1) = 0.05;
    chi(2, 2) = 0.04;
    chi(3, 3) = 0.06;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double a = uni(rng);
        const DensityMatrix r1 = DensityMatrix::from_bloch(0.3, -0.2, 0.4);
        const DensityMatrix r2 = DensityMatrix::from_bloch(-0.5, 0.1, -0.3);
        Mat2 mix = cplx(a) * r1.matrix() + cplx(1.0 - a) * r2.matrix();
        const DensityMatrix lhs = apply_process(chi, DensityMatrix::from_matrix(mix));
        const Mat2 rhs = cplx(a) * apply_process(chi, r1).matrix() +
                         cplx(1.0 - a) * apply_process(chi, r2).matrix();
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(lhs(r, c) - rhs(r, c)) < 1e-12);
    }
}

TEST_CASE("apply_process flags non-trace-preserving chi") {
    ProcessMatrix chi;
    chi(0, 0) = 0.8;  // trace-decreasing
    double dev = 0.0;
    apply_process(chi, DensityMatrix::maximally_mixed(), &dev);
    CHECK(dev > 1e-6);
    double dev_tp = 1.0;
    apply_process(ProcessMatrix::identity_process(), DensityMatrix::maximally_mixed(), &dev_tp);
    CHECK(dev_tp < 1e-12);
}

TEST_CASE("process_fidelity") {
    const ProcessMatrix ident = ProcessMatrix::identity_process();
    CHECK(process_fidelity(ident, ident) == doctest::Approx(1.0));
    // oracle: Tr(chi_ideal chi) with chi_kk = 1/4 picks out chi_00 = 1/4
    CHECK(process_fidelity(ProcessMatrix::depolarizing_process(), ident) ==
          doctest::Approx(0.25));
}

TEST_CASE("bloch_vector canonical states") {
    auto check = [](StateLabel s, double x, double y, double z) {
        const std::array<double, 3> r = bloch_vector(DensityMatrix::from_label(s));
        CHECK(r[0] == doctest::Approx(x).epsilon(1e-12));
        CHECK(r[1] == doctest::Approx(y).epsilon(1e-12));
        CHECK(r[2] == doctest::Approx(z).epsilon(1e-12));
    };
    check(StateLabel::Zero, 0, 0, 1);
    check(StateLabel::One, 0, 0, -1);
    check(StateLabel::Plus, 1, 0, 0);
    check(StateLabel::PlusI, 0, 1, 0);
    const std::array<double, 3> mixed = bloch_vector(DensityMatrix::maximally_mixed());
    CHECK(std::abs(mixed[0]) + std::abs(mixed[1]) + std::abs(mixed[2]) < 1e-15);
}

TEST_CASE("binary_entropy values and symmetry") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    // direct evaluation of -x log2 x - (1-x) log2 (1-x) at x = 0.0025
    CHECK(std::abs(binary_entropy(0.0025) - 0.02521) < 2e-5);
    CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double x = uni(rng);
        CHECK(std::abs(binary_entropy(x) - binary_entropy(1.0 - x)) < 1e-12);
    }
}

TEST_CASE("density matrix invariants are enforced") {
    Mat2 bad_trace = Mat2::identity();
    CHECK_THROWS_AS(DensityMatrix::from_matrix(bad_trace), std::invalid_argument);

    Mat2 non_herm;
    non_herm(0, 0) = 0.5;
    non_herm(1, 1) = 0.5;
    non_herm(0, 1) = cplx(0.1, 0.0);
    non_herm(1, 0) = cplx(0.2, 0.0);
    CHECK_THROWS_AS(DensityMatrix::from_matrix(non_herm), std::invalid_argument);

    Mat2 neg;
    neg(0, 0) = 1.2;
    neg(1, 1) = -0.2;
    CHECK_THROWS_AS(DensityMatrix::from_matrix(neg), std::invalid_argument);

    CHECK_THROWS_AS(DensityMatrix::from_bloch(0.9, 0.9, 0.9), std::invalid_argument);
}

TEST_CASE("2x2 eigensolver on random Hermitian matrices") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Mat2 a;
        a(0, 0) = uni(rng);
        a(1, 1) = uni(rng);
        a(0, 1) = cplx(uni(rng), uni(rng));
        a(1, 0) = std::conj(a(0, 1));
        const Eig2 e = eig_hermitian_2x2(a);
        CHECK(e.values[0] <= e.values[1]);
        for (int v = 0; v < 2; ++v) {
            const Ket& k = e.vectors[static_cast<size_t>(v)];
            // A v = w v
            const cplx r0 = a(0, 0) * k.a + a(0, 1) * k.b - e.values[static_cast<size_t>(v)] * k.a;
            const cplx r1 = a(1, 0) * k.a + a(1, 1) * k.b - e.values[static_cast<size_t>(v)] * k.b;
            CHECK(std::abs(r0) < 1e-12);
            CHECK(std::abs(r1) < 1e-12);
            CHECK(k.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("4x4 Jacobi eigensolver on random Hermitian matrices") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::array<cplx, 16> a{};
        for (int r = 0; r < 4; ++r) {
            a[static_cast<size_t>(r * 4 + r)] = uni(rng);
            for (int c = r + 1; c < 4; ++c) {
                const cplx v(uni(rng), uni(rng));
                a[static_cast<size_t>(r * 4 + c)] = v;
                a[static_cast<size_t>(c * 4 + r)] = std::conj(v);
            }
        }
        const Eig4 e = eig_hermitian_4x4(a);
        for (int v = 0; v < 4; ++v) {
            if (v > 0) CHECK(e.values[static_cast<size_t>(v - 1)] <= e.values[static_cast<size_t>(v)]);
            for (int r = 0; r < 4; ++r) {
                cplx acc = 0.0;
                for (int c = 0; c < 4; ++c)
                    acc += a[static_cast<size_t>(r * 4 + c)] *
                           e.vectors[static_cast<size_t>(v)][static_cast<size_t>(c)];
                acc -= e.values[static_cast<size_t>(v)] *
                       e.vectors[static_cast<size_t>(v)][static_cast<size_t>(r)];
                CHECK(std::abs(acc) < 1e-10);
            }
        }
        // trace preserved by the spectrum
        double tr = 0.0, wsum = 0.0;
        for (int d = 0; d < 4; ++d) {
            tr += a[static_cast<size_t>(d * 4 + d)].real();
            wsum += e.values[static_cast<size_t>(d)];
        }
        CHECK(tr == doctest::Approx(wsum).epsilon(1e-10));
    }
}
