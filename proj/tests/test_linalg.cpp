// SPDX-License-Identifier: MIT
#include "spiketensor/linalg.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace spiketensor;
using namespace spiketensor::testing;

namespace {

double residual(const Matrix& a, std::span<const double> v, double lambda) {
    const Vector av = a * v;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (av[i] - lambda * v[i]) * (av[i] - lambda * v[i]);
    return std::sqrt(s);
}

/// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric method), descending.
std::vector<double> roots3(const Matrix& a) {
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) + (a(2, 2) - q) * (a(2, 2) - q) +
                      2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    if (p == 0.0) return {q, q, q};
    Matrix b = a;
    for (std::size_t i = 0; i < 3; ++i) b(i, i) -= q;
    b *= 1.0 / p;
    const double det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                       b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                       b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2 * p * std::cos(phi);
    const double e3 = q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3);
    return {e1, 3 * q - e1 - e3, e3};
}

double power_method_norm(const Matrix& a) {
    // Power method on A^2 for the largest |eigenvalue|.
    Vector v(a.rows(), 1.0);
    v[0] = 1.3;
    double est = 0.0;
    for (int it = 0; it < 5000; ++it) {
        Vector w = a * std::span<const double>(a * std::span<const double>(v));
        const double n = norm2(w);
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / n;
        est = std::sqrt(n);
    }
    return est;
}

}  // namespace

TEST(Philox, KnownAnswers) {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    EXPECT_EQ(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(SymEig, Diagonal) {
    const Vector d{3, 1, 2};
    const auto r = sym_eig(Matrix::diagonal(d));
    EXPECT_EQ(r.eigenvalues, (Vector{3, 2, 1}));
    const std::size_t perm[] = {0, 2, 1};
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.eigenvectors(i, j), i == perm[j] ? 1.0 : 0.0);
}

TEST(SymEig, Classic2x2) {
    const auto r = sym_eig(Matrix::from_rows({{2, 1}, {1, 2}}));
    EXPECT_NEAR(r.eigenvalues[0], 3.0, 1e-14);
    EXPECT_NEAR(r.eigenvalues[1], 1.0, 1e-14);
    const double s = 1 / std::sqrt(2.0);
    EXPECT_NEAR(r.eigenvectors(0, 0), s, 1e-14);
    EXPECT_NEAR(r.eigenvectors(1, 0), s, 1e-14);
    // first largest-magnitude entry nonnegative
    EXPECT_NEAR(r.eigenvectors(0, 1), s, 1e-14);
    EXPECT_NEAR(r.eigenvectors(1, 1), -s, 1e-14);
}

TEST(SymEig, Reconstruction8x8) {
    Rng rng(20, 0);
    const Matrix a = random_symmetric(8, rng);
    const auto r = sym_eig(a);
    Matrix rec(8, 8);
    for (std::size_t k = 0; k < 8; ++k)
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j)
                rec(i, j) += r.eigenvalues[k] * r.eigenvectors(i, k) * r.eigenvectors(j, k);
    EXPECT_LE((rec - a).frobenius_norm(), 1e-10 * a.frobenius_norm());
}

TEST(SymEig, ResidualOrthonormalitySignConvention) {
    Rng rng(21, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(15);
        const Matrix a = random_symmetric(n, rng);
        const auto r = sym_eig(a);
        const double fa = a.frobenius_norm();
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_LE(residual(a, r.eigenvectors.column(k), r.eigenvalues[k]), 1e-9 * fa);
            if (k > 0) EXPECT_GE(r.eigenvalues[k - 1], r.eigenvalues[k]);
            for (std::size_t l = 0; l < n; ++l)
                EXPECT_NEAR(dot(r.eigenvectors.column(k), r.eigenvectors.column(l)), k == l ? 1.0 : 0.0, 1e-10);
            const auto col = r.eigenvectors.column(k);
            std::size_t arg = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::abs(col[i]) > std::abs(col[arg])) arg = i;
            EXPECT_GE(col[arg], 0.0);
        }
    }
}

TEST(SymEig, ClosedFormRoots) {
    Rng rng(22, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix a2 = random_symmetric(2, rng);
        const double m = 0.5 * (a2(0, 0) + a2(1, 1));
        const double h = std::hypot(0.5 * (a2(0, 0) - a2(1, 1)), a2(0, 1));
        const auto r2 = sym_eig(a2);
        EXPECT_NEAR(r2.eigenvalues[0], m + h, 1e-10);
        EXPECT_NEAR(r2.eigenvalues[1], m - h, 1e-10);

        const Matrix a3 = random_symmetric(3, rng);
        const auto want = roots3(a3);
        const auto r3 = sym_eig(a3);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r3.eigenvalues[i], want[i], 1e-10);
    }
}

TEST(SymEig, RejectsNonSquareAndNonFinite) {
    EXPECT_THROW(sym_eig(Matrix(2, 3)), InvalidArgument);
    Matrix a(2, 2);
    a(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(sym_eig(a), InvalidArgument);
}

TEST(TopEig, IdentityTieBreak) {
    const auto t = top_eigvec(Matrix::identity(4));
    EXPECT_EQ(t.value, 1.0);
    EXPECT_EQ(t.vector.values(), (Vector{1, 0, 0, 0}));
    EXPECT_TRUE(t.degenerate_top);
}

TEST(TopEig, RankOneShift) {
    Rng rng(23, 0);
    const auto u = sample_unit_sphere(7, rng);
    Matrix a = Matrix::identity(7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) a(i, j) += 25.0 * u[i] * u[j];
    const auto t = top_eigvec(a);
    EXPECT_NEAR(t.value, 26.0, 1e-12);
    EXPECT_FALSE(t.degenerate_top);
    EXPECT_NEAR(std::abs(dot(t.vector, u)), 1.0, 1e-12);
}

TEST(TopEig, AgreesWithSymEig) {
    Rng rng(24, 0);
    const Matrix a = random_symmetric(10, rng);
    const auto r = sym_eig(a);
    const auto t = top_eigvec(a);
    EXPECT_EQ(t.value, r.eigenvalues[0]);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(t.vector[i], r.eigenvectors(i, 0));
}

TEST(TopEig, ShiftInvarianceBitwiseForRepresentableShifts) {
    Rng rng(25, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(10);
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = std::round(rng.normal() * 64.0) / 64.0;
        const double c = std::round(rng.normal() * 1000.0) / 8.0;
        const auto base = top_eigvec(a);
        const auto shifted = top_eigvec(a + Matrix::identity(n) * c);
        EXPECT_EQ(base.vector, shifted.vector);
        EXPECT_EQ(base.degenerate_top, shifted.degenerate_top);
    }
}

TEST(TopEig, ShiftInvarianceArbitraryShiftsWithinTolerance) {
    Rng rng(26, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(10);
        const Matrix a = random_symmetric(n, rng);
        const double c = 100.0 * rng.normal();
        const auto r = sym_eig(a);
        if (r.eigenvalues[0] - r.eigenvalues[1] < 1e-3) continue;
        const auto base = top_eigvec(a);
        const auto shifted = top_eigvec(a + Matrix::identity(n) * c);
        EXPECT_LT(max_abs_diff(base.vector, shifted.vector), 1e-9);
    }
}

TEST(TopLeftSingvec, RankOne) {
    Rng rng(27, 0);
    const auto u = sample_unit_sphere(5, rng);
    Vector w(9);
    for (auto& x : w) x = rng.normal();
    Matrix m(5, 9);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 9; ++j) m(i, j) = u[i] * w[j];
    EXPECT_NEAR(std::abs(dot(top_left_singvec(m), u)), 1.0, 1e-12);
}

TEST(TopLeftSingvec, IdentityTieBreak) {
    EXPECT_EQ(top_left_singvec(Matrix::identity(3)).values(), (Vector{1, 0, 0}));
}

TEST(TopLeftSingvec, Residual) {
    Rng rng(28, 0);
    Matrix m(4, 12);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 12; ++j) m(i, j) = rng.normal();
    const auto v = top_left_singvec(m);
    const Matrix g = gram(m);
    const double s2 = dot(v, std::span<const double>(g * v.span()));
    EXPECT_LE(residual(g, v, s2), 1e-9 * std::pow(m.frobenius_norm(), 2));
    EXPECT_NEAR(s2, sym_eig(g).eigenvalues[0], 1e-10 * s2);
}

TEST(Psi, Values) {
    EXPECT_EQ(psi_scalar(0.0), 0.0);
    EXPECT_NEAR(psi_scalar(1.0), std::log(2.5), 1e-15);
    for (double x = 0.0; x < 60.0; x += 0.37) EXPECT_EQ(psi_scalar(-x), -psi_scalar(x));
}

TEST(Psi, SandwichAndMonotone) {
    double prev = -std::numeric_limits<double>::infinity();
    for (long i = -50000; i <= 50000; ++i) {
        const double x = static_cast<double>(i) * 1e-3;
        const double lo = -std::log(1 - x + x * x / 2), hi = std::log(1 + x + x * x / 2);
        const double y = psi_scalar(x);
        EXPECT_LE(lo, y + 1e-12);
        EXPECT_LE(y, hi + 1e-12);
        if (x >= 0) EXPECT_NEAR(y, hi, 1e-12);
        if (x <= 0) EXPECT_NEAR(y, lo, 1e-12);
        EXPECT_GE(y, prev);
        prev = y;
    }
}

TEST(PsiMatrix, ZeroAndDiagonal) {
    const Matrix z = psi_matrix(Matrix(4, 4), 0.7);
    for (double x : z.values()) EXPECT_EQ(x, 0.0);
    const Vector d{2.5, -1.5};
    const Matrix p = psi_matrix(Matrix::diagonal(d), 1.0);
    EXPECT_NEAR(p(0, 0), psi_scalar(2.5), 1e-14);
    EXPECT_NEAR(p(1, 1), psi_scalar(-1.5), 1e-14);
    EXPECT_EQ(p(0, 1), 0.0);
    EXPECT_THROW(psi_matrix(Matrix::diagonal(d), 0.0), InvalidArgument);
}

TEST(PsiMatrix, NormBoundAndCommutation) {
    Rng rng(29, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(10);
        const Matrix a = random_symmetric(n, rng) * (1.0 + 20.0 * rng.uniform());
        const double theta = 0.01 + rng.uniform();
        const Matrix p = psi_matrix(a, theta);
        const double na = operator_norm_sym(a);
        EXPECT_LE(operator_norm_sym(p), std::log(1 + theta * na + theta * theta * na * na / 2) + 1e-12);
        const Matrix comm = a * p - p * a;
        EXPECT_LE(comm.frobenius_norm(), 1e-8 * std::pow(a.frobenius_norm(), 2));
    }
}

TEST(OperatorNorm, Examples) {
    const Vector d{-5, 3};
    EXPECT_NEAR(operator_norm_sym(Matrix::diagonal(d)), 5.0, 1e-14);
    Rng rng(30, 0);
    const auto u = sample_unit_sphere(6, rng);
    Matrix uu(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) uu(i, j) = u[i] * u[j];
    EXPECT_NEAR(operator_norm_sym(uu), 1.0, 1e-14);
    const Matrix a = random_symmetric(6, rng);
    const double pm = power_method_norm(a);
    EXPECT_NEAR(operator_norm_sym(a), pm, 1e-8 * pm);
}

TEST(SignConvention, FirstLargestMagnitude) {
    Vector v{-0.5, 0.5, 0.1};
    apply_sign_convention(v);
    EXPECT_EQ(v, (Vector{0.5, -0.5, -0.1}));
    Vector w{0.2, -0.7, 0.7};
    apply_sign_convention(w);
    EXPECT_EQ(w, (Vector{-0.2, 0.7, -0.7}));
}
