// SPDX-License-Identifier: MIT
#pragma once

#include "spiketensor/tensor.hpp"

namespace spiketensor {

/// Full symmetric eigendecomposition. Eigenvalues descending; eigenvectors
/// are the matching columns, each with its first largest-magnitude entry
/// nonnegative.
struct SymEigResult {
    Vector eigenvalues;
    Matrix eigenvectors;
    /// Eigenvalues relative to `shift` (= a_11), as computed in the shifted frame.
    Vector offsets;
    double shift = 0.0;
    /// ||A - shift I||_F.
    double frame_norm = 0.0;
    std::size_t sweeps = 0;
};

struct TopEig {
    double value = 0.0;
    UnitVector vector;
    bool degenerate_top = false;
};

/// Cyclic Jacobi. The input is symmetrized as (A + A^T)/2 and processed as
/// A - a_11 I so the result does not depend on the diagonal offset. Converges
/// when the off-diagonal Frobenius mass drops to 1e-13 ||A||_F; throws after
/// 60 sweeps.
SymEigResult sym_eig(const Matrix& a);

/// Largest eigenvalue and eigenvector. Among eigenvalues tied with the top one,
/// picks the eigenvector whose largest-magnitude entry has the smallest index
/// and reports the tie through `degenerate_top`.
TopEig top_eigvec(const Matrix& a);
TopEig top_eigvec(const SymEigResult& eig);

/// Leading left singular vector, as the top eigenvector of M M^T.
UnitVector top_left_singvec(const Matrix& m);

/// Catoni-type influence function saturating both bounds:
/// log(1 + x + x^2/2) for x >= 0, -log(1 - x + x^2/2) for x < 0.
double psi_scalar(double x);

/// U diag(psi(theta * lambda_i)) U^T.
Matrix psi_matrix(const Matrix& a, double theta);
Matrix psi_matrix(const SymEigResult& eig, double theta);

/// max |eigenvalue|.
double operator_norm_sym(const Matrix& a);

/// Flips v so that its first largest-magnitude entry is nonnegative.
void apply_sign_convention(std::span<double> v);

}  // namespace spiketensor
