// SPDX-License-Identifier: MIT
#include "spiketensor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spiketensor {

namespace {

constexpr double kOffDiagTol = 1e-13;
constexpr int kMaxSweeps = 60;
constexpr double kTieTol = 1e-12;

std::size_t argmax_abs(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    return best;
}

}  // namespace

void apply_sign_convention(std::span<double> v) {
    if (v.empty()) return;
    if (v[argmax_abs(v)] < 0.0)
        for (double& x : v) x = -x;
}

SymEigResult sym_eig(const Matrix& input) {
    if (!input.square()) throw InvalidArgument("sym_eig: matrix is not square");
    const std::size_t n = input.rows();
    if (n == 0) throw InvalidArgument("sym_eig: empty matrix");
    for (double x : input.values())
        if (!std::isfinite(x)) throw InvalidArgument("sym_eig: non-finite entry");

    // Row-major working copy of A - shift*I; rows of `v` are eigenvectors.
    const double shift = input(0, 0);
    std::vector<double> a(n * n), v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (input(i, j) + input(j, i));
        a[i * n + i] -= shift;
        v[i * n + i] = 1.0;
    }

    double total = 0.0;
    for (double x : a) total += x * x;
    const double target = kOffDiagTol * kOffDiagTol * total;

    auto off_mass = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
        return s;
    };

    SymEigResult out;
    out.shift = shift;
    out.frame_norm = std::sqrt(total);
    std::vector<double> rp(n), rq(n);
    bool converged = off_mass() <= target;
    while (!converged) {
        if (out.sweeps == kMaxSweeps) throw std::runtime_error("sym_eig: Jacobi iteration did not converge");
        ++out.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = t * c;

                double* ap = a.data() + p * n;
                double* aq = a.data() + q * n;
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = ap[k], y = aq[k];
                    rp[k] = c * x - s * y;
                    rq[k] = s * x + c * y;
                }
                std::copy(rp.begin(), rp.end(), ap);
                std::copy(rq.begin(), rq.end(), aq);
                for (std::size_t k = 0; k < n; ++k) {
                    a[k * n + p] = rp[k];
                    a[k * n + q] = rq[k];
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                double* vp = v.data() + p * n;
                double* vq = v.data() + q * n;
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = vp[k], y = vq[k];
                    vp[k] = c * x - s * y;
                    vq[k] = s * x + c * y;
                }
            }
        }
        converged = off_mass() <= target;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

    out.eigenvalues.resize(n);
    out.offsets.resize(n);
    out.eigenvectors = Matrix(n, n);
    std::vector<double> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.offsets[c] = a[src * n + src];
        out.eigenvalues[c] = out.offsets[c] + shift;
        std::copy(v.begin() + static_cast<std::ptrdiff_t>(src * n),
                  v.begin() + static_cast<std::ptrdiff_t>((src + 1) * n), col.begin());
        const double nrm = norm2(col);
        for (double& x : col) x /= nrm;
        apply_sign_convention(col);
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = col[r];
    }
    return out;
}

TopEig top_eigvec(const SymEigResult& eig) {
    const auto& w = eig.offsets;
    const std::size_t n = w.size();
    const double tol = kTieTol * eig.frame_norm;

    std::size_t best = 0;
    std::size_t best_pos = argmax_abs(eig.eigenvectors.column(0));
    bool tie = false;
    for (std::size_t c = 1; c < n && w[0] - w[c] <= tol; ++c) {
        tie = true;
        const std::size_t pos = argmax_abs(eig.eigenvectors.column(c));
        if (pos < best_pos) {
            best = c;
            best_pos = pos;
        }
    }
    auto col = eig.eigenvectors.column(best);
    TopEig out;
    out.value = eig.eigenvalues[best];
    out.vector = UnitVector(Vector(col.begin(), col.end()));
    out.degenerate_top = tie;
    return out;
}

TopEig top_eigvec(const Matrix& a) { return top_eigvec(sym_eig(a)); }

UnitVector top_left_singvec(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw InvalidArgument("top_left_singvec: empty matrix");
    return top_eigvec(gram(m)).vector;
}

double psi_scalar(double x) {
    if (x >= 0.0) return std::log1p(x + 0.5 * x * x);
    return -std::log1p(-x + 0.5 * x * x);
}

Matrix psi_matrix(const SymEigResult& eig, double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("psi_matrix: theta must be positive");
    const std::size_t n = eig.eigenvalues.size();
    const Matrix& u = eig.eigenvectors;
    Vector f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = psi_scalar(theta * eig.eigenvalues[i]);
    Matrix out(n, n);
    for (std::size_t l = 0; l < n; ++l) {
        if (f[l] == 0.0) continue;
        auto ul = u.column(l);
        for (std::size_t j = 0; j < n; ++j) {
            const double s = f[l] * ul[j];
            for (std::size_t i = 0; i <= j; ++i) out(i, j) += ul[i] * s;
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < j; ++i) out(j, i) = out(i, j);
    return out;
}

Matrix psi_matrix(const Matrix& a, double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("psi_matrix: theta must be positive");
    return psi_matrix(sym_eig(a), theta);
}

double operator_norm_sym(const Matrix& a) {
    const auto eig = sym_eig(a);
    return std::max(std::abs(eig.eigenvalues.front()), std::abs(eig.eigenvalues.back()));
}

}  // namespace spiketensor
