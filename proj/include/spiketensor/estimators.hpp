// SPDX-License-Identifier: MIT
#pragma once

#include "spiketensor/linalg.hpp"
#include "spiketensor/noise.hpp"
#include "spiketensor/rng.hpp"
#include "spiketensor/tensor.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spiketensor {

/// Raised when an estimator cannot produce a direction (e.g. a zero contraction).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Random assignment of the non-k fibers to groups I_1..I_n.
struct Partition {
    std::size_t n_groups = 0;
    std::vector<std::uint32_t> assignment;  // 0-based group per flattened non-k index

    [[nodiscard]] std::vector<std::size_t> group_sizes() const;
};

struct FixedTheta {
    double theta = 0.0;
    friend bool operator==(const FixedTheta&, const FixedTheta&) = default;
};
struct PlugInTheta {
    double lambda_guess = 0.0;
    friend bool operator==(const PlugInTheta&, const PlugInTheta&) = default;
};
/// Nonpositive bounds select the defaults sqrt(d_k) and ||X||_F.
struct LepskiTheta {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    friend bool operator==(const LepskiTheta&, const LepskiTheta&) = default;
};
using ThetaStrategy = std::variant<FixedTheta, PlugInTheta, LepskiTheta>;

struct RobustConfig {
    /// 0 selects ceil(10 ln d_k) per mode.
    std::size_t n_groups = 0;
    ThetaStrategy theta = PlugInTheta{3000.0};
    /// 0-based modes to estimate; empty means all.
    std::vector<std::size_t> modes;

    void validate() const;
    friend bool operator==(const RobustConfig&, const RobustConfig&) = default;
};

struct EstimateReport {
    std::string method;
    std::vector<std::size_t> modes;        // 0-based, parallel to `estimates`
    std::vector<UnitVector> estimates;
    double lambda_hat = 0.0;               // multilinear form at the estimates
    double lambda_robust = 0.0;            // robust-HOSVD diagnostic, 0 when unused
    std::size_t iterations = 0;
    std::vector<double> theta_used;        // per estimated mode, 0 when not applicable
    std::vector<bool> degenerate_top;      // per estimated mode
    std::vector<double> sin_angles;        // per estimated mode, filled when truth is given
    std::vector<double> trace;             // max sin angle per power iterate, when truth is given
    std::vector<double> objective_trace;   // ALS objective per sweep of the winning restart
    bool lepski_fallback = false;

    [[nodiscard]] bool any_degenerate() const;
    friend bool operator==(const EstimateReport&, const EstimateReport&) = default;
};

struct AlsOptions {
    std::size_t restarts = 20;
    std::size_t max_iters = 1000;
    /// Stop when |change in objective| <= tol * objective.
    double tol = 1e-12;
};

std::size_t default_group_count(std::size_t d);
std::size_t default_iterations(std::size_t d);

/// Leading left singular vector of every unfolding.
std::vector<UnitVector> hosvd_init(const DenseTensor& x);
EstimateReport hosvd_report(const DenseTensor& x, const SpikedTruth* truth = nullptr);

/// normalize(X contracted with `current` on every mode but k), sign-normalized.
/// `current` holds one vector per mode; entry k is ignored.
UnitVector power_step(const DenseTensor& x, std::size_t k, const std::vector<UnitVector>& current);

/// Simultaneous updates: every mode at step t+1 uses the step-t vectors.
EstimateReport power_iterate(const DenseTensor& x, const std::vector<UnitVector>& init, std::size_t iterations,
                             const SpikedTruth* truth = nullptr);

/// Best-of-restarts alternating rank-one fit with cyclic (Gauss-Seidel) mode updates.
EstimateReport als_rank1(const DenseTensor& x, const AlsOptions& options, Rng& rng);

Partition multinomial_partition(std::size_t count, std::size_t n_groups, Rng& rng);

/// S_j = sum over fibers in group j of (x x^T - diag(x x^T)).
std::vector<Matrix> robust_gram(const DenseTensor& x, std::size_t k, const Partition& part);

/// sqrt(8 ln d_k / (lambda^4/n + prod(dims))).
double theta_default(double lambda_guess, std::size_t n_groups, const Dims& dims, std::size_t k = 0);

/// (1/(n theta)) sum_j psi(theta S_j), with n = part.n_groups.
Matrix robust_vhat(const DenseTensor& x, std::size_t k, const Partition& part, double theta);
/// Same, from precomputed eigendecompositions of the S_j (nullopt for empty groups).
Matrix robust_vhat(const std::vector<std::optional<SymEigResult>>& group_eigs, std::size_t dk, double theta);

struct LepskiCandidate {
    double lambda = 0.0;
    Matrix vhat;
};

struct LepskiSelection {
    std::size_t index = 0;
    bool fallback = false;
};

/// lambda_l = 2^l lambda_min for l = 0, 1, ... while lambda_l <= 2 lambda_max; never empty.
std::vector<double> lepski_grid(double lambda_min, double lambda_max);

/// Smallest l with ||V_l - V_k|| <= (lambda_k^4/n + prod(dims)) / (12 n) for all k > l.
/// `fallback` is set when only the last grid point qualifies (the condition is vacuous there).
LepskiSelection lepski_select(std::span<const LepskiCandidate> candidates, std::size_t n_groups, const Dims& dims);

/// Top eigenvector of V_k for each requested mode; partitions drawn from `rng`.
EstimateReport robust_hosvd(const DenseTensor& x, const RobustConfig& config, Rng& rng,
                            const SpikedTruth* truth = nullptr);

/// Sample-split pipeline: robust initialization on one half of the last mode,
/// one power step on the other half, and vice versa for the last mode itself.
EstimateReport split_pipeline(const DenseTensor& x, const RobustConfig& config, std::size_t extra_iterations,
                              Rng& rng, const SpikedTruth* truth = nullptr);

double lambda_hat(const DenseTensor& x, const std::vector<UnitVector>& vs);

}  // namespace spiketensor
