// SPDX-License-Identifier: MIT
#pragma once

#include "spiketensor/noise.hpp"
#include "spiketensor/rng.hpp"
#include "spiketensor/tensor.hpp"

#include <vector>

namespace spiketensor {

/// sqrt(1 - <u,v>^2) for unit vectors, evaluated without cancellation; sign-invariant, in [0, 1].
double sin_angle(std::span<const double> u, std::span<const double> v);
/// |<u,v>| clipped to [0, 1].
double abs_cos(std::span<const double> u, std::span<const double> v);

struct IncoherenceReport {
    double mu1 = 0.0;                   // max_k prod_{l != k} ||u_l||_inf
    double mu2 = 0.0;                   // max_k ||u_k||_inf
    std::vector<double> per_mode_w_max; // prod_{l != k} ||u_l||_inf for each k
};

IncoherenceReport incoherence(const std::vector<UnitVector>& us);

/// Largest l2 norm over all fibers of all modes; a lower bound on ||E||.
double fiber_norm_bound(const DenseTensor& e);

/// Largest absolute entry; a lower bound on ||E||.
double max_entry_bound(const DenseTensor& e);

/// Best rank-one ALS objective; a lower estimate of the spectral norm.
double tensor_norm_estimate(const DenseTensor& e, std::size_t restarts, Rng& rng);

struct NormScanRow {
    std::size_t d = 0;
    double fiber_bound = 0.0;   // medians over replications
    double max_entry = 0.0;
    double als_estimate = 0.0;  // NaN when ALS is disabled
};

struct NormScanOptions {
    std::size_t reps = 20;
    /// 0 skips the ALS column.
    std::size_t als_restarts = 20;
    std::size_t als_max_iters = 1000;
    double als_tol = 1e-10;
};

/// Replication r at dimension d draws from stream mix64(d) ^ r of the seed, so
/// a row does not depend on which other dimensions are scanned.
std::vector<NormScanRow> norm_scaling_scan(const NoiseSpec& spec, std::size_t p, const std::vector<std::size_t>& d_list,
                                           const NormScanOptions& options, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace spiketensor
