// SPDX-License-Identifier: MIT
#pragma once

#include "spiketensor/rng.hpp"
#include "spiketensor/tensor.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace spiketensor {

enum class NoiseKind { gaussian, pareto_rademacher, two_point_mixture };

std::string_view to_string(NoiseKind kind);
/// Accepts the config spellings "gaussian", "pareto", "mixture" and the enum names.
NoiseKind parse_noise_kind(std::string_view text);

/// Zero-mean, unit-variance entry distribution.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double nu = 0.0;
    /// d in the two-point mixture probabilities; unset means "the tensor's d".
    std::optional<std::size_t> mixture_dim;

    /// Throws InvalidArgument naming the violated constraint.
    void validate(std::size_t default_mixture_dim) const;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct SpikedTruth {
    double lambda = 0.0;
    std::vector<UnitVector> us;
};

/// Normalized vector of d standard normals.
UnitVector sample_unit_sphere(std::size_t d, Rng& rng);

/// R * U^(-1/nu) / sqrt(nu/(nu-2)) with U uniform on (0,1] and R a Rademacher sign.
double sample_pareto_rademacher(double nu, Rng& rng);

/// R * X, X = -sqrt((d-nu)/nu) w.p. nu/d and sqrt(nu/(d-nu)) otherwise.
double sample_mixture(double nu, std::size_t mixture_dim, Rng& rng);

/// Maps one random block to a noise entry.
double noise_entry(const NoiseSpec& spec, std::size_t mixture_dim, const std::array<std::uint64_t, 2>& block);

/// iid tensor; the entry at flat position i uses block i of the stream, so it
/// depends only on (seed, stream, i). The rng's sequential position is ignored.
DenseTensor sample_noise_tensor(const Dims& dims, const NoiseSpec& spec, const Rng& rng);

struct SpikedSample {
    DenseTensor tensor;
    SpikedTruth truth;
};

/// Truth vectors u_1..u_p come from a child stream of `rng`; the noise uses
/// `rng`'s own stream exactly as sample_noise_tensor would.
SpikedSample sample_spiked(std::size_t d, std::size_t p, double lambda, const NoiseSpec& spec, const Rng& rng);

/// Child-stream tag used for truth vectors.
inline constexpr std::uint64_t kTruthStreamTag = 0x7472757468ull;

}  // namespace spiketensor
