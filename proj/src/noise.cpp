// SPDX-License-Identifier: MIT
#include "spiketensor/noise.hpp"

#include <cmath>
#include <string>

namespace spiketensor {

namespace {

double pareto_from(double nu, const std::array<std::uint64_t, 2>& b) {
    const double u = Rng::to_open_closed(b[0]);
    const double sign = (b[1] & 1u) ? -1.0 : 1.0;
    return sign * std::pow(u, -1.0 / nu) / std::sqrt(nu / (nu - 2.0));
}

double mixture_from(double nu, std::size_t dim, const std::array<std::uint64_t, 2>& b) {
    const double d = static_cast<double>(dim);
    const double u = Rng::to_closed_open(b[0]);
    const double sign = (b[1] & 1u) ? -1.0 : 1.0;
    const double x = u < nu / d ? -std::sqrt((d - nu) / nu) : std::sqrt(nu / (d - nu));
    return sign * x;
}

void check_pareto(double nu) {
    if (!(nu > 2.0) || !std::isfinite(nu)) throw InvalidArgument("pareto noise requires nu > 2");
}

void check_mixture(double nu, std::size_t dim) {
    if (!(nu > 0.0) || !(nu < static_cast<double>(dim)))
        throw InvalidArgument("mixture noise requires 0 < nu < mixture_dim");
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::pareto_rademacher: return "pareto";
        case NoiseKind::two_point_mixture: return "mixture";
    }
    return "unknown";
}

NoiseKind parse_noise_kind(std::string_view text) {
    if (text == "gaussian") return NoiseKind::gaussian;
    if (text == "pareto" || text == "pareto_rademacher") return NoiseKind::pareto_rademacher;
    if (text == "mixture" || text == "two_point_mixture") return NoiseKind::two_point_mixture;
    throw InvalidArgument("unknown noise kind '" + std::string(text) + "'");
}

void NoiseSpec::validate(std::size_t default_mixture_dim) const {
    switch (kind) {
        case NoiseKind::gaussian: return;
        case NoiseKind::pareto_rademacher: check_pareto(nu); return;
        case NoiseKind::two_point_mixture: check_mixture(nu, mixture_dim.value_or(default_mixture_dim)); return;
    }
}

UnitVector sample_unit_sphere(std::size_t d, Rng& rng) {
    if (d == 0) throw InvalidArgument("sample_unit_sphere: dimension must be positive");
    Vector v(d);
    do {
        for (double& x : v) x = rng.normal();
    } while (norm2(v) == 0.0);
    return UnitVector::normalize(std::move(v));
}

double sample_pareto_rademacher(double nu, Rng& rng) {
    check_pareto(nu);
    return pareto_from(nu, rng.next_block());
}

double sample_mixture(double nu, std::size_t mixture_dim, Rng& rng) {
    check_mixture(nu, mixture_dim);
    return mixture_from(nu, mixture_dim, rng.next_block());
}

double noise_entry(const NoiseSpec& spec, std::size_t mixture_dim, const std::array<std::uint64_t, 2>& block) {
    switch (spec.kind) {
        case NoiseKind::gaussian: return Rng::normal_from(block);
        case NoiseKind::pareto_rademacher: return pareto_from(spec.nu, block);
        case NoiseKind::two_point_mixture: return mixture_from(spec.nu, mixture_dim, block);
    }
    return 0.0;
}

DenseTensor sample_noise_tensor(const Dims& dims, const NoiseSpec& spec, const Rng& rng) {
    if (dims.empty()) throw InvalidArgument("sample_noise_tensor: empty dimension list");
    const std::size_t mixture_dim = spec.mixture_dim.value_or(dims.front());
    spec.validate(mixture_dim);
    DenseTensor shape = DenseTensor::zeros(dims);
    Vector values(shape.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = noise_entry(spec, mixture_dim, rng.block(i));
    return DenseTensor(dims, std::move(values));
}

SpikedSample sample_spiked(std::size_t d, std::size_t p, double lambda, const NoiseSpec& spec, const Rng& rng) {
    if (d == 0 || p == 0) throw InvalidArgument("sample_spiked: d and p must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("sample_spiked: lambda must be nonnegative");
    NoiseSpec resolved = spec;
    if (!resolved.mixture_dim) resolved.mixture_dim = d;
    resolved.validate(d);

    Rng truth_rng = rng.split(kTruthStreamTag);
    SpikedTruth truth;
    truth.lambda = lambda;
    for (std::size_t k = 0; k < p; ++k) truth.us.push_back(sample_unit_sphere(d, truth_rng));

    const DenseTensor noise = sample_noise_tensor(Dims(p, d), resolved, rng);
    const DenseTensor signal = outer_rank1(lambda, views(truth.us));
    return {signal + noise, std::move(truth)};
}

}  // namespace spiketensor
