// SPDX-License-Identifier: MIT
#pragma once

#include "spiketensor/noise.hpp"
#include "spiketensor/rng.hpp"
#include "spiketensor/tensor.hpp"

#include <cmath>
#include <vector>

namespace spiketensor::testing {

inline DenseTensor random_tensor(const Dims& dims, Rng& rng) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    Vector v(n);
    for (auto& x : v) x = rng.normal();
    return make_tensor(dims, std::move(v));
}

inline Matrix random_symmetric(std::size_t n, Rng& rng) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
    return a;
}

inline std::vector<UnitVector> random_units(const Dims& dims, Rng& rng) {
    std::vector<UnitVector> us;
    for (auto d : dims) us.push_back(sample_unit_sphere(d, rng));
    return us;
}

/// Colexicographic multi-index of a flat position.
inline std::vector<std::size_t> unflatten(std::size_t flat, const Dims& dims) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    return idx;
}

/// Entry-by-entry contraction: out[i_k] += T[i] * prod_{l != k} v_l[i_l].
inline Vector loop_contract(const DenseTensor& t, std::size_t k, const std::vector<Vector>& vs) {
    Vector out(t.dim(k), 0.0);
    for (std::size_t f = 0; f < t.size(); ++f) {
        const auto idx = unflatten(f, t.dims());
        double w = t[f];
        for (std::size_t l = 0; l < t.order(); ++l)
            if (l != k) w *= vs[l][idx[l]];
        out[idx[k]] += w;
    }
    return out;
}

inline double loop_full(const DenseTensor& t, const std::vector<Vector>& vs) {
    double s = 0.0;
    for (std::size_t f = 0; f < t.size(); ++f) {
        const auto idx = unflatten(f, t.dims());
        double w = t[f];
        for (std::size_t l = 0; l < t.order(); ++l) w *= vs[l][idx[l]];
        s += w;
    }
    return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace spiketensor::testing
