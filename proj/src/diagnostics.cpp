// SPDX-License-Identifier: MIT
#include "spiketensor/diagnostics.hpp"

#include "spiketensor/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spiketensor {

double abs_cos(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InvalidArgument("abs_cos: length mismatch");
    return std::min(1.0, std::abs(dot(u, v)));
}

double sin_angle(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InvalidArgument("sin_angle: length mismatch");
    // sin(2 atan2(|u-v|, |u+v|)): no cancellation for nearly parallel vectors.
    double a2 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        a2 += (u[i] - v[i]) * (u[i] - v[i]);
        b2 += (u[i] + v[i]) * (u[i] + v[i]);
    }
    if (a2 + b2 == 0.0) return 0.0;
    return std::min(1.0, 2.0 * std::sqrt(a2) * std::sqrt(b2) / (a2 + b2));
}

IncoherenceReport incoherence(const std::vector<UnitVector>& us) {
    if (us.empty()) throw InvalidArgument("incoherence: need at least one vector");
    std::vector<double> inf_norms;
    for (const auto& u : us) {
        double m = 0.0;
        for (double x : u.values()) m = std::max(m, std::abs(x));
        if (m == 0.0) throw InvalidArgument("incoherence: zero vector");
        inf_norms.push_back(m);
    }
    IncoherenceReport r;
    r.mu2 = *std::max_element(inf_norms.begin(), inf_norms.end());
    for (std::size_t k = 0; k < us.size(); ++k) {
        double w = 1.0;
        for (std::size_t l = 0; l < us.size(); ++l)
            if (l != k) w *= inf_norms[l];
        r.per_mode_w_max.push_back(w);
        r.mu1 = std::max(r.mu1, w);
    }
    return r;
}

double fiber_norm_bound(const DenseTensor& e) {
    double best = 0.0;
    const double* v = e.values().data();
    for (std::size_t k = 0; k < e.order(); ++k) {
        const std::size_t a = e.stride_before(k), dk = e.dim(k), b = e.stride_after(k);
        Vector sq(a);
        for (std::size_t post = 0; post < b; ++post) {
            std::fill(sq.begin(), sq.end(), 0.0);
            for (std::size_t i = 0; i < dk; ++i) {
                const double* row = v + a * (i + dk * post);
                for (std::size_t pre = 0; pre < a; ++pre) sq[pre] += row[pre] * row[pre];
            }
            for (double s : sq) best = std::max(best, s);
        }
    }
    return std::sqrt(best);
}

double max_entry_bound(const DenseTensor& e) {
    double m = 0.0;
    for (double x : e.values()) m = std::max(m, std::abs(x));
    return m;
}

double tensor_norm_estimate(const DenseTensor& e, std::size_t restarts, Rng& rng) {
    AlsOptions opt;
    opt.restarts = restarts;
    return als_rank1(e, opt, rng).lambda_hat;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

std::vector<NormScanRow> norm_scaling_scan(const NoiseSpec& spec, std::size_t p, const std::vector<std::size_t>& d_list,
                                           const NormScanOptions& options, std::uint64_t seed) {
    if (d_list.empty() || options.reps == 0) throw InvalidArgument("norm_scaling_scan: need dimensions and reps");
    if (!std::is_sorted(d_list.begin(), d_list.end())) throw InvalidArgument("norm_scaling_scan: dimensions must ascend");
    std::vector<NormScanRow> rows;
    for (std::size_t d : d_list) {
        std::vector<double> fib, ent, als;
        for (std::size_t r = 0; r < options.reps; ++r) {
            const Rng rng(seed, mix64(d) ^ r);
            NoiseSpec s = spec;
            if (!s.mixture_dim) s.mixture_dim = d;
            const DenseTensor e = sample_noise_tensor(Dims(p, d), s, rng);
            fib.push_back(fiber_norm_bound(e));
            ent.push_back(max_entry_bound(e));
            if (options.als_restarts > 0) {
                Rng als_rng = rng.split(0x616c73);
                AlsOptions opt{options.als_restarts, options.als_max_iters, options.als_tol};
                als.push_back(als_rank1(e, opt, als_rng).lambda_hat);
            }
        }
        rows.push_back({d, median(fib), median(ent),
                        als.empty() ? std::numeric_limits<double>::quiet_NaN() : median(als)});
    }
    return rows;
}

}  // namespace spiketensor
