// SPDX-License-Identifier: MIT
#include "spiketensor/estimators.hpp"

#include "spiketensor/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spiketensor {

namespace {

constexpr std::size_t kMaxSplitDraws = 100;

Vector raw_contraction(const DenseTensor& x, std::size_t k, const std::vector<UnitVector>& current) {
    std::vector<std::span<const double>> vs = views(current);
    return contract_except(x, k, vs);
}

UnitVector normalize_or_throw(Vector y, const char* where) {
    if (norm2(y) == 0.0) throw EstimationError(std::string(where) + ": zero contraction");
    return UnitVector::normalize(std::move(y));
}

UnitVector sign_normalized(UnitVector u) {
    Vector v = u.values();
    apply_sign_convention(v);
    return UnitVector(std::move(v));
}

// Applies the sign convention to every mode, then moves any remaining sign onto
// the last mode so the multilinear form at the estimates is nonnegative.
double finalize_signs(const DenseTensor& x, std::vector<UnitVector>& vs) {
    for (auto& v : vs) v = sign_normalized(std::move(v));
    double lam = lambda_hat(x, vs);
    if (lam < 0.0) {
        vs.back() = vs.back().negated();
        lam = -lam;
    }
    return lam;
}

double max_sin(const std::vector<UnitVector>& vs, const SpikedTruth& truth) {
    double worst = 0.0;
    for (std::size_t k = 0; k < vs.size(); ++k) worst = std::max(worst, sin_angle(vs[k], truth.us[k]));
    return worst;
}

void fill_truth(EstimateReport& r, const SpikedTruth* truth) {
    if (truth == nullptr) return;
    r.sin_angles.clear();
    for (std::size_t i = 0; i < r.modes.size(); ++i)
        r.sin_angles.push_back(sin_angle(r.estimates[i], truth->us.at(r.modes[i])));
}

std::vector<std::size_t> all_modes(std::size_t p) {
    std::vector<std::size_t> m(p);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return m;
}

}  // namespace

std::vector<std::size_t> Partition::group_sizes() const {
    std::vector<std::size_t> sizes(n_groups, 0);
    for (auto g : assignment) ++sizes.at(g);
    return sizes;
}

bool EstimateReport::any_degenerate() const {
    return std::any_of(degenerate_top.begin(), degenerate_top.end(), [](bool b) { return b; });
}

void RobustConfig::validate() const {
    std::visit(
        [](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, FixedTheta>) {
                if (!(s.theta > 0.0)) throw InvalidArgument("robust.theta must be positive");
            } else if constexpr (std::is_same_v<S, PlugInTheta>) {
                if (!(s.lambda_guess > 0.0)) throw InvalidArgument("robust.lambda_guess must be positive");
            } else {
                if (s.lambda_min > 0.0 && s.lambda_max > 0.0 && s.lambda_min > s.lambda_max)
                    throw InvalidArgument("robust.lambda_min must not exceed robust.lambda_max");
            }
        },
        theta);
}

std::size_t default_group_count(std::size_t d) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(10.0 * std::log(static_cast<double>(d)))));
}

std::size_t default_iterations(std::size_t d) {
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(d, 1))))) + 2;
}

double lambda_hat(const DenseTensor& x, const std::vector<UnitVector>& vs) {
    return full_contract(x, views(vs));
}

// ---------------------------------------------------------------------------
// HOSVD and power iteration

std::vector<UnitVector> hosvd_init(const DenseTensor& x) {
    if (x.order() < 2) throw InvalidArgument("hosvd_init: tensor order must be at least 2");
    std::vector<UnitVector> out;
    for (std::size_t k = 0; k < x.order(); ++k) out.push_back(top_eigvec(mode_gram(x, k)).vector);
    return out;
}

EstimateReport hosvd_report(const DenseTensor& x, const SpikedTruth* truth) {
    if (x.order() < 2) throw InvalidArgument("hosvd_init: tensor order must be at least 2");
    EstimateReport r;
    r.method = "hosvd";
    r.modes = all_modes(x.order());
    for (std::size_t k = 0; k < x.order(); ++k) {
        auto top = top_eigvec(mode_gram(x, k));
        r.estimates.push_back(std::move(top.vector));
        r.degenerate_top.push_back(top.degenerate_top);
        r.theta_used.push_back(0.0);
    }
    r.lambda_hat = finalize_signs(x, r.estimates);
    fill_truth(r, truth);
    return r;
}

UnitVector power_step(const DenseTensor& x, std::size_t k, const std::vector<UnitVector>& current) {
    if (current.size() != x.order()) throw InvalidArgument("power_step: need one vector per mode");
    return sign_normalized(normalize_or_throw(raw_contraction(x, k, current), "power_step"));
}

EstimateReport power_iterate(const DenseTensor& x, const std::vector<UnitVector>& init, std::size_t iterations,
                             const SpikedTruth* truth) {
    if (init.size() != x.order()) throw InvalidArgument("power_iterate: need one vector per mode");
    EstimateReport r;
    r.method = "power";
    r.modes = all_modes(x.order());
    std::vector<UnitVector> cur = init;
    if (truth != nullptr) r.trace.push_back(max_sin(cur, *truth));
    for (std::size_t t = 0; t < iterations; ++t) {
        std::vector<UnitVector> next;
        next.reserve(cur.size());
        for (std::size_t k = 0; k < x.order(); ++k) next.push_back(power_step(x, k, cur));
        cur = std::move(next);
        if (truth != nullptr) r.trace.push_back(max_sin(cur, *truth));
    }
    r.iterations = iterations;
    r.lambda_hat = iterations == 0 ? lambda_hat(x, cur) : finalize_signs(x, cur);
    r.estimates = std::move(cur);
    r.theta_used.assign(x.order(), 0.0);
    r.degenerate_top.assign(x.order(), false);
    fill_truth(r, truth);
    return r;
}

EstimateReport als_rank1(const DenseTensor& x, const AlsOptions& options, Rng& rng) {
    if (options.restarts == 0) throw InvalidArgument("als_rank1: restarts must be at least 1");
    const std::size_t p = x.order();
    std::vector<UnitVector> best;
    std::vector<double> best_trace;
    std::size_t best_iters = 0;
    double best_obj = -1.0;

    for (std::size_t r = 0; r < options.restarts; ++r) {
        std::vector<UnitVector> cur;
        for (std::size_t k = 0; k < p; ++k) cur.push_back(sample_unit_sphere(x.dim(k), rng));
        std::vector<double> trace;
        double obj = lambda_hat(x, cur);
        std::size_t it = 0;
        bool dead = false;
        while (it < options.max_iters) {
            ++it;
            const double prev = obj;
            for (std::size_t k = 0; k < p; ++k) {
                Vector y = raw_contraction(x, k, cur);
                const double n = norm2(y);
                if (n == 0.0) {
                    dead = true;
                    break;
                }
                for (double& v : y) v /= n;
                cur[k] = UnitVector(std::move(y));
                obj = n;
            }
            if (dead) {
                obj = 0.0;
                break;
            }
            trace.push_back(obj);
            if (std::abs(obj - prev) <= options.tol * std::abs(obj)) break;
        }
        if (obj > best_obj) {
            best_obj = obj;
            best = cur;
            best_trace = std::move(trace);
            best_iters = it;
        }
    }

    EstimateReport rep;
    rep.method = "als";
    rep.modes = all_modes(p);
    rep.lambda_hat = finalize_signs(x, best);
    rep.estimates = std::move(best);
    rep.iterations = best_iters;
    rep.objective_trace = std::move(best_trace);
    rep.theta_used.assign(p, 0.0);
    rep.degenerate_top.assign(p, false);
    return rep;
}

// ---------------------------------------------------------------------------
// Robust HOSVD

Partition multinomial_partition(std::size_t count, std::size_t n_groups, Rng& rng) {
    if (count == 0 || n_groups == 0) throw InvalidArgument("multinomial_partition: count and groups must be positive");
    Partition part;
    part.n_groups = n_groups;
    part.assignment.resize(count);
    for (auto& g : part.assignment) g = static_cast<std::uint32_t>(rng.below(n_groups));
    return part;
}

std::vector<Matrix> robust_gram(const DenseTensor& x, std::size_t k, const Partition& part) {
    if (k >= x.order()) throw InvalidArgument("robust_gram: mode index out of range");
    const std::size_t dk = x.dim(k), a = x.stride_before(k), b = x.stride_after(k);
    if (part.assignment.size() != a * b) throw InvalidArgument("robust_gram: partition size does not match fiber count");
    for (auto g : part.assignment)
        if (g >= part.n_groups) throw InvalidArgument("robust_gram: group label out of range");

    std::vector<Vector> acc(part.n_groups, Vector(dk * dk, 0.0));
    Vector fib(dk);
    const double* v = x.values().data();
    for (std::size_t post = 0; post < b; ++post)
        for (std::size_t pre = 0; pre < a; ++pre) {
            const double* src = v + pre + a * dk * post;
            for (std::size_t i = 0; i < dk; ++i) fib[i] = src[a * i];
            double* s = acc[part.assignment[pre + a * post]].data();
            for (std::size_t c = 1; c < dk; ++c) {
                const double xc = fib[c];
                double* col = s + dk * c;
                for (std::size_t r = 0; r < c; ++r) col[r] += fib[r] * xc;
            }
        }

    std::vector<Matrix> out;
    out.reserve(part.n_groups);
    for (auto& m : acc) {
        for (std::size_t c = 0; c < dk; ++c)
            for (std::size_t r = c + 1; r < dk; ++r) m[r + dk * c] = m[c + dk * r];
        out.emplace_back(dk, dk, std::move(m));
    }
    return out;
}

double theta_default(double lambda_guess, std::size_t n_groups, const Dims& dims, std::size_t k) {
    if (!(lambda_guess > 0.0) || n_groups == 0 || dims.empty() || k >= dims.size())
        throw InvalidArgument("theta_default: inputs must be positive");
    double prod = 1.0;
    for (auto d : dims) prod *= static_cast<double>(d);
    const double l2 = lambda_guess * lambda_guess;
    const double denom = l2 * l2 / static_cast<double>(n_groups) + prod;
    return std::sqrt(8.0 * std::log(static_cast<double>(dims[k])) / denom);
}

Matrix robust_vhat(const std::vector<std::optional<SymEigResult>>& group_eigs, std::size_t dk, double theta) {
    if (!(theta > 0.0)) throw InvalidArgument("robust_vhat: theta must be positive");
    Matrix v(dk, dk);
    for (const auto& eig : group_eigs)
        if (eig) v += psi_matrix(*eig, theta);
    v *= 1.0 / (static_cast<double>(group_eigs.size()) * theta);
    return v;
}

namespace {

std::vector<std::optional<SymEigResult>> group_eigs(const std::vector<Matrix>& groups) {
    std::vector<std::optional<SymEigResult>> out;
    out.reserve(groups.size());
    for (const auto& s : groups) {
        const bool zero = std::all_of(s.values().begin(), s.values().end(), [](double x) { return x == 0.0; });
        if (zero) out.emplace_back(std::nullopt);
        else out.emplace_back(sym_eig(s));
    }
    return out;
}

}  // namespace

Matrix robust_vhat(const DenseTensor& x, std::size_t k, const Partition& part, double theta) {
    if (!(theta > 0.0)) throw InvalidArgument("robust_vhat: theta must be positive");
    return robust_vhat(group_eigs(robust_gram(x, k, part)), x.dim(k), theta);
}

std::vector<double> lepski_grid(double lambda_min, double lambda_max) {
    if (!(lambda_min > 0.0) || !(lambda_max > 0.0)) throw InvalidArgument("lepski_grid: bounds must be positive");
    std::vector<double> grid{lambda_min};
    for (double l = 2.0 * lambda_min; l <= 2.0 * lambda_max; l *= 2.0) grid.push_back(l);
    return grid;
}

LepskiSelection lepski_select(std::span<const LepskiCandidate> candidates, std::size_t n_groups, const Dims& dims) {
    if (candidates.empty()) throw InvalidArgument("lepski_select: empty grid");
    if (n_groups == 0) throw InvalidArgument("lepski_select: group count must be positive");
    double prod = 1.0;
    for (auto d : dims) prod *= static_cast<double>(d);
    const double n = static_cast<double>(n_groups);
    const std::size_t m = candidates.size();
    for (std::size_t l = 0; l + 1 < m; ++l) {
        bool ok = true;
        for (std::size_t k = l + 1; k < m && ok; ++k) {
            const double lk2 = candidates[k].lambda * candidates[k].lambda;
            const double threshold = (lk2 * lk2 / n + prod) / (12.0 * n);
            ok = operator_norm_sym(candidates[l].vhat - candidates[k].vhat) <= threshold;
        }
        if (ok) return {l, false};
    }
    return {m - 1, m > 1};
}

EstimateReport robust_hosvd(const DenseTensor& x, const RobustConfig& config, Rng& rng, const SpikedTruth* truth) {
    config.validate();
    if (x.order() < 2) throw InvalidArgument("robust_hosvd: tensor order must be at least 2");
    EstimateReport r;
    r.method = "robust";
    r.modes = config.modes.empty() ? all_modes(x.order()) : config.modes;
    double log_lambda_sum = 0.0;

    for (std::size_t k : r.modes) {
        if (k >= x.order()) throw InvalidArgument("robust_hosvd: mode index out of range");
        const std::size_t dk = x.dim(k);
        const std::size_t n = config.n_groups > 0 ? config.n_groups : default_group_count(dk);
        const Partition part = multinomial_partition(x.size() / dk, n, rng);
        const auto eigs = group_eigs(robust_gram(x, k, part));

        double theta = 0.0;
        Matrix vhat;
        if (const auto* fixed = std::get_if<FixedTheta>(&config.theta)) {
            theta = fixed->theta;
            vhat = robust_vhat(eigs, dk, theta);
        } else if (const auto* plug = std::get_if<PlugInTheta>(&config.theta)) {
            theta = theta_default(plug->lambda_guess, n, x.dims(), k);
            vhat = robust_vhat(eigs, dk, theta);
        } else {
            const auto& lep = std::get<LepskiTheta>(config.theta);
            const double lo = lep.lambda_min > 0.0 ? lep.lambda_min : std::sqrt(static_cast<double>(dk));
            const double hi = lep.lambda_max > 0.0 ? lep.lambda_max : frobenius_norm(x);
            std::vector<LepskiCandidate> cands;
            for (double lam : lepski_grid(lo, hi))
                cands.push_back({lam, robust_vhat(eigs, dk, theta_default(lam, n, x.dims(), k))});
            const auto sel = lepski_select(cands, n, x.dims());
            theta = theta_default(cands[sel.index].lambda, n, x.dims(), k);
            vhat = std::move(cands[sel.index].vhat);
            r.lepski_fallback = r.lepski_fallback || sel.fallback;
        }

        auto top = top_eigvec(vhat);
        r.estimates.push_back(std::move(top.vector));
        r.degenerate_top.push_back(top.degenerate_top);
        r.theta_used.push_back(theta);
        log_lambda_sum += 0.5 * std::log(std::max(0.0, top.value) * static_cast<double>(n));
    }

    r.lambda_robust = std::exp(log_lambda_sum / static_cast<double>(r.modes.size()));
    if (r.modes.size() == x.order()) {
        std::vector<UnitVector> ordered(x.order());
        for (std::size_t i = 0; i < r.modes.size(); ++i) ordered[r.modes[i]] = r.estimates[i];
        const bool all_present = std::all_of(ordered.begin(), ordered.end(), [](const UnitVector& u) { return u.size() > 0; });
        if (all_present) {
            r.lambda_hat = finalize_signs(x, ordered);
            for (std::size_t i = 0; i < r.modes.size(); ++i) r.estimates[i] = ordered[r.modes[i]];
        }
    } else {
        r.lambda_hat = r.lambda_robust;
    }
    fill_truth(r, truth);
    return r;
}

// ---------------------------------------------------------------------------
// Sample splitting

EstimateReport split_pipeline(const DenseTensor& x, const RobustConfig& config, std::size_t extra_iterations,
                              Rng& rng, const SpikedTruth* truth) {
    config.validate();
    const std::size_t p = x.order();
    if (p < 2) throw InvalidArgument("split_pipeline: tensor order must be at least 2");
    const std::size_t last = p - 1;
    const std::size_t dp = x.dim(last);
    if (dp < 2) throw InvalidArgument("split_pipeline: last-mode dimension must be at least 2");

    std::vector<std::size_t> j1;
    for (std::size_t attempt = 0;; ++attempt) {
        if (attempt == kMaxSplitDraws) throw EstimationError("split_pipeline: could not draw a nonempty split");
        j1.clear();
        for (std::size_t i = 0; i < dp; ++i)
            if (rng.next_u64() & 1u) j1.push_back(i);
        if (!j1.empty() && j1.size() < dp) break;
    }
    const SliceSplit halves = slice_split(x, last, j1);

    RobustConfig inner = config;
    inner.modes.resize(last);
    std::iota(inner.modes.begin(), inner.modes.end(), std::size_t{0});

    // Initialize modes < p on X1, refine on X2.
    const EstimateReport init1 = robust_hosvd(halves.first, inner, rng);
    std::vector<UnitVector> cur(init1.estimates);
    cur.emplace_back();
    const UnitVector last_second = normalize_or_throw(raw_contraction(halves.second, last, cur), "split_pipeline");
    cur[last] = last_second;
    std::vector<UnitVector> est(p);
    for (std::size_t k = 0; k < last; ++k) est[k] = power_step(halves.second, k, cur);

    // Last mode on X1, initialized from X2.
    const EstimateReport init2 = robust_hosvd(halves.second, inner, rng);
    std::vector<UnitVector> cur2(init2.estimates);
    cur2.emplace_back();
    const UnitVector last_first = normalize_or_throw(raw_contraction(halves.first, last, cur2), "split_pipeline");

    // Weight and sign each half by its contraction against the final modes < p.
    std::vector<UnitVector> probe(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(last));
    probe.emplace_back();
    auto weight = [&](const DenseTensor& half, const UnitVector& dir) {
        const Vector z = raw_contraction(half, last, probe);
        return (dot(z, dir) < 0.0 ? -1.0 : 1.0) * norm2(z);
    };
    const double w1 = weight(halves.first, last_first);
    const double w2 = weight(halves.second, last_second);
    Vector up(dp, 0.0);
    for (std::size_t i = 0; i < j1.size(); ++i) up[halves.first_indices[i]] = w1 * last_first[i];
    for (std::size_t i = 0; i < halves.second_indices.size(); ++i) up[halves.second_indices[i]] = w2 * last_second[i];
    est[last] = normalize_or_throw(std::move(up), "split_pipeline");

    EstimateReport r;
    r.method = "split";
    r.modes = all_modes(p);
    r.lambda_robust = init1.lambda_robust;
    r.lepski_fallback = init1.lepski_fallback || init2.lepski_fallback;
    r.theta_used = init1.theta_used;
    r.theta_used.push_back(0.0);
    r.degenerate_top = init1.degenerate_top;
    r.degenerate_top.push_back(init2.any_degenerate());

    if (extra_iterations > 0) {
        auto refined = power_iterate(x, est, extra_iterations, truth);
        est = std::move(refined.estimates);
        r.trace = std::move(refined.trace);
        r.iterations = extra_iterations;
    }
    r.lambda_hat = finalize_signs(x, est);
    r.estimates = std::move(est);
    fill_truth(r, truth);
    return r;
}

}  // namespace spiketensor
