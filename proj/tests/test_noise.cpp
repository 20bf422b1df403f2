// SPDX-License-Identifier: MIT
#include "spiketensor/noise.hpp"

#include "spiketensor/estimators.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace spiketensor;
using namespace spiketensor::testing;

namespace {

struct Moments {
    double mean = 0, var = 0, se_mean = 0, se_var = 0, m4 = 0;
};

Moments moments(const Vector& x) {
    const double n = static_cast<double>(x.size());
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= n;
    double m2 = 0, m4 = 0;
    for (double v : x) {
        const double c = v - m.mean;
        m2 += c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m4 /= n;
    m.var = m2;
    m.m4 = m4;
    m.se_mean = std::sqrt(m2 / n);
    m.se_var = std::sqrt((m4 - m2 * m2) / n);
    return m;
}

Vector draw(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
    const auto t = sample_noise_tensor({n}, spec, Rng(seed, 0));
    return Vector(t.values().begin(), t.values().end());
}

NoiseSpec pareto(double nu) { return {NoiseKind::pareto_rademacher, nu, std::nullopt}; }
NoiseSpec mixture(double nu, std::size_t dim) { return {NoiseKind::two_point_mixture, nu, dim}; }

}  // namespace

TEST(Rng, UniformRangesAndBelow) {
    Rng rng(1, 2);
    std::vector<std::size_t> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const double a = rng.uniform(), b = rng.uniform_open_closed();
        ASSERT_GE(a, 0.0);
        ASSERT_LT(a, 1.0);
        ASSERT_GT(b, 0.0);
        ASSERT_LE(b, 1.0);
        ++counts[rng.below(7)];
    }
    for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), 10000.0, 5 * std::sqrt(10000.0 * 6 / 7));
    EXPECT_EQ(Rng::to_open_closed(~0ull), 1.0);
    EXPECT_GT(Rng::to_open_closed(0), 0.0);
    EXPECT_EQ(Rng::to_closed_open(0), 0.0);
}

TEST(Rng, RandomAccessMatchesSequential) {
    Rng a(9, 4);
    const Rng b(9, 4);
    for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(a.next_block(), b.block(i));
}

TEST(Rng, SplitStreamsDiffer) {
    const Rng base(3, 0);
    std::set<std::uint64_t> streams;
    for (std::uint64_t tag = 0; tag < 1000; ++tag) streams.insert(base.split(tag).state().stream);
    EXPECT_EQ(streams.size(), 1000u);
    EXPECT_EQ(base.split(5).state(), base.split(5).state());
}

TEST(Rng, DistinctStreamsUncorrelated) {
    Rng a(11, 0), b(11, 1), c(12, 0);
    const std::size_t n = 100000;
    double sab = 0, sac = 0, sa = 0, sb = 0, sc = 0, saa = 0, sbb = 0, scc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a.normal(), y = b.normal(), z = c.normal();
        sab += x * y;
        sac += x * z;
        sa += x;
        sb += y;
        sc += z;
        saa += x * x;
        sbb += y * y;
        scc += z * z;
    }
    const double dn = static_cast<double>(n);
    auto corr = [&](double sxy, double sx, double sy, double sxx, double syy) {
        const double cov = sxy / dn - sx * sy / dn / dn;
        return cov / std::sqrt((sxx / dn - sx * sx / dn / dn) * (syy / dn - sy * sy / dn / dn));
    };
    EXPECT_LT(std::abs(corr(sab, sa, sb, saa, sbb)), 0.01);
    EXPECT_LT(std::abs(corr(sac, sa, sc, saa, scc)), 0.01);
}

TEST(UnitSphere, OneDimensional) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(s, 0);
        const double x = sample_unit_sphere(1, rng)[0];
        EXPECT_EQ(std::abs(x), 1.0);
    }
}

TEST(UnitSphere, NormAndMean) {
    Rng rng(4, 0);
    Vector mean(5, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto u = sample_unit_sphere(5, rng);
        ASSERT_NEAR(norm2(u), 1.0, 1e-12);
        for (std::size_t j = 0; j < 5; ++j) mean[j] += u[j] / n;
    }
    for (double m : mean) EXPECT_LT(std::abs(m), 0.02);
    for (std::size_t d : {2u, 17u, 300u}) EXPECT_NEAR(norm2(sample_unit_sphere(d, rng)), 1.0, 1e-12);
}

TEST(Pareto, SupportLowerBound) {
    Rng rng(5, 0);
    for (double nu : {2.1, 3.0, 8.0}) {
        const double floor = 1.0 / std::sqrt(nu / (nu - 2.0));
        for (int i = 0; i < 100000; ++i) ASSERT_GE(std::abs(sample_pareto_rademacher(nu, rng)), floor * (1 - 1e-15));
    }
}

TEST(Pareto, VarianceAtNu5) {
    const auto m = moments(draw(pareto(5.0), 1000000, 6));
    EXPECT_NEAR(m.var, 1.0, 0.02);
}

TEST(Pareto, FourthMomentTrend) {
    // Infinite 4th moment at nu=3: the empirical value keeps growing with n.
    auto fourth = [](double nu, std::size_t n, std::uint64_t seed) {
        double s = 0;
        for (double x : draw(pareto(nu), n, seed)) s += x * x * x * x;
        return s / static_cast<double>(n);
    };
    std::vector<double> heavy, light;
    for (std::size_t n : {10000u, 100000u, 1000000u, 4000000u}) {
        // median over seeds tames single-draw noise
        Vector h, l;
        for (std::uint64_t s = 0; s < 9; ++s) {
            h.push_back(fourth(3.0, n, 100 + s));
            l.push_back(fourth(8.0, n, 200 + s));
        }
        std::sort(h.begin(), h.end());
        std::sort(l.begin(), l.end());
        heavy.push_back(h[4]);
        light.push_back(l[4]);
    }
    EXPECT_GT(heavy.back(), 1.5 * heavy.front());
    EXPECT_LT(std::abs(light.back() - light.front()) / light.back(), 0.1);
    // closed form at nu=8: E X^4 = (nu/(nu-4)) / (nu/(nu-2))^2
    EXPECT_NEAR(light.back(), (8.0 / 4.0) / std::pow(8.0 / 6.0, 2), 0.05);
}

TEST(Mixture, SupportAndExactSecondMoment) {
    const double nu = 0.1;
    const std::size_t d = 400;
    const double big = std::sqrt((d - nu) / nu), small = std::sqrt(nu / (d - nu));
    Rng rng(7, 0);
    std::set<double> seen;
    for (int i = 0; i < 200000; ++i) seen.insert(sample_mixture(nu, d, rng));
    EXPECT_EQ(seen, (std::set<double>{-big, -small, small, big}));
    const double dd = static_cast<double>(d);
    EXPECT_NEAR((nu / dd) * (dd - nu) / nu + (1 - nu / dd) * nu / (dd - nu), 1.0, 1e-15);
}

TEST(Mixture, Variance) {
    const auto m = moments(draw(mixture(0.1, 400), 1000000, 8));
    EXPECT_NEAR(m.var, 1.0, 0.05);
}

TEST(NoiseKinds, MeanAndVarianceWithinFourStandardErrors) {
    const std::vector<NoiseSpec> specs{{NoiseKind::gaussian, 0.0, std::nullopt}, pareto(2.1), pareto(2.5), pareto(5.0),
                                       mixture(0.1, 400), mixture(0.1, 100), mixture(2.0, 50)};
    std::uint64_t seed = 40;
    for (const auto& s : specs) {
        const auto m = moments(draw(s, 1000000, seed++));
        SCOPED_TRACE(std::string(to_string(s.kind)) + " nu=" + std::to_string(s.nu));
        EXPECT_LE(std::abs(m.mean), 4 * m.se_mean);
        EXPECT_LE(std::abs(m.var - 1.0), 4 * m.se_var);
    }
}

TEST(NoiseSpecValidation, Constraints) {
    EXPECT_THROW(pareto(2.0).validate(10), InvalidArgument);
    EXPECT_THROW(pareto(1.5).validate(10), InvalidArgument);
    EXPECT_NO_THROW(pareto(2.1).validate(10));
    EXPECT_THROW(mixture(0.0, 10).validate(10), InvalidArgument);
    EXPECT_THROW(mixture(10.0, 10).validate(10), InvalidArgument);
    EXPECT_NO_THROW(mixture(0.1, 10).validate(10));
    NoiseSpec m{NoiseKind::two_point_mixture, 12.0, std::nullopt};
    EXPECT_THROW(m.validate(10), InvalidArgument);
    EXPECT_NO_THROW(m.validate(100));
    EXPECT_EQ(parse_noise_kind("pareto"), NoiseKind::pareto_rademacher);
    EXPECT_EQ(parse_noise_kind("mixture"), NoiseKind::two_point_mixture);
    EXPECT_THROW(parse_noise_kind("cauchy"), InvalidArgument);
}

TEST(NoiseTensor, Determinism) {
    const Rng rng(13, 2);
    for (const auto& s : {NoiseSpec{}, pareto(2.1), mixture(0.1, 30)}) {
        EXPECT_EQ(sample_noise_tensor({4, 5, 6}, s, rng), sample_noise_tensor({4, 5, 6}, s, rng));
        EXPECT_NE(sample_noise_tensor({4, 5, 6}, s, rng), sample_noise_tensor({4, 5, 6}, s, Rng(13, 3)));
    }
}

TEST(NoiseTensor, GaussianVariance) {
    const auto t = sample_noise_tensor({50, 50, 50}, NoiseSpec{}, Rng(14, 0));
    const auto m = moments(Vector(t.values().begin(), t.values().end()));
    EXPECT_NEAR(m.var, 1.0, 0.01);
}

TEST(NoiseTensor, EntryDependsOnlyOnFlatPosition) {
    const Rng rng(15, 1);
    const auto s = pareto(3.0);
    const auto a = sample_noise_tensor({6, 10}, s, rng);
    const auto b = sample_noise_tensor({3, 4, 5}, s, rng);
    const auto c = sample_noise_tensor({60}, s, rng);
    EXPECT_EQ(Vector(a.values().begin(), a.values().end()), Vector(b.values().begin(), b.values().end()));
    EXPECT_EQ(Vector(a.values().begin(), a.values().end()), Vector(c.values().begin(), c.values().end()));
    for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(a[i], noise_entry(s, 0, rng.block(i)));
    // the generator's sequential position does not matter
    Rng advanced = rng;
    for (int i = 0; i < 17; ++i) advanced.next_block();
    EXPECT_EQ(sample_noise_tensor({6, 10}, s, advanced), a);
}

TEST(Spiked, TruthUnitAndAdditive) {
    const Rng rng(16, 3);
    const auto spec = pareto(2.1);
    const auto s = sample_spiked(8, 3, 42.0, spec, rng);
    ASSERT_EQ(s.truth.us.size(), 3u);
    EXPECT_EQ(s.truth.lambda, 42.0);
    for (const auto& u : s.truth.us) EXPECT_NEAR(norm2(u), 1.0, 1e-10);
    const auto noise = sample_noise_tensor({8, 8, 8}, spec, rng);
    const auto signal = outer_rank1(42.0, views(s.truth.us));
    EXPECT_EQ(s.tensor, signal + noise);
    // X - signal recovers the noise up to one rounding of the addition
    for (std::size_t i = 0; i < noise.size(); ++i)
        EXPECT_NEAR(s.tensor[i] - signal[i], noise[i], 1e-15 * (std::abs(signal[i]) + std::abs(noise[i])) + 1e-300);
}

TEST(Spiked, ZeroSignalContractionMeanZero) {
    const int reps = 2000;
    Vector vals;
    for (int r = 0; r < reps; ++r) {
        const auto s = sample_spiked(6, 3, 0.0, NoiseSpec{}, Rng(17, static_cast<std::uint64_t>(r)));
        if (r < 10) EXPECT_EQ(s.tensor, sample_noise_tensor({6, 6, 6}, NoiseSpec{}, Rng(17, static_cast<std::uint64_t>(r))));
        vals.push_back(full_contract(s.tensor, views(s.truth.us)));
    }
    const auto m = moments(vals);
    EXPECT_LE(std::abs(m.mean), 4 * m.se_mean);
}

TEST(Spiked, HighSnrAlsRecovery) {
    const auto s = sample_spiked(10, 3, 1e6, NoiseSpec{}, Rng(18, 0));
    Rng rng(18, 1);
    const auto r = als_rank1(s.tensor, AlsOptions{}, rng);
    for (std::size_t k = 0; k < 3; ++k) {
        const double c = dot(r.estimates[k], s.truth.us[k]);
        EXPECT_LT(std::sqrt(std::max(0.0, 1 - c * c)), 1e-3);
    }
}
