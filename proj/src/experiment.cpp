// SPDX-License-Identifier: MIT
#include "spiketensor/harness.hpp"

#include "spiketensor/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace spiketensor {

namespace {

std::uint64_t method_tag(Method m) { return 0x6d657468ull + static_cast<std::uint64_t>(m); }

std::string join_flags(const EstimateReport& r) {
    std::string out;
    auto add = [&](const char* f) {
        if (!out.empty()) out += ';';
        out += f;
    };
    if (r.any_degenerate()) add("degenerate_top");
    if (r.lepski_fallback) add("lepski_fallback");
    return out;
}

EstimateReport run_method(Method m, const ExperimentSpec& spec, const DenseTensor& x, const SpikedTruth& truth,
                          Rng& rng) {
    switch (m) {
        case Method::hosvd: return hosvd_report(x, &truth);
        case Method::power: {
            auto r = power_iterate(x, hosvd_init(x), spec.effective_iterations(), &truth);
            return r;
        }
        case Method::als: {
            AlsOptions opt;
            opt.restarts = spec.restarts;
            return als_rank1(x, opt, rng);
        }
        case Method::robust: return robust_hosvd(x, spec.robust, rng, &truth);
        case Method::split: return split_pipeline(x, spec.robust, spec.split_extra_iterations, rng, &truth);
    }
    throw InvalidArgument("unknown method");
}

std::vector<ResultRecord> run_rep(const ExperimentSpec& spec, std::size_t rep) {
    const Rng data_rng(spec.seed, spec.stream_base + rep);
    const auto sample = sample_spiked(spec.d, spec.p, spec.lambda(), spec.noise, data_rng);
    std::vector<ResultRecord> out;
    for (Method m : spec.methods) {
        ResultRecord base;
        base.experiment_id = spec.id();
        base.rep = rep;
        base.method = std::string(to_string(m));
        base.d = spec.d;
        base.p = spec.p;
        base.lambda = spec.lambda();
        base.noise = std::string(to_string(spec.noise.kind));
        base.nu = spec.noise.nu;
        base.seed = spec.seed;

        Rng rng = data_rng.split(method_tag(m));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const EstimateReport r = run_method(m, spec, sample.tensor, sample.truth, rng);
            const double ms =
                spec.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() : 0.0;
            const std::string flags = join_flags(r);
            for (std::size_t i = 0; i < r.modes.size(); ++i) {
                ResultRecord rec = base;
                const std::size_t k = r.modes[i];
                rec.mode = k + 1;
                rec.abs_cos = abs_cos(r.estimates[i], sample.truth.us[k]);
                rec.sin_angle = sin_angle(r.estimates[i], sample.truth.us[k]);
                rec.lambda_hat = r.lambda_hat;
                rec.theta_used = r.theta_used.empty() ? 0.0 : r.theta_used[i];
                rec.runtime_ms = ms;
                rec.flags = flags;
                out.push_back(std::move(rec));
            }
        } catch (const std::exception&) {
            const double ms =
                spec.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() : 0.0;
            for (std::size_t k = 0; k < spec.p; ++k) {
                ResultRecord rec = base;
                rec.mode = k + 1;
                rec.sin_angle = 1.0;
                rec.abs_cos = 0.0;
                rec.runtime_ms = ms;
                rec.flags = "failed";
                out.push_back(std::move(rec));
            }
        }
    }
    return out;
}

std::string fmt_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

constexpr const char* kCsvHeader =
    "experiment_id,rep,method,mode,d,p,lambda,noise,nu,sin_angle,abs_cos,lambda_hat,theta_used,runtime_ms,seed,flags";

// Splits one RFC-4180 record; returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    cur += '"';
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            fields.push_back(std::move(cur));
            return true;
        } else {
            cur += c;
        }
    }
    if (!any) return false;
    fields.push_back(std::move(cur));
    return true;
}

double parse_real(const std::string& s) {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw InvalidArgument("csv: bad real '" + s + "'");
    return x;
}

std::uint64_t parse_uint(const std::string& s) {
    std::size_t pos = 0;
    const auto x = std::stoull(s, &pos);
    if (pos != s.size()) throw InvalidArgument("csv: bad integer '" + s + "'");
    return x;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<std::vector<ResultRecord>> per_rep(spec.reps);
    const std::size_t workers = std::min(spec.workers, spec.reps);
    if (workers <= 1) {
        for (std::size_t r = 0; r < spec.reps; ++r) per_rep[r] = run_rep(spec, r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < spec.reps; r = next++) per_rep[r] = run_rep(spec, r);
            });
        for (auto& t : pool) t.join();
    }
    std::vector<ResultRecord> out;
    for (auto& v : per_rep) std::move(v.begin(), v.end(), std::back_inserter(out));
    return out;
}

SweepAxis parse_axis(std::string_view text) {
    if (text == "xi") return SweepAxis::xi;
    if (text == "nu") return SweepAxis::nu;
    if (text == "d") return SweepAxis::d;
    throw ConfigError("unknown sweep axis '" + std::string(text) + "'");
}

std::uint64_t sweep_stream_base(SweepAxis axis, double value) {
    const std::uint64_t h = mix64(mix64(static_cast<std::uint64_t>(axis) + 1) ^ std::bit_cast<std::uint64_t>(value));
    return h & 0xFFFFFFFF00000000ull;
}

ExperimentSpec sweep_point(const ExperimentSpec& base, SweepAxis axis, double value) {
    ExperimentSpec s = base;
    switch (axis) {
        case SweepAxis::xi: s.lambda_exp = value; break;
        case SweepAxis::nu: s.noise.nu = value; break;
        case SweepAxis::d:
            if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("sweep: d values must be positive integers");
            s.d = static_cast<std::size_t>(value);
            break;
    }
    s.stream_base = base.stream_base + sweep_stream_base(axis, value);
    return s;
}

std::vector<ResultRecord> sweep(const ExperimentSpec& base, SweepAxis axis, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep: no values given");
    std::vector<ResultRecord> out;
    for (double v : values) {
        auto part = run_experiment(sweep_point(base, axis, v));
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
    out << kCsvHeader << "\r\n";
    for (const auto& r : records) {
        out << csv_field(r.experiment_id) << ',' << r.rep << ',' << csv_field(r.method) << ',' << r.mode << ',' << r.d
            << ',' << r.p << ',' << fmt_real(r.lambda) << ',' << csv_field(r.noise) << ',' << fmt_real(r.nu) << ','
            << fmt_real(r.sin_angle) << ',' << fmt_real(r.abs_cos) << ',' << fmt_real(r.lambda_hat) << ','
            << fmt_real(r.theta_used) << ',' << fmt_real(r.runtime_ms) << ',' << r.seed << ',' << csv_field(r.flags)
            << "\r\n";
    }
}

std::string to_csv(const std::vector<ResultRecord>& records) {
    std::ostringstream out;
    write_csv(out, records);
    return out.str();
}

std::vector<ResultRecord> read_csv(std::istream& in) {
    std::vector<std::string> f;
    if (!read_csv_row(in, f)) throw InvalidArgument("csv: empty input");
    std::string header;
    for (std::size_t i = 0; i < f.size(); ++i) header += (i ? "," : "") + f[i];
    if (header != kCsvHeader) throw InvalidArgument("csv: unexpected header");
    std::vector<ResultRecord> out;
    while (read_csv_row(in, f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 16) throw InvalidArgument("csv: expected 16 fields per row");
        ResultRecord r;
        r.experiment_id = f[0];
        r.rep = parse_uint(f[1]);
        r.method = f[2];
        r.mode = parse_uint(f[3]);
        r.d = parse_uint(f[4]);
        r.p = parse_uint(f[5]);
        r.lambda = parse_real(f[6]);
        r.noise = f[7];
        r.nu = parse_real(f[8]);
        r.sin_angle = parse_real(f[9]);
        r.abs_cos = parse_real(f[10]);
        r.lambda_hat = parse_real(f[11]);
        r.theta_used = parse_real(f[12]);
        r.runtime_ms = parse_real(f[13]);
        r.seed = parse_uint(f[14]);
        r.flags = f[15];
        out.push_back(std::move(r));
    }
    return out;
}

Quartiles describe(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("describe: empty input");
    std::sort(values.begin(), values.end());
    auto q = [&](double frac) {
        const double pos = frac * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double w = pos - static_cast<double>(lo);
        return values[lo] + w * (values[hi] - values[lo]);
    };
    Quartiles out;
    out.q1 = q(0.25);
    out.median = q(0.5);
    out.q3 = q(0.75);
    double s = 0.0;
    for (double v : values) s += v;
    out.mean = s / static_cast<double>(values.size());
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
    if (records.empty()) throw InvalidArgument("summarize: no records");
    using Key = std::tuple<std::string, std::size_t, double, double>;
    std::map<Key, std::vector<const ResultRecord*>> groups;
    for (const auto& r : records) groups[{r.method, r.d, r.lambda, r.nu}].push_back(&r);
    std::vector<SummaryRow> out;
    for (const auto& [key, recs] : groups) {
        SummaryRow row;
        std::tie(row.method, row.d, row.lambda, row.nu) = key;
        row.count = recs.size();
        std::vector<double> c, s;
        for (const auto* r : recs) {
            c.push_back(r->abs_cos);
            s.push_back(r->sin_angle);
            if (r->flags.find("failed") != std::string::npos) ++row.failed;
        }
        row.abs_cos = describe(std::move(c));
        row.sin_angle = describe(std::move(s));
        out.push_back(std::move(row));
    }
    return out;
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-8s %6s %12s %6s %6s %6s | %8s %8s %8s %8s | %8s %8s %8s %8s\n", "method", "d",
                  "lambda", "nu", "n", "fail", "cos_q1", "cos_med", "cos_q3", "cos_mean", "sin_q1", "sin_med", "sin_q3",
                  "sin_mean");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%-8s %6zu %12.4f %6.3g %6zu %6zu | %8.4f %8.4f %8.4f %8.4f | %8.4f %8.4f %8.4f %8.4f\n",
                      r.method.c_str(), r.d, r.lambda, r.nu, r.count, r.failed, r.abs_cos.q1, r.abs_cos.median,
                      r.abs_cos.q3, r.abs_cos.mean, r.sin_angle.q1, r.sin_angle.median, r.sin_angle.q3,
                      r.sin_angle.mean);
        out << buf;
    }
}

}  // namespace spiketensor
