// SPDX-License-Identifier: MIT
#pragma once

#include "spiketensor/estimators.hpp"
#include "spiketensor/noise.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spiketensor {

enum class Method { hosvd, power, als, robust, split };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

/// One Monte-Carlo design point: lambda = lambda_coef * d^xi.
struct ExperimentSpec {
    std::size_t d = 0;
    std::size_t p = 3;
    double lambda_coef = 3.0;
    double lambda_exp = 0.75;
    NoiseSpec noise;
    std::vector<Method> methods{Method::hosvd, Method::split};
    RobustConfig robust;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    /// Power iterations for `power`; unset means ceil(log2 d) + 2.
    std::optional<std::size_t> iterations;
    std::size_t restarts = 20;
    /// Full-tensor power iterations appended to `split`.
    std::size_t split_extra_iterations = 0;
    /// Replication r uses data stream stream_base + r.
    std::uint64_t stream_base = 0;
    /// Record wall-clock runtimes; off keeps the CSV byte-reproducible.
    bool timing = false;

    [[nodiscard]] double lambda() const;
    [[nodiscard]] std::size_t effective_iterations() const;
    [[nodiscard]] std::size_t effective_groups() const;
    [[nodiscard]] std::string id() const;
    /// Throws ConfigError naming the violated constraint.
    void validate() const;

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Flat `key = value` text; `#` starts a comment; strings may be double-quoted.
/// Several assignments may share a line. Unknown keys are errors.
ExperimentSpec parse_config(std::string_view text);
ExperimentSpec parse_config_file(const std::string& path);
/// Emits every explicitly settable key; parse_config(serialize_config(s)) == s.
std::string serialize_config(const ExperimentSpec& spec);

struct ResultRecord {
    std::string experiment_id;
    std::size_t rep = 0;
    std::string method;
    std::size_t mode = 0;  // 1-based
    std::size_t d = 0;
    std::size_t p = 0;
    double lambda = 0.0;
    std::string noise;
    double nu = 0.0;
    double sin_angle = 1.0;
    double abs_cos = 0.0;
    double lambda_hat = 0.0;
    double theta_used = 0.0;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
    std::string flags;

    friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

/// One record per (rep, method, mode), ordered by rep, then method order, then mode.
/// Estimator failures become records with sin_angle = 1 and flag "failed".
std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec);

enum class SweepAxis { xi, nu, d };
SweepAxis parse_axis(std::string_view text);

/// Stream base for one sweep point; depends only on (axis, value).
std::uint64_t sweep_stream_base(SweepAxis axis, double value);
ExperimentSpec sweep_point(const ExperimentSpec& base, SweepAxis axis, double value);
std::vector<ResultRecord> sweep(const ExperimentSpec& base, SweepAxis axis, const std::vector<double>& values);

/// RFC-4180, header row first, reals with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<ResultRecord>& records);
std::string to_csv(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_csv(std::istream& in);

struct Quartiles {
    double q1 = 0.0, median = 0.0, q3 = 0.0, mean = 0.0;
};

/// Linear-interpolation quantiles (position q * (n - 1) in sorted order).
Quartiles describe(std::vector<double> values);

struct SummaryRow {
    std::string method;
    std::size_t d = 0;
    double lambda = 0.0;
    double nu = 0.0;
    std::size_t count = 0;
    std::size_t failed = 0;
    Quartiles abs_cos;
    Quartiles sin_angle;
};

/// Grouped by (method, d, lambda, nu), sorted by that key.
std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records);
void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace spiketensor
