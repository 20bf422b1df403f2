// SPDX-License-Identifier: MIT
// Command-line front end: simulations, sweeps, single-tensor estimation,
// noise-norm scans and result summaries.
#include "spiketensor/diagnostics.hpp"
#include "spiketensor/estimators.hpp"
#include "spiketensor/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace spiketensor;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size()) throw ConfigError("bad list value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty value list");
    return out;
}

void apply_seed_override(ExperimentSpec& spec, const CLI::Option* seed_opt, std::uint64_t seed) {
    if (const char* env = std::getenv("SPIKETENSOR_SEED")) {
        try {
            std::size_t pos = 0;
            spec.seed = std::stoull(env, &pos);
            if (pos != std::string(env).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError(std::string("SPIKETENSOR_SEED is not an integer: '") + env + "'");
        }
    }
    if (seed_opt->count() > 0) spec.seed = seed;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank-one spiked tensor estimation under heavy-tailed noise"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo experiment from a config file");
    std::string sim_config, sim_out;
    std::uint64_t sim_seed = 0;
    std::size_t sim_workers = 0;
    sim->add_option("--config", sim_config, "Config file")->required();
    sim->add_option("--out", sim_out, "Output CSV (default stdout)");
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Override the config seed");
    sim->add_option("--workers", sim_workers, "Parallel workers");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Run an experiment across values of one axis");
    std::string swp_config, swp_axis, swp_values, swp_out;
    std::uint64_t swp_seed = 0;
    swp->add_option("--config", swp_config, "Config file")->required();
    swp->add_option("--axis", swp_axis, "xi | nu | d")->required()->check(CLI::IsMember({"xi", "nu", "d"}));
    swp->add_option("--values", swp_values, "Comma-separated axis values")->required();
    swp->add_option("--out", swp_out, "Output CSV")->required();
    auto* swp_seed_opt = swp->add_option("--seed", swp_seed, "Override the config seed");

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate singular vectors of one tensor file");
    std::string est_in, est_method, est_out;
    std::size_t est_groups = 0, est_iters = 0, est_restarts = 20, est_extra = 0;
    double est_theta = 0.0, est_guess = 0.0, est_lmin = 0.0, est_lmax = 0.0;
    std::uint64_t est_seed = 0;
    est->add_option("--input", est_in, "Tensor text file")->required();
    est->add_option("--method", est_method, "hosvd | power | als | robust | split")
        ->required()
        ->check(CLI::IsMember({"hosvd", "power", "als", "robust", "split"}));
    est->add_option("--out", est_out, "Report CSV (default stdout)");
    est->add_option("--groups", est_groups, "Robust group count (default ceil(10 ln d))");
    auto* o_theta = est->add_option("--theta", est_theta, "Fixed truncation parameter");
    auto* o_guess = est->add_option("--lambda-guess", est_guess, "Plug-in signal strength guess");
    auto* o_lmin = est->add_option("--lepski-min", est_lmin, "Lepski lower bound on lambda");
    auto* o_lmax = est->add_option("--lepski-max", est_lmax, "Lepski upper bound on lambda");
    est->add_flag("--lepski", "Lepski selection with default bounds");
    est->add_option("--iters", est_iters, "Power iterations (default ceil(log2 d) + 2)");
    est->add_option("--restarts", est_restarts, "ALS restarts");
    est->add_option("--extra-iters", est_extra, "Full-tensor refinement iterations after splitting");
    est->add_option("--seed", est_seed, "Seed for partitions, splits and restarts");
    o_theta->excludes(o_guess)->excludes(o_lmin)->excludes(o_lmax);
    o_guess->excludes(o_lmin)->excludes(o_lmax);

    // norm-scan
    auto* scan = app.add_subcommand("norm-scan", "Scaling of noise spectral-norm surrogates with d");
    std::string scan_noise, scan_dims, scan_out;
    double scan_nu = 0.0;
    std::size_t scan_p = 3, scan_reps = 20, scan_restarts = 20;
    std::uint64_t scan_seed = 0;
    scan->add_option("--noise", scan_noise, "gaussian | pareto | mixture")
        ->required()
        ->check(CLI::IsMember({"gaussian", "pareto", "mixture"}));
    scan->add_option("--nu", scan_nu, "Tail parameter");
    scan->add_option("--p", scan_p, "Tensor order");
    scan->add_option("--dims", scan_dims, "Ascending comma-separated dimensions")->required();
    scan->add_option("--reps", scan_reps, "Replications per dimension");
    scan->add_option("--restarts", scan_restarts, "ALS restarts (0 disables the ALS column)");
    scan->add_option("--seed", scan_seed, "Seed");
    scan->add_option("--out", scan_out, "Output CSV")->required();

    // summarize
    auto* sum = app.add_subcommand("summarize", "Summary table of a results CSV");
    std::string sum_in;
    sum->add_option("--in", sum_in, "Results CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) {
            ExperimentSpec spec = parse_config_file(sim_config);
            apply_seed_override(spec, sim_seed_opt, sim_seed);
            if (sim_workers > 0) spec.workers = sim_workers;
            emit(sim_out, to_csv(run_experiment(spec)));
        } else if (*swp) {
            ExperimentSpec spec = parse_config_file(swp_config);
            apply_seed_override(spec, swp_seed_opt, swp_seed);
            emit(swp_out, to_csv(sweep(spec, parse_axis(swp_axis), parse_list(swp_values))));
        } else if (*est) {
            std::ifstream in(est_in);
            if (!in) throw ConfigError("cannot open '" + est_in + "'");
            DenseTensor x;
            try {
                x = read_tensor_text(in);
            } catch (const InvalidArgument& e) {
                throw ConfigError(e.what());
            }
            RobustConfig cfg;
            cfg.n_groups = est_groups;
            if (o_theta->count()) cfg.theta = FixedTheta{est_theta};
            else if (o_guess->count()) cfg.theta = PlugInTheta{est_guess};
            else if (o_lmin->count() || o_lmax->count() || est->count("--lepski")) cfg.theta = LepskiTheta{est_lmin, est_lmax};
            try {
                cfg.validate();
            } catch (const InvalidArgument& e) {
                throw ConfigError(e.what());
            }
            Rng rng(est_seed, 0);
            EstimateReport r;
            try {
                const Method m = parse_method(est_method);
                std::size_t dmax = 1;
                for (auto d : x.dims()) dmax = std::max(dmax, d);
                switch (m) {
                    case Method::hosvd: r = hosvd_report(x); break;
                    case Method::power:
                        r = power_iterate(x, hosvd_init(x), est_iters > 0 ? est_iters : default_iterations(dmax));
                        break;
                    case Method::als: r = als_rank1(x, AlsOptions{est_restarts, 1000, 1e-12}, rng); break;
                    case Method::robust: r = robust_hosvd(x, cfg, rng); break;
                    case Method::split: r = split_pipeline(x, cfg, est_extra, rng); break;
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                std::cerr << "estimation failed: " << e.what() << '\n';
                return kExitEstimation;
            }
            std::ostringstream out;
            out << "method,mode,index,value,lambda_hat,theta_used,flags\r\n";
            std::string flags = r.any_degenerate() ? "degenerate_top" : "";
            if (r.lepski_fallback) flags += flags.empty() ? "lepski_fallback" : ";lepski_fallback";
            for (std::size_t i = 0; i < r.modes.size(); ++i)
                for (std::size_t j = 0; j < r.estimates[i].size(); ++j)
                    out << r.method << ',' << r.modes[i] + 1 << ',' << j + 1 << ',' << fmt(r.estimates[i][j]) << ','
                        << fmt(r.lambda_hat) << ',' << fmt(r.theta_used.empty() ? 0.0 : r.theta_used[i]) << ','
                        << flags << "\r\n";
            emit(est_out, out.str());
        } else if (*scan) {
            NoiseSpec spec;
            spec.kind = parse_noise_kind(scan_noise);
            spec.nu = scan_nu;
            std::vector<std::size_t> dims;
            for (double v : parse_list(scan_dims)) {
                if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
                    throw ConfigError("--dims must be positive integers");
                dims.push_back(static_cast<std::size_t>(v));
            }
            if (scan_p < 2 || scan_p > kMaxOrder) throw ConfigError("--p must be between 2 and 6");
            NormScanOptions opt;
            opt.reps = scan_reps;
            opt.als_restarts = scan_restarts;
            std::vector<NormScanRow> rows;
            try {
                rows = norm_scaling_scan(spec, scan_p, dims, opt, scan_seed);
            } catch (const InvalidArgument& e) {
                throw ConfigError(e.what());
            }
            std::ostringstream out;
            out << "d,fiber_bound_median,max_entry_median,als_median\r\n";
            std::vector<double> xs, fb, me, al;
            for (const auto& row : rows) {
                out << row.d << ',' << fmt(row.fiber_bound) << ',' << fmt(row.max_entry) << ',' << fmt(row.als_estimate)
                    << "\r\n";
                xs.push_back(static_cast<double>(row.d));
                fb.push_back(row.fiber_bound);
                me.push_back(row.max_entry);
                al.push_back(row.als_estimate);
            }
            emit(scan_out, out.str());
            if (rows.size() >= 2) {
                std::cout << "slope fiber_bound " << loglog_slope(xs, fb) << '\n';
                std::cout << "slope max_entry " << loglog_slope(xs, me) << '\n';
                if (scan_restarts > 0) std::cout << "slope als " << loglog_slope(xs, al) << '\n';
            }
        } else if (*sum) {
            std::ifstream in(sum_in, std::ios::binary);
            if (!in) throw ConfigError("cannot open '" + sum_in + "'");
            std::vector<ResultRecord> recs;
            try {
                recs = read_csv(in);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
            print_summary(std::cout, summarize(recs));
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
