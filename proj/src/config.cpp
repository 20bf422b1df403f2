// SPDX-License-Identifier: MIT
#include "spiketensor/harness.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace spiketensor {

namespace {

struct RawValue {
    std::string text;
    bool quoted = false;
};

std::map<std::string, RawValue> tokenize(std::string_view s) {
    std::map<std::string, RawValue> out;
    std::size_t i = 0;
    auto skip_blank = [&] {
        while (i < s.size()) {
            if (s[i] == '#') {
                while (i < s.size() && s[i] != '\n') ++i;
            } else if (std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
            } else {
                break;
            }
        }
    };
    auto skip_inline = [&] {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    };
    while (true) {
        skip_blank();
        if (i >= s.size()) break;
        const std::size_t start = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '.')) ++i;
        if (i == start) throw ConfigError("config: expected a key near '" + std::string(s.substr(start, 10)) + "'");
        std::string key(s.substr(start, i - start));
        skip_inline();
        if (i >= s.size() || s[i] != '=') throw ConfigError("config: expected '=' after key '" + key + "'");
        ++i;
        skip_inline();
        RawValue v;
        if (i < s.size() && s[i] == '"') {
            const std::size_t close = s.find('"', i + 1);
            if (close == std::string_view::npos) throw ConfigError("config: unterminated string for key '" + key + "'");
            v.text = std::string(s.substr(i + 1, close - i - 1));
            v.quoted = true;
            i = close + 1;
        } else {
            const std::size_t vs = i;
            while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '#') ++i;
            v.text = std::string(s.substr(vs, i - vs));
            if (v.text.empty()) throw ConfigError("config: missing value for key '" + key + "'");
        }
        if (out.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        out.emplace(std::move(key), std::move(v));
    }
    return out;
}

std::string as_string(const std::string& key, const RawValue& v) {
    (void)key;
    return v.text;
}

double as_real(const std::string& key, const RawValue& v) {
    if (v.quoted) throw ConfigError("config: '" + key + "' expects a number, got a string");
    double x = 0.0;
    const char* end = v.text.data() + v.text.size();
    auto [ptr, ec] = std::from_chars(v.text.data(), end, x);
    if (ec != std::errc{} || ptr != end || !std::isfinite(x))
        throw ConfigError("config: '" + key + "' expects a number, got '" + v.text + "'");
    return x;
}

std::uint64_t as_uint(const std::string& key, const RawValue& v) {
    if (v.quoted) throw ConfigError("config: '" + key + "' expects an integer, got a string");
    std::uint64_t x = 0;
    const char* end = v.text.data() + v.text.size();
    auto [ptr, ec] = std::from_chars(v.text.data(), end, x);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v.text + "'");
    return x;
}

bool as_bool(const std::string& key, const RawValue& v) {
    if (v.text == "true") return true;
    if (v.text == "false") return false;
    throw ConfigError("config: '" + key + "' expects true or false, got '" + v.text + "'");
}

std::string fmt_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<Method> parse_methods(const std::string& text) {
    std::vector<Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.pop_back();
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.erase(item.begin());
        if (item.empty()) continue;
        const Method m = parse_method(item);
        for (Method seen : out)
            if (seen == m) throw ConfigError("config: method '" + item + "' listed twice");
        out.push_back(m);
    }
    return out;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::hosvd: return "hosvd";
        case Method::power: return "power";
        case Method::als: return "als";
        case Method::robust: return "robust";
        case Method::split: return "split";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    if (text == "hosvd") return Method::hosvd;
    if (text == "power") return Method::power;
    if (text == "als") return Method::als;
    if (text == "robust") return Method::robust;
    if (text == "split") return Method::split;
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

double ExperimentSpec::lambda() const { return lambda_coef * std::pow(static_cast<double>(d), lambda_exp); }

std::size_t ExperimentSpec::effective_iterations() const { return iterations.value_or(default_iterations(d)); }

std::size_t ExperimentSpec::effective_groups() const {
    return robust.n_groups > 0 ? robust.n_groups : default_group_count(d);
}

std::string ExperimentSpec::id() const {
    char buf[128];
    if (noise.kind == NoiseKind::gaussian)
        std::snprintf(buf, sizeof buf, "d%zu-p%zu-c%g-xi%g-gaussian", d, p, lambda_coef, lambda_exp);
    else
        std::snprintf(buf, sizeof buf, "d%zu-p%zu-c%g-xi%g-%s%g", d, p, lambda_coef, lambda_exp,
                      std::string(to_string(noise.kind)).c_str(), noise.nu);
    return buf;
}

void ExperimentSpec::validate() const {
    if (d < 1) throw ConfigError("config: d must be at least 1");
    if (p < 2 || p > kMaxOrder) throw ConfigError("config: p must be between 2 and 6");
    double entries = std::pow(static_cast<double>(d), static_cast<double>(p));
    if (entries > static_cast<double>(kMaxEntries)) throw ConfigError("config: d^p exceeds the 2^28 entry cap");
    if (reps < 1) throw ConfigError("config: reps must be at least 1");
    if (workers < 1) throw ConfigError("config: workers must be at least 1");
    if (!(lambda_exp >= 0.0 && lambda_exp <= static_cast<double>(p)))
        throw ConfigError("config: xi must lie in [0, p]");
    if (!(lambda() > 0.0) || !std::isfinite(lambda())) throw ConfigError("config: lambda = lambda_coef * d^xi must be positive");
    if (methods.empty()) throw ConfigError("config: at least one method is required");
    if (restarts < 1) throw ConfigError("config: restarts must be at least 1");
    try {
        noise.validate(d);
        robust.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (Method m : methods)
        if (m == Method::split && d < 2) throw ConfigError("config: split requires d >= 2");
}

ExperimentSpec parse_config(std::string_view text) {
    static const std::set<std::string> known = {
        "d", "p", "lambda_coef", "xi", "lambda_exp", "noise", "nu", "mixture_dim", "methods", "reps", "seed",
        "workers", "iterations", "restarts", "timing", "stream_base", "split.extra_iterations",
        "robust.n_groups", "robust.theta_strategy", "robust.theta", "robust.lambda_guess", "robust.lambda_min",
        "robust.lambda_max"};
    const auto kv = tokenize(text);
    for (const auto& [key, value] : kv)
        if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    if (kv.count("xi") && kv.count("lambda_exp")) throw ConfigError("config: give only one of xi and lambda_exp");

    auto get = [&](const char* key) -> const RawValue* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    ExperimentSpec s;
    if (auto* v = get("d")) s.d = as_uint("d", *v);
    else throw ConfigError("config: missing required key 'd'");
    if (auto* v = get("p")) s.p = as_uint("p", *v);
    if (auto* v = get("lambda_coef")) s.lambda_coef = as_real("lambda_coef", *v);
    if (auto* v = get("xi")) s.lambda_exp = as_real("xi", *v);
    if (auto* v = get("lambda_exp")) s.lambda_exp = as_real("lambda_exp", *v);
    if (auto* v = get("noise")) {
        try {
            s.noise.kind = parse_noise_kind(as_string("noise", *v));
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
    if (auto* v = get("nu")) s.noise.nu = as_real("nu", *v);
    if (auto* v = get("mixture_dim")) s.noise.mixture_dim = as_uint("mixture_dim", *v);
    if (auto* v = get("methods")) s.methods = parse_methods(as_string("methods", *v));
    if (auto* v = get("reps")) s.reps = as_uint("reps", *v);
    if (auto* v = get("seed")) s.seed = as_uint("seed", *v);
    if (auto* v = get("workers")) s.workers = as_uint("workers", *v);
    if (auto* v = get("iterations")) s.iterations = as_uint("iterations", *v);
    if (auto* v = get("restarts")) s.restarts = as_uint("restarts", *v);
    if (auto* v = get("timing")) s.timing = as_bool("timing", *v);
    if (auto* v = get("stream_base")) s.stream_base = as_uint("stream_base", *v);
    if (auto* v = get("split.extra_iterations")) s.split_extra_iterations = as_uint("split.extra_iterations", *v);
    if (auto* v = get("robust.n_groups")) s.robust.n_groups = as_uint("robust.n_groups", *v);

    std::string strategy;
    if (auto* v = get("robust.theta_strategy")) strategy = as_string("robust.theta_strategy", *v);
    else if (get("robust.theta")) strategy = "fixed";
    else if (get("robust.lambda_min") || get("robust.lambda_max")) strategy = "lepski";
    else strategy = "plugin";

    auto reject = [&](const char* key) {
        if (get(key)) throw ConfigError(std::string("config: '") + key + "' does not apply to theta strategy '" + strategy + "'");
    };
    if (strategy == "fixed") {
        reject("robust.lambda_guess");
        reject("robust.lambda_min");
        reject("robust.lambda_max");
        auto* v = get("robust.theta");
        if (!v) throw ConfigError("config: fixed theta strategy requires robust.theta");
        s.robust.theta = FixedTheta{as_real("robust.theta", *v)};
    } else if (strategy == "plugin") {
        reject("robust.theta");
        reject("robust.lambda_min");
        reject("robust.lambda_max");
        PlugInTheta t;
        if (auto* v = get("robust.lambda_guess")) t.lambda_guess = as_real("robust.lambda_guess", *v);
        else t.lambda_guess = 3000.0;
        s.robust.theta = t;
    } else if (strategy == "lepski") {
        reject("robust.theta");
        reject("robust.lambda_guess");
        LepskiTheta t;
        if (auto* v = get("robust.lambda_min")) t.lambda_min = as_real("robust.lambda_min", *v);
        if (auto* v = get("robust.lambda_max")) t.lambda_max = as_real("robust.lambda_max", *v);
        s.robust.theta = t;
    } else {
        throw ConfigError("config: robust.theta_strategy must be fixed, plugin or lepski");
    }

    s.validate();
    return s;
}

ExperimentSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentSpec& s) {
    std::ostringstream out;
    out << "d = " << s.d << '\n';
    out << "p = " << s.p << '\n';
    out << "lambda_coef = " << fmt_real(s.lambda_coef) << '\n';
    out << "xi = " << fmt_real(s.lambda_exp) << '\n';
    out << "noise = \"" << to_string(s.noise.kind) << "\"\n";
    out << "nu = " << fmt_real(s.noise.nu) << '\n';
    if (s.noise.mixture_dim) out << "mixture_dim = " << *s.noise.mixture_dim << '\n';
    out << "methods = \"";
    for (std::size_t i = 0; i < s.methods.size(); ++i) out << (i ? "," : "") << to_string(s.methods[i]);
    out << "\"\n";
    out << "reps = " << s.reps << '\n';
    out << "seed = " << s.seed << '\n';
    out << "workers = " << s.workers << '\n';
    if (s.iterations) out << "iterations = " << *s.iterations << '\n';
    out << "restarts = " << s.restarts << '\n';
    out << "timing = " << (s.timing ? "true" : "false") << '\n';
    out << "stream_base = " << s.stream_base << '\n';
    out << "split.extra_iterations = " << s.split_extra_iterations << '\n';
    out << "robust.n_groups = " << s.robust.n_groups << '\n';
    if (const auto* f = std::get_if<FixedTheta>(&s.robust.theta)) {
        out << "robust.theta_strategy = \"fixed\"\nrobust.theta = " << fmt_real(f->theta) << '\n';
    } else if (const auto* pl = std::get_if<PlugInTheta>(&s.robust.theta)) {
        out << "robust.theta_strategy = \"plugin\"\nrobust.lambda_guess = " << fmt_real(pl->lambda_guess) << '\n';
    } else {
        const auto& l = std::get<LepskiTheta>(s.robust.theta);
        out << "robust.theta_strategy = \"lepski\"\nrobust.lambda_min = " << fmt_real(l.lambda_min)
            << "\nrobust.lambda_max = " << fmt_real(l.lambda_max) << '\n';
    }
    return out.str();
}

}  // namespace spiketensor
