#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smilab/smilab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;        // bad config or experiment preconditions
constexpr int kExitVerifyFailed = 2;  // a verification check did not hold
constexpr int kExitIo = 3;            // filesystem problems

smilab::ExperimentConfig load_with_overrides(const std::string& config_path,
                                             const std::optional<std::uint64_t>& seed,
                                             const std::string& out_path) {
    smilab::ExperimentConfig cfg = smilab::load_config(config_path);
    if (seed) cfg.master_seed = *seed;
    if (!out_path.empty()) cfg.output.path = out_path;
    return cfg;
}

void emit(const smilab::RunResult& result) {
    const std::string& path = result.config.output.path;
    const std::string& format = result.config.output.format;
    if (path.empty()) {
        std::cout << smilab::render_report(result, format);
        return;
    }
    smilab::write_report(result, path, format);
    std::fprintf(stderr, "smilab: %s  kind=%s  wrote %s\n", result.digest.c_str(),
                 result.kind.c_str(), path.c_str());
}

// out.json -> out.3.json for sweep point 3
std::string indexed_path(const std::string& path, std::size_t index) {
    const std::size_t dot = path.find_last_of('.');
    const std::size_t slash = path.find_last_of('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    if (!has_ext) return path + "." + std::to_string(index);
    return path.substr(0, dot) + "." + std::to_string(index) + path.substr(dot);
}

int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::string& out_path, int workers) {
    const smilab::ExperimentConfig cfg = load_with_overrides(config_path, seed, out_path);
    emit(smilab::run_experiment(cfg, workers));
    return kExitOk;
}

int sweep_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                  const std::string& out_path, int workers) {
    const smilab::ExperimentConfig cfg = load_with_overrides(config_path, seed, out_path);
    const std::vector<smilab::ExperimentConfig> points = smilab::expand_sweep(cfg);

    if (cfg.output.path.empty()) {
        smilab::Json docs = smilab::Json::array();
        for (const auto& point : points)
            docs.push_back(smilab::report_document(smilab::run_experiment(point, workers)));
        std::cout << docs.dump(2) << "\n";
        return kExitOk;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        smilab::RunResult result = smilab::run_experiment(points[i], workers);
        result.config.output.path = indexed_path(cfg.output.path, i);
        emit(result);
    }
    return kExitOk;
}

int verify_command(const std::string& filter, int workers, smilab::VerifyFault fault) {
    const smilab::VerifyReport report = smilab::verify_suite(filter, workers, fault);
    if (report.checks.empty()) {
        std::fprintf(stderr, "smilab: no verification check matches '%s'\n", filter.c_str());
        return kExitDomain;
    }
    for (const auto& c : report.checks) {
        std::printf("[%s] %-28s measured=%-12.5g %s %-9.5g  (%s)\n",
                    c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                    c.lower_bound ? ">=" : "<=", c.bound, c.digest.c_str());
    }
    std::printf("%zu/%zu checks passed\n",
                static_cast<std::size_t>(
                    std::count_if(report.checks.begin(), report.checks.end(),
                                  [](const auto& c) { return c.passed; })),
                report.checks.size());
    return report.all_passed ? kExitOk : kExitVerifyFailed;
}

int baseline_command(const std::vector<double>& alpha_sq, long long cap) {
    smilab::ExperimentConfig cfg;
    cfg.kind = "baseline-envariance";
    cfg.alpha_sq = alpha_sq;
    cfg.max_denominator = cap;
    double sum = 0.0;
    for (const double a : alpha_sq) {
        if (!(a >= 0.0)) throw smilab::ConfigError("--alpha-sq: entries must be >= 0");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw smilab::ConfigError("--alpha-sq: entries must sum to 1");
    emit(smilab::run_experiment(cfg));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic matrix integral laboratory"};
    app.set_version_flag("--version", std::string("smilab ") + smilab::kArtifactVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string filter;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::vector<double> alpha_sq;
    long long cap = 1000;
    std::string fault_name;

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config");
    run->add_option("--config", config_path, "experiment config (json)")->required();
    run->add_option("--seed", seed, "override master_seed");
    run->add_option("--out", out_path, "override output path");
    run->add_option("--workers", workers, "worker threads (0: automatic)");

    CLI::App* sweep = app.add_subcommand("sweep", "expand list-valued lambda/tau and run each point");
    sweep->add_option("--config", config_path, "experiment config (json)")->required();
    sweep->add_option("--seed", seed, "override master_seed");
    sweep->add_option("--out", out_path, "per-point output path stem");
    sweep->add_option("--workers", workers, "worker threads (0: automatic)");

    CLI::App* verify = app.add_subcommand("verify", "run the built-in verification checks");
    verify->add_option("--filter", filter, "keep checks whose name contains this");
    verify->add_option("--workers", workers, "worker threads (0: automatic)");
    verify->add_option("--inject-fault", fault_name, "deliberately break a check (testing)")
        ->check(CLI::IsMember({"naive-ordering"}))
        ->group("");

    CLI::App* baseline = app.add_subcommand("baseline", "exact equal-weight branching baseline");
    baseline->add_option("--alpha-sq", alpha_sq, "branch weights, must sum to 1")
        ->required()
        ->delimiter(',');
    baseline->add_option("--cap", cap, "largest denominator to consider");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, seed, out_path, workers);
        if (sweep->parsed()) return sweep_command(config_path, seed, out_path, workers);
        if (verify->parsed()) {
            const auto fault = fault_name == "naive-ordering" ? smilab::VerifyFault::NaiveOrdering
                                                              : smilab::VerifyFault::None;
            return verify_command(filter, workers, fault);
        }
        if (baseline->parsed()) return baseline_command(alpha_sq, cap);
    } catch (const smilab::IoError& e) {
        std::fprintf(stderr, "smilab: io error: %s\n", e.what());
        return kExitIo;
    } catch (const smilab::Error& e) {
        std::fprintf(stderr, "smilab: %s\n", e.what());
        return kExitDomain;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "smilab: unexpected error: %s\n", e.what());
        return kExitDomain;
    }
    return kExitDomain;
}
