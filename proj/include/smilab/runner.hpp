#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smilab/config.hpp"
#include "smilab/einselection.hpp"
#include "smilab/ensemble.hpp"
#include "smilab/lab.hpp"
#include "smilab/pw.hpp"
#include "smilab/sampling.hpp"
#include "smilab/version.hpp"

namespace smilab {

inline constexpr double kPwLimitTol = 1e-10;

// Config presets resolved into concrete operators and an ensemble.
struct ResolvedExperiment {
    HermitianOperator observable;
    SpectralDecomposition decomp;
    DensityMatrix state;
    EnsembleSpec spec;
};

namespace detail {

inline EnsembleSpec make_ensemble(const ExperimentConfig& cfg, const HermitianOperator& base,
                                  const SpectralDecomposition& decomp) {
    if (cfg.ensemble_kind == "zero-noise") return EnsembleSpec::zero_noise(base);
    if (cfg.ensemble_kind == "dephasing")
        return EnsembleSpec::dephasing(base, decomp, cfg.lambda());
    return EnsembleSpec::gue_perturbed(base, cfg.lambda());
}

inline StateVector pure_part(const DensityMatrix& rho, const std::string& why) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    const Eigen::Index top = rho.dim() - 1;  // eigenvalues ascend
    if (es.eigenvalues()(top) < 1.0 - 1e-9)
        throw ConfigError("state: a pure state is required for " + why);
    return StateVector(es.eigenvectors().col(top));
}

inline Json matrix_to_json(const Matrix& m) {
    Json re = Json::array();
    Json im = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json rrow = Json::array();
        Json irow = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rrow.push_back(m(r, c).real());
            irow.push_back(m(r, c).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return Json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline Json real_matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string rational_string(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

} // namespace detail

inline ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg) {
    HermitianOperator obs = parse_observable_preset(cfg.observable);
    SpectralDecomposition decomp = spectral_decompose(obs);
    DensityMatrix rho0 = parse_state_preset(cfg.state, decomp, obs.dim());
    HermitianOperator base(parse_hamiltonian_preset(cfg.base, obs.dim()));
    EnsembleSpec spec = detail::make_ensemble(cfg, base, decomp);
    return ResolvedExperiment{std::move(obs), std::move(decomp), std::move(rho0),
                              std::move(spec)};
}

namespace detail {

// grid.slices counts slices per unit time here, so the per-slice noise
// variance stays fixed along the tau axis.
inline Json run_decay_curve(const ExperimentConfig& cfg, int workers) {
    const ResolvedExperiment rx = resolve_experiment(cfg);
    const DecayCurve curve = decay_curve(rx.state, rx.spec, rx.decomp, cfg.taus, cfg.slices,
                                         cfg.n_trajectories, cfg.master_seed, workers);
    Json p;
    p["taus"] = curve.taus;
    p["measured"] = curve.measured;
    if (!curve.analytic.empty()) p["analytic"] = curve.analytic;
    p["mc_errors"] = curve.mc_errors;
    p["slices"] = curve.slices;
    p["n_trajectories"] = curve.n_trajectories;
    return p;
}

inline Json run_ensemble_average(const ExperimentConfig& cfg, int workers) {
    const ResolvedExperiment rx = resolve_experiment(cfg);
    const TimeGrid grid(cfg.tau(), cfg.slices);
    Json p;
    p["target"] = cfg.target;
    p["n_trajectories"] = cfg.n_trajectories;
    if (cfg.target == "state") {
        const EnsembleSummary summary =
            ensemble_average_state(rx.state, rx.spec, grid, cfg.n_trajectories,
                                   cfg.master_seed, ChannelOrdering::TimeOrdered, workers);
        const DecoherenceMetrics metrics =
            decoherence_metrics(summary_state(summary), rx.state, rx.decomp);
        p["mean"] = matrix_to_json(summary.mean);
        p["entry_variance"] = real_matrix_to_json(summary.entry_variance);
        p["monte_carlo_error"] = summary.monte_carlo_error;
        p["metrics"] = Json{{"offdiagonal_norm", metrics.offdiagonal_norm},
                            {"purity", metrics.purity},
                            {"born_deviation", metrics.born_deviation},
                            {"diagonal_drift", metrics.diagonal_drift}};
    } else {
        const EnsembleSummary summary =
            ensemble_average_operator(rx.observable, rx.spec, grid, cfg.n_trajectories,
                                      cfg.master_seed, ChannelOrdering::TimeOrdered, workers);
        const ReducedOperatorCheck check = reduced_operator_check(summary.mean, rx.decomp);
        p["mean"] = matrix_to_json(summary.mean);
        p["entry_variance"] = real_matrix_to_json(summary.entry_variance);
        p["monte_carlo_error"] = summary.monte_carlo_error;
        p["reduced_check"] = Json{{"offdiagonal_block_norm", check.offdiagonal_block_norm},
                                  {"eigenvalue_drift", check.eigenvalue_drift}};
    }
    return p;
}

inline Json run_stability(const ExperimentConfig& cfg, int workers) {
    const ResolvedExperiment rx = resolve_experiment(cfg);
    const StateVector psi = pure_part(rx.state, "kind 'stability'");
    const TimeGrid grid(cfg.tau(), cfg.slices);
    const StabilityReport rep =
        stability_test(psi, rx.observable, rx.spec, grid, cfg.n_trajectories, cfg.master_seed,
                       kStabilityThreshold, ChannelOrdering::TimeOrdered, workers);

    std::int64_t locked = 0;
    double phase_sum = 0.0;
    double amp_sum = 0.0;
    for (std::size_t l = 0; l < rep.phase_estimates.size(); ++l) {
        if (!std::isnan(rep.phase_estimates[l])) {
            ++locked;
            phase_sum += rep.phase_estimates[l];
        }
        amp_sum += rep.return_amplitudes[l];
    }

    Json p;
    p["mean"] = Json{{"re", rep.mean.real()}, {"im", rep.mean.imag()}};
    p["variance"] = rep.variance;
    p["threshold"] = rep.threshold;
    p["is_stable"] = rep.is_stable;
    p["n_trajectories"] = rep.n_trajectories;
    p["n_phase_locked"] = locked;
    p["mean_locked_phase"] = locked > 0 ? phase_sum / static_cast<double>(locked) : 0.0;
    p["mean_return_amplitude"] = amp_sum / static_cast<double>(rep.n_trajectories);
    return p;
}

inline Json run_pw_consistency(const ExperimentConfig& cfg, int /*workers*/) {
    double max_disc = 0.0;
    double sum_disc = 0.0;
    for (int i = 0; i < cfg.n_instances; ++i) {
        RandomStream rng(cfg.master_seed, static_cast<std::uint64_t>(i), 0);
        const HermitianOperator h_system(random_hermitian(2, rng));
        const HermitianOperator h_observer(random_hermitian(2, rng));
        const HermitianOperator a_system(random_hermitian(2, rng));
        const DensityMatrix rho_system = random_density(2, rng);
        const StateVector psi_observer = random_pure(2, rng);
        const double tau = 0.3 + 1.4 * rng.next_double();

        const auto joint = JointSystemConfig::noninteracting(h_system, h_observer);
        const LimitCheck check = limit_consistency_check(joint, a_system, rho_system,
                                                         psi_observer, tau, cfg.slices);
        max_disc = std::max(max_disc, check.max_discrepancy);
        sum_disc += check.max_discrepancy;
    }

    Json p;
    p["n_instances"] = cfg.n_instances;
    p["dims"] = Json{{"system", 2}, {"observer", 2}};
    p["slices"] = cfg.slices;
    p["tolerance"] = kPwLimitTol;
    p["max_discrepancy"] = max_disc;
    p["mean_discrepancy"] = sum_disc / cfg.n_instances;
    p["all_within_tolerance"] = max_disc <= kPwLimitTol;
    return p;
}

inline Json run_baseline_envariance(const ExperimentConfig& cfg) {
    const RationalApproximation approx = fine_grain(cfg.alpha_sq, cfg.max_denominator);
    const long long m = approx.denominator;
    const int n_cells = static_cast<int>(approx.numerators.size());
    const EnvarianceDims dims{n_cells, static_cast<int>(m), static_cast<int>(m)};
    const EnvarianceState state = build_coarse_state(approx.numerators, dims);

    Json p;
    p["targets"] = approx.targets;
    p["numerators"] = approx.numerators;
    p["denominator"] = m;
    p["achieved_error"] = approx.achieved_error;
    p["cap"] = approx.cap;
    p["fine_probability"] = rational_string(fine_outcome_probability(state));
    Json probs = Json::array();
    for (const Rational& r : coarse_probabilities(state)) probs.push_back(rational_string(r));
    p["coarse_probabilities"] = std::move(probs);

    // first-class swap behaviors, when the cell structure admits them
    long long cell_start = 0;
    Json within = nullptr;
    for (std::size_t k = 0; k < approx.numerators.size(); ++k) {
        if (approx.numerators[k] >= 2) {
            std::vector<long long> perm(m);
            for (long long j = 0; j < m; ++j) perm[j] = j;
            std::swap(perm[cell_start], perm[cell_start + 1]);
            within = envariance_swap_check(state, perm);
            break;
        }
        cell_start += approx.numerators[k];
    }
    p["within_cell_swap_absorbed"] = within;

    Json unequal = nullptr;
    long long start_a = 0;
    for (std::size_t a = 0; a < approx.numerators.size() && unequal.is_null(); ++a) {
        long long start_b = start_a + approx.numerators[a];
        for (std::size_t b = a + 1; b < approx.numerators.size(); ++b) {
            if (approx.numerators[a] > 0 && approx.numerators[b] > 0 &&
                approx.numerators[a] != approx.numerators[b]) {
                std::vector<long long> perm(m);
                for (long long j = 0; j < m; ++j) perm[j] = j;
                std::swap(perm[start_a], perm[start_b]);
                unequal = envariance_swap_check(state, perm);
                break;
            }
            start_b += approx.numerators[b];
        }
        start_a += approx.numerators[a];
    }
    p["unequal_cell_swap_absorbed"] = unequal;
    return p;
}

} // namespace detail

struct RunResult {
    ExperimentConfig config;
    std::string digest;
    std::string version = kArtifactVersion;
    std::string kind;
    double duration_seconds = 0.0;  // wall clock; everything else is deterministic
    Json payload;
};

inline RunResult run_experiment(const ExperimentConfig& cfg, int workers = 0) {
    RunResult out;
    out.config = cfg;
    out.digest = config_digest(cfg);
    out.kind = cfg.kind;

    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.kind == "decay-curve") {
        out.payload = detail::run_decay_curve(cfg, workers);
    } else if (cfg.kind == "ensemble-average") {
        out.payload = detail::run_ensemble_average(cfg, workers);
    } else if (cfg.kind == "stability") {
        out.payload = detail::run_stability(cfg, workers);
    } else if (cfg.kind == "pw-consistency") {
        out.payload = detail::run_pw_consistency(cfg, workers);
    } else if (cfg.kind == "baseline-envariance") {
        out.payload = detail::run_baseline_envariance(cfg);
    } else {
        throw ConfigError("kind: '" + cfg.kind + "' is not runnable");
    }
    out.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Sweep points in row-major order: lambda outer, tau inner. Each point gets
// an independent seed derived from the sweep seed and the point index, and a
// scalarized config that reproduces the point when run on its own.
inline std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
    static const std::vector<std::string> sweepable = {"decay-curve", "ensemble-average",
                                                       "stability"};
    if (std::find(sweepable.begin(), sweepable.end(), cfg.kind) == sweepable.end())
        throw ConfigError("sweep: kind '" + cfg.kind + "' has no sweep axes");

    const bool tau_axis = cfg.taus.size() > 1 && cfg.kind != "decay-curve";
    std::vector<ExperimentConfig> points;
    std::uint64_t index = 0;
    for (const double l : cfg.lambdas) {
        if (tau_axis) {
            for (const double t : cfg.taus) {
                ExperimentConfig p = cfg;
                p.lambdas = {l};
                p.taus = {t};
                p.master_seed = derive_seed(cfg.master_seed, index++);
                points.push_back(std::move(p));
            }
        } else {
            ExperimentConfig p = cfg;
            p.lambdas = {l};
            p.master_seed = derive_seed(cfg.master_seed, index++);
            points.push_back(std::move(p));
        }
    }
    return points;
}

inline std::vector<RunResult> run_sweep(const ExperimentConfig& cfg, int workers = 0) {
    std::vector<RunResult> results;
    for (const ExperimentConfig& point : expand_sweep(cfg)) {
        results.push_back(run_experiment(point, workers));
    }
    return results;
}

} // namespace smilab
