#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "smilab/config.hpp"
#include "smilab/einselection.hpp"
#include "smilab/ensemble.hpp"
#include "smilab/lab.hpp"
#include "smilab/pw.hpp"
#include "smilab/runner.hpp"
#include "smilab/sampling.hpp"

namespace smilab {

// Deliberate defects for exercising the failure path end to end. The naive
// ordering fault silently swaps the time-ordered product for the summed
// exponent, which the ordering check is designed to catch.
enum class VerifyFault { None, NaiveOrdering };

struct VerifyCheck {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool lower_bound = false;  // pass rule: measured >= bound instead of <=
    bool passed = false;
    std::string digest;
    std::string details;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed = true;
};

namespace detail {

class VerifyRecorder {
public:
    VerifyRecorder(VerifyReport& report, const std::string& filter)
        : report_(report), filter_(filter) {}

    bool wants(const std::string& name) const {
        return filter_.empty() || name.find(filter_) != std::string::npos;
    }

    void upper(const std::string& name, double measured, double bound, const Json& params,
               const std::string& details) {
        add(name, measured, bound, false, measured <= bound, params, details);
    }

    void lower(const std::string& name, double measured, double bound, const Json& params,
               const std::string& details) {
        add(name, measured, bound, true, measured >= bound, params, details);
    }

private:
    void add(const std::string& name, double measured, double bound, bool lower_bound,
             bool passed, const Json& params, const std::string& details) {
        VerifyCheck c;
        c.name = name;
        c.measured = measured;
        c.bound = bound;
        c.lower_bound = lower_bound;
        c.passed = passed;
        Json keyed = params;
        keyed["check"] = name;
        c.digest = hex16(fnv1a64(keyed.dump()));
        c.details = details;
        report_.checks.push_back(std::move(c));
        report_.all_passed = report_.all_passed && passed;
    }

    VerifyReport& report_;
    std::string filter_;
};

} // namespace detail

// Fast self-contained cross-checks over every layer. filter keeps the checks
// whose name contains it; a fault other than None breaks the matching check
// on purpose so the failure path stays honest.
inline VerifyReport verify_suite(const std::string& filter = "", int workers = 0,
                                 VerifyFault fault = VerifyFault::None) {
    VerifyReport report;
    detail::VerifyRecorder rec(report, filter);

    if (rec.wants("pw-limit-agreement")) {
        const Json params{{"instances", 20}, {"slices", 48}, {"seed", 20260401}};
        double max_disc = 0.0;
        for (int i = 0; i < 20; ++i) {
            RandomStream rng(20260401, static_cast<std::uint64_t>(i), 0);
            const HermitianOperator hs(random_hermitian(2, rng));
            const HermitianOperator ho(random_hermitian(2, rng));
            const HermitianOperator a(random_hermitian(2, rng));
            const DensityMatrix rho = random_density(2, rng);
            const StateVector psi = random_pure(2, rng);
            const double tau = 0.3 + 1.4 * rng.next_double();
            const auto joint = JointSystemConfig::noninteracting(hs, ho);
            const LimitCheck check = limit_consistency_check(joint, a, rho, psi, tau, 48);
            max_disc = std::max(max_disc, check.max_discrepancy);
        }
        rec.upper("pw-limit-agreement", max_disc, kPwLimitTol, params,
                  "conditioned, dressed, and direct readouts agree without interaction");
    }

    if (rec.wants("dephasing-decay-law")) {
        const double lambda = 1.0, tau = 1.0;
        const std::int64_t n = 2000;
        const Json params{{"lambda", lambda}, {"tau", tau}, {"slices", 100}, {"n", n},
                          {"seed", 71}};
        const HermitianOperator sz(pauli_z());
        const auto decomp = spectral_decompose(sz);
        const auto spec = EnsembleSpec::dephasing(
            HermitianOperator(Matrix::Zero(2, 2)), decomp, lambda);
        const DensityMatrix rho0 = pure_density(plus_state(2));
        const auto summary = ensemble_average_state(rho0, spec, TimeGrid(tau, 100), n, 71,
                                                    ChannelOrdering::TimeOrdered, workers);
        const double measured = detail::offblock_max(summary.mean, decomp);
        const double expected = 0.5 * std::exp(-lambda * lambda * tau);
        rec.upper("dephasing-decay-law", std::abs(measured - expected),
                  5.0 * summary.monte_carlo_error, params,
                  "coherence tracks the gaussian characteristic function");
    }

    if (rec.wants("diagonal-invariance")) {
        const Json params{{"dim", 4}, {"lambda", 0.8}, {"tau", 0.7}, {"slices", 50},
                          {"n", 400}, {"seed", 72}};
        const HermitianOperator obs = diagonal_operator({0.5, 1.5, 2.5, 3.5});
        const auto decomp = spectral_decompose(obs);
        const auto spec = EnsembleSpec::dephasing(
            HermitianOperator(Matrix::Zero(4, 4)), decomp, 0.8);
        const DensityMatrix rho0 = pure_density(plus_state(4));
        const auto summary = ensemble_average_state(rho0, spec, TimeGrid(0.7, 50), 400, 72,
                                                    ChannelOrdering::TimeOrdered, workers);
        const auto metrics = decoherence_metrics(summary_state(summary), rho0, decomp);
        rec.upper("diagonal-invariance", metrics.diagonal_drift, 1e-12, params,
                  "pointer weights survive the ensemble average exactly");
    }

    if (rec.wants("eigenstate-stability")) {
        const Json params{{"lambda", 1.0}, {"tau", 1.0}, {"slices", 60}, {"n", 200},
                          {"seed", 73}};
        const HermitianOperator sz(pauli_z());
        const auto decomp = spectral_decompose(sz);
        const auto spec = EnsembleSpec::dephasing(
            HermitianOperator(Matrix::Zero(2, 2)), decomp, 1.0);
        const auto rep = stability_test(basis_state(2, 0), sz, spec, TimeGrid(1.0, 60), 200,
                                        73, kStabilityThreshold,
                                        ChannelOrdering::TimeOrdered, workers);
        rec.upper("eigenstate-stability", rep.variance, kStabilityThreshold, params,
                  "an eigenstate's readout does not scatter across trajectories");
    }

    if (rec.wants("superposition-dispersion")) {
        const Json params{{"lambda", 1.0}, {"tau", 1.0}, {"slices", 60}, {"n", 200},
                          {"seed", 74}};
        const HermitianOperator sz(pauli_z());
        const auto decomp = spectral_decompose(sz);
        const auto spec = EnsembleSpec::dephasing(
            HermitianOperator(Matrix::Zero(2, 2)), decomp, 1.0);
        const auto rep = stability_test(plus_state(2), sz, spec, TimeGrid(1.0, 60), 200, 74,
                                        kStabilityThreshold, ChannelOrdering::TimeOrdered,
                                        workers);
        rec.lower("superposition-dispersion", rep.variance, 1e-6, params,
                  "a superposition's readout scatters across trajectories");
    }

    if (rec.wants("ordering-commuting-agreement")) {
        const Json params{{"slices", 8}, {"tau", 0.9}};
        const auto spec = EnsembleSpec::zero_noise(diagonal_operator({0.2, 1.1, 2.7}));
        const auto traj = sample_trajectory(spec, TimeGrid(0.9, 8), 0, 0);
        const Matrix a = channel_from_trajectory(traj, ChannelOrdering::TimeOrdered)
                             .unitary.matrix();
        const Matrix b = channel_from_trajectory(traj, ChannelOrdering::NaiveSum)
                             .unitary.matrix();
        rec.upper("ordering-commuting-agreement", max_abs(a - b), 1e-12, params,
                  "orderings coincide when every slice commutes");
    }

    if (rec.wants("ordering-sensitivity")) {
        const Json params{{"slices", 2}, {"tau", 1.0}};
        // two non-commuting slices: sigma_x then sigma_z
        HamiltonianTrajectory traj{TimeGrid(1.0, 2), {}, 0, 0};
        traj.slices.emplace_back(pauli_x());
        traj.slices.emplace_back(pauli_z());
        const ChannelOrdering first = fault == VerifyFault::NaiveOrdering
                                          ? ChannelOrdering::NaiveSum
                                          : ChannelOrdering::TimeOrdered;
        const Matrix a = channel_from_trajectory(traj, first).unitary.matrix();
        const Matrix b = channel_from_trajectory(traj, ChannelOrdering::NaiveSum)
                             .unitary.matrix();
        rec.lower("ordering-sensitivity", max_abs(a - b), 1e-3, params,
                  "orderings must differ on non-commuting slices");
    }

    if (rec.wants("worker-determinism")) {
        const Json params{{"lambda", 1.0}, {"tau", 0.5}, {"slices", 25}, {"n", 192},
                          {"seed", 75}};
        const HermitianOperator sz(pauli_z());
        const auto decomp = spectral_decompose(sz);
        const auto spec = EnsembleSpec::dephasing(
            HermitianOperator(Matrix::Zero(2, 2)), decomp, 1.0);
        const DensityMatrix rho0 = pure_density(plus_state(2));
        const auto one = ensemble_average_state(rho0, spec, TimeGrid(0.5, 25), 192, 75,
                                                ChannelOrdering::TimeOrdered, 1);
        const auto four = ensemble_average_state(rho0, spec, TimeGrid(0.5, 25), 192, 75,
                                                 ChannelOrdering::TimeOrdered, 4);
        const double diff = std::max(max_abs(one.mean - four.mean),
                                     (one.entry_variance - four.entry_variance)
                                         .cwiseAbs()
                                         .maxCoeff());
        rec.upper("worker-determinism", diff, 0.0, params,
                  "results are bitwise identical for 1 and 4 workers");
    }

    if (rec.wants("envariance-exactness")) {
        const Json params{{"multiplicities", {1, 3}}};
        const EnvarianceState state = build_coarse_state({1, 3}, EnvarianceDims{2, 4, 4});
        const auto probs = coarse_probabilities(state);
        const bool exact = probs.size() == 2 && probs[0] == Rational(1, 4) &&
                           probs[1] == Rational(3, 4) &&
                           fine_outcome_probability(state) == Rational(1, 4);
        rec.upper("envariance-exactness", exact ? 0.0 : 1.0, 0.0, params,
                  "coarse weights come out as exact rationals");
    }

    if (rec.wants("gue-coherence-decay")) {
        // E[K A K^dag] is exactly diagonal for diagonal A (conjugating every
        // perturbation by a diagonal unitary preserves the ensemble), so the
        // finite-N off-diagonal residue must shrink like 1/sqrt(N).
        const Json params{{"lambda", 0.6}, {"tau", 1.0}, {"slices", 8},
                          {"n", {150, 12000}}, {"seed", 76}};
        const HermitianOperator sz(pauli_z());
        const auto decomp = spectral_decompose(sz);
        const auto spec = EnsembleSpec::gue_perturbed(
            HermitianOperator(Matrix::Zero(2, 2)), 0.6);
        const auto small = ensemble_average_operator(sz, spec, TimeGrid(1.0, 8), 150, 76,
                                                     ChannelOrdering::TimeOrdered, workers);
        const auto large = ensemble_average_operator(sz, spec, TimeGrid(1.0, 8), 12000, 76,
                                                     ChannelOrdering::TimeOrdered, workers);
        const double ratio = detail::offblock_max(large.mean, decomp) /
                             detail::offblock_max(small.mean, decomp);
        rec.upper("gue-coherence-decay", ratio, 0.5, params,
                  "mean-operator coherence residue shrinks as the ensemble grows");
    }

    return report;
}

} // namespace smilab
