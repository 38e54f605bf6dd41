// Acceptance harness: every criterion prints exactly one [PASS]/[FAIL] line.
// Tolerances and time budgets are pinned here, next to the criterion they
// govern. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "smilab/smilab.hpp"

using namespace smilab;

namespace {

int g_failures = 0;

template <typename Fn>
void criterion(int index, const char* name, double budget_seconds, Fn&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > budget_seconds) {
        ok = false;
        detail += "; over budget " + std::to_string(budget_seconds) + "s";
    }
    std::printf("[%s] criterion %d: %-34s %s  [%.2fs]\n", ok ? "PASS" : "FAIL", index, name,
                detail.c_str(), elapsed);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

EnsembleSpec sigma_z_dephasing(double lambda) {
    return EnsembleSpec::dephasing(HermitianOperator(Matrix::Zero(2, 2)),
                                   spectral_decompose(HermitianOperator(pauli_z())), lambda);
}

// least-squares slope of log(y) against log(x)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

int main() {
    // 1. Conditioned, channel-dressed, and Heisenberg readouts coincide
    //    without interaction: 100 random 2x2 (x) 2x2 instances, <= 1e-10.
    criterion(1, "limit agreement across routes", 5.0, [](std::string& detail) {
        constexpr double kTol = 1e-10;
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            RandomStream rng(9001, static_cast<std::uint64_t>(i), 0);
            const HermitianOperator hs(random_hermitian(2, rng));
            const HermitianOperator ho(random_hermitian(2, rng));
            const HermitianOperator a(random_hermitian(2, rng));
            const DensityMatrix rho = random_density(2, rng);
            const StateVector psi = random_pure(2, rng);
            const double tau = 0.3 + 1.4 * rng.next_double();
            const auto joint = JointSystemConfig::noninteracting(hs, ho);
            worst = std::max(worst,
                             limit_consistency_check(joint, a, rho, psi, tau, 64)
                                 .max_discrepancy);
        }
        detail = "max discrepancy " + fmt(worst) + " <= " + fmt(kTol);
        return worst <= kTol;
    });

    // 2. Ensemble averaging dephases |+><+| along 0.5 e^{-lambda^2 tau} at
    //    lambda^2 tau in {0.5, 1, 2}, N = 1e4, 200 slices, within 3 Monte
    //    Carlo standard errors at every point.
    criterion(2, "dephasing decay law", 60.0, [](std::string& detail) {
        const auto spec = sigma_z_dephasing(1.0);
        const DensityMatrix rho0 = pure_density(plus_state(2));
        constexpr std::int64_t kN = 10000;
        double worst_pull = 0.0;
        for (const double tau : {0.5, 1.0, 2.0}) {
            const auto summary = ensemble_average_state(rho0, spec, TimeGrid(tau, 200),
                                                        kN, 42);
            const double measured = std::abs(summary.mean(0, 1));
            const double analytic = 0.5 * std::exp(-tau);
            const double se =
                std::sqrt(summary.entry_variance(0, 1) / static_cast<double>(kN));
            worst_pull = std::max(worst_pull, std::abs(measured - analytic) / se);
        }
        detail = "worst |measured-analytic| = " + fmt(worst_pull) + " SE (<= 3)";
        return worst_pull <= 3.0;
    });

    // 3. The pointer weights never move: diagonal drift <= 1e-12 in the
    //    measurement eigenbasis for dims 2..8, degenerate spectra included.
    criterion(3, "diagonal preservation", 10.0, [](std::string& detail) {
        constexpr double kTol = 1e-12;
        double worst = 0.0;
        const std::vector<std::vector<double>> spectra = {
            {1.0, -1.0},
            {0.3, 1.1, 2.9},
            {0.5, 0.5, 1.5, 2.5},  // degenerate block
            {0.1, 0.9, 1.7, 2.5, 3.3, 4.1, 4.9, 5.7}};
        for (std::size_t s = 0; s < spectra.size(); ++s) {
            const int dim = static_cast<int>(spectra[s].size());
            const HermitianOperator obs = diagonal_operator(spectra[s]);
            const auto decomp = spectral_decompose(obs);
            const auto spec = EnsembleSpec::dephasing(
                HermitianOperator(Matrix::Zero(dim, dim)), decomp, 0.8);
            const DensityMatrix rho0 = pure_density(plus_state(dim));
            const auto summary = ensemble_average_state(rho0, spec, TimeGrid(0.7, 50), 500,
                                                        static_cast<std::uint64_t>(s) + 300);
            const auto metrics = decoherence_metrics(summary_state(summary), rho0, decomp);
            worst = std::max(worst, metrics.diagonal_drift);
        }
        detail = "max diagonal drift " + fmt(worst) + " <= " + fmt(kTol);
        return worst <= kTol;
    });

    // 4. Stability trichotomy: eigenstates under commuting ensembles do not
    //    scatter (<= 1e-20, gue at lambda = 0 included); a superposition
    //    disperses (> 1e-6 at lambda^2 tau = 1); dispersion never shrinks
    //    as lambda^2 tau grows over a fixed seeded trajectory set.
    criterion(4, "stability trichotomy", 30.0, [](std::string& detail) {
        constexpr double kStableTol = 1e-20;
        constexpr double kDisperseFloor = 1e-6;
        const HermitianOperator sz(pauli_z());

        const std::vector<EnsembleSpec> commuting = {
            sigma_z_dephasing(1.0),
            EnsembleSpec::zero_noise(sz),
            EnsembleSpec::gue_perturbed(HermitianOperator(Matrix::Zero(2, 2)), 0.0),
        };
        double worst_stable = 0.0;
        for (std::size_t s = 0; s < commuting.size(); ++s) {
            for (const int eigenstate : {0, 1}) {
                const auto rep =
                    stability_test(basis_state(2, eigenstate), sz, commuting[s],
                                   TimeGrid(1.0, 50), 10000, 501 + s);
                worst_stable = std::max(worst_stable, rep.variance);
            }
        }

        std::vector<double> dispersion;
        for (const double tau : {0.5, 1.0, 2.0}) {
            const auto rep = stability_test(plus_state(2), sz, sigma_z_dephasing(1.0),
                                            TimeGrid(tau, 50), 40000, 504);
            dispersion.push_back(rep.variance);
        }
        const bool monotone = dispersion[0] <= dispersion[1] && dispersion[1] <= dispersion[2];
        const bool ok = worst_stable <= kStableTol && dispersion[1] > kDisperseFloor &&
                        monotone;
        detail = "stable " + fmt(worst_stable) + " <= " + fmt(kStableTol) + "; dispersion " +
                 fmt(dispersion[0]) + " <= " + fmt(dispersion[1]) + " <= " +
                 fmt(dispersion[2]);
        return ok;
    });

    // 5. The reference construction is exact arithmetic: uniform fine law
    //    1/M up to M = 64, exact coarse weights, and swap absorption matches
    //    the combinatorial count for every permutation up to M = 6.
    criterion(5, "envariance exactness", 5.0, [](std::string& detail) {
        for (long long m = 1; m <= 64; ++m) {
            const auto state = build_equal_state(
                m, EnvarianceDims{static_cast<int>(m), static_cast<int>(m),
                                  static_cast<int>(m)});
            if (fine_outcome_probability(state) != Rational(1, m)) {
                detail = "fine law broke at M = " + std::to_string(m);
                return false;
            }
        }

        const auto quarters = fine_grain({0.25, 0.75}, 64);
        const auto coarse = build_coarse_state(quarters.numerators, EnvarianceDims{2, 4, 4});
        const auto probs = coarse_probabilities(coarse);
        if (quarters.denominator != 4 || probs[0] != Rational(1, 4) ||
            probs[1] != Rational(3, 4)) {
            detail = "coarse weights for {1/4, 3/4} not exact";
            return false;
        }

        // equal states absorb every fine-index permutation: brute force M <= 6
        for (long long m = 2; m <= 6; ++m) {
            const auto state = build_equal_state(
                m, EnvarianceDims{static_cast<int>(m), static_cast<int>(m),
                                  static_cast<int>(m)});
            std::vector<long long> perm(m);
            std::iota(perm.begin(), perm.end(), 0ll);
            do {
                if (!envariance_swap_check(state, perm)) {
                    detail = "unabsorbed swap on the equal state, M = " +
                             std::to_string(m);
                    return false;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }

        // absorbed permutations = (relabelings of equal-size cells) x
        // (products of within-cell rearrangements)
        const std::vector<std::pair<std::vector<long long>, long long>> cases = {
            {{1, 1, 1}, 6},   // fully equal: every permutation absorbed
            {{1, 2}, 2},      // distinct sizes: identity relabeling only
            {{2, 2}, 8},      // 2! relabelings x (2!)^2 internal
            {{1, 1, 2}, 4},   // 2! x 2!
        };
        for (const auto& [mult, expected] : cases) {
            const long long m =
                std::accumulate(mult.begin(), mult.end(), 0ll);
            const auto state = build_coarse_state(
                mult, EnvarianceDims{static_cast<int>(mult.size()), static_cast<int>(m),
                                     static_cast<int>(m)});
            std::vector<long long> perm(m);
            std::iota(perm.begin(), perm.end(), 0ll);
            long long absorbed = 0;
            do {
                absorbed += envariance_swap_check(state, perm) ? 1 : 0;
            } while (std::next_permutation(perm.begin(), perm.end()));
            if (absorbed != expected) {
                detail = "swap count " + std::to_string(absorbed) + " != " +
                         std::to_string(expected);
                return false;
            }
        }
        detail = "1/M law, exact coarse weights, swap counts match";
        return true;
    });

    // 6. Random-matrix dressing: the mean dressed operator's coherence
    //    residue falls monotonically over N in {1e2, 1e3, 1e4} at
    //    lambda tau = 0.5, and the Born deviation of the mean state scales
    //    as lambda^2 (log-log slope 2 +- 0.3 across two decades).
    criterion(6, "gue convergence and born slope", 120.0, [](std::string& detail) {
        const HermitianOperator obs = diagonal_operator({-1.5, -0.5, 0.5, 1.5});
        const auto decomp = spectral_decompose(obs);
        const auto spec =
            EnsembleSpec::gue_perturbed(HermitianOperator(Matrix::Zero(4, 4)), 0.5);

        std::vector<double> residue;
        for (const std::int64_t n : {100, 1000, 10000}) {
            const auto summary =
                ensemble_average_operator(obs, spec, TimeGrid(1.0, 8), n, 101);
            residue.push_back(reduced_operator_check(summary.mean, decomp)
                                  .offdiagonal_block_norm);
        }
        const bool monotone = residue[0] > residue[1] && residue[1] > residue[2];

        // A state with non-uniform weights: uniform weights sit at the
        // random-matrix fixed point and the quadratic response cancels.
        Vector amps = Vector::Zero(4);
        amps(0) = std::sqrt(0.7);
        amps(1) = std::sqrt(0.3);
        const DensityMatrix rho0 = pure_density(StateVector(amps));
        const std::vector<double> lambdas = {0.01, 0.0316, 0.1, 0.316, 1.0};
        std::vector<double> deviations;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            const double l = lambdas[i];
            const auto lspec =
                EnsembleSpec::gue_perturbed(HermitianOperator(Matrix::Zero(4, 4)), l);
            const std::int64_t n = std::clamp<std::int64_t>(
                static_cast<std::int64_t>(220.0 / (l * l)), 20000, 2200000);
            const auto summary = ensemble_average_state(rho0, lspec, TimeGrid(0.5, 1), n,
                                                        derive_seed(202, i));
            deviations.push_back(
                decoherence_metrics(summary_state(summary), rho0, decomp).born_deviation);
        }
        const double slope = loglog_slope(lambdas, deviations);
        const bool slope_ok = slope >= 1.7 && slope <= 2.3;

        detail = "residue " + fmt(residue[0]) + " > " + fmt(residue[1]) + " > " +
                 fmt(residue[2]) + "; slope " + fmt(slope);
        return monotone && slope_ok;
    });

    // 7. Ordering semantics: time-ordered and naive-sum channels agree to
    //    1e-12 on commuting slices and differ by more than 1e-3 on a
    //    two-slice non-commuting trajectory.
    criterion(7, "channel ordering semantics", 1.0, [](std::string& detail) {
        const auto commuting = EnsembleSpec::zero_noise(diagonal_operator({0.2, 1.1, 2.7}));
        const auto traj = sample_trajectory(commuting, TimeGrid(0.9, 8), 0, 0);
        const double agree =
            max_abs(channel_from_trajectory(traj, ChannelOrdering::TimeOrdered)
                        .unitary.matrix() -
                    channel_from_trajectory(traj, ChannelOrdering::NaiveSum)
                        .unitary.matrix());

        HamiltonianTrajectory mixed{TimeGrid(1.0, 2), {}, 0, 0};
        mixed.slices.emplace_back(pauli_x());
        mixed.slices.emplace_back(pauli_z());
        const double differ =
            max_abs(channel_from_trajectory(mixed, ChannelOrdering::TimeOrdered)
                        .unitary.matrix() -
                    channel_from_trajectory(mixed, ChannelOrdering::NaiveSum)
                        .unitary.matrix());

        detail = "commuting gap " + fmt(agree) + " <= 1e-12; non-commuting gap " +
                 fmt(differ) + " > 1e-3";
        return agree <= 1e-12 && differ > 1e-3;
    });

    // 8. Determinism: a decay-curve run yields byte-identical payloads for
    //    1, 2, 4, and 8 workers.
    criterion(8, "worker-count determinism", 30.0, [](std::string& detail) {
        const ExperimentConfig cfg = parse_config_text(R"({
            "kind": "decay-curve",
            "master_seed": 77,
            "ensemble": {"kind": "dephasing", "lambda": 1.0},
            "grid": {"tau": [0.5, 1.0], "slices": 100},
            "n_trajectories": 1000,
            "state": "plus",
            "observable": "sigma_z"
        })");
        const std::string reference = run_experiment(cfg, 1).payload.dump();
        for (const int workers : {2, 4, 8}) {
            if (run_experiment(cfg, workers).payload.dump() != reference) {
                detail = "payload diverged at " + std::to_string(workers) + " workers";
                return false;
            }
        }
        detail = "payloads byte-identical for 1/2/4/8 workers";
        return true;
    });

    std::printf("%d/8 criteria passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
