#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "smilab/ensemble.hpp"

namespace smilab {

inline constexpr double kStabilityThreshold = 1e-16;
inline constexpr double kPhaseGate = 0.99;

// Per-trajectory readout through the adiabatic-return projector:
//   e_l = <psi| K_l A |psi> <psi| K_l^dag |psi>.
// For an eigenstate under a commuting ensemble K_l|psi> = e^{i phi_l}|psi>,
// so e_l equals the eigenvalue for every trajectory and the spread vanishes;
// a superposition scatters into branches and e_l disperses.
struct StabilityReport {
    std::vector<Complex> expectations;
    Complex mean{0.0, 0.0};
    double variance = 0.0;
    // arg <psi|K_l|psi> where the return amplitude modulus exceeds kPhaseGate,
    // NaN elsewhere
    std::vector<double> phase_estimates;
    std::vector<double> return_amplitudes;
    bool is_stable = false;
    double threshold = kStabilityThreshold;
    std::int64_t n_trajectories = 0;
};

inline StabilityReport stability_test(const StateVector& psi, const HermitianOperator& a,
                                      const EnsembleSpec& spec, const TimeGrid& grid,
                                      std::int64_t n, std::uint64_t master_seed,
                                      double threshold = kStabilityThreshold,
                                      ChannelOrdering ordering = ChannelOrdering::TimeOrdered,
                                      int workers = 0) {
    if (psi.dim() != spec.dim() || a.dim() != spec.dim())
        throw DimensionError("stability test: state, operator, and ensemble dims differ");
    if (n < 2) throw PreconditionError("stability test: n_trajectories >= 2 required");

    StabilityReport report;
    report.threshold = threshold;
    report.n_trajectories = n;
    report.expectations.resize(n);
    report.phase_estimates.resize(n);
    report.return_amplitudes.resize(n);

    const Vector& v = psi.vector();
    const Vector av = a.matrix() * v;
    parallel_for_trajectories(n, resolve_worker_count(workers), [&](std::int64_t l, std::int64_t) {
        const auto traj = sample_trajectory(spec, grid, master_seed, l);
        const ChannelOperator channel = channel_from_trajectory(traj, ordering);
        const Matrix& k = channel.unitary.matrix();
        const Complex r = v.dot(k * v);        // <psi|K|psi>
        const Complex ka = v.dot(k * av);      // <psi|K A|psi>
        report.expectations[l] = ka * std::conj(r);
        report.return_amplitudes[l] = std::abs(r);
        report.phase_estimates[l] = std::abs(r) > kPhaseGate
                                        ? std::arg(r)
                                        : std::numeric_limits<double>::quiet_NaN();
    });

    Complex sum{0.0, 0.0};
    for (const Complex& e : report.expectations) sum += e;
    report.mean = sum / static_cast<double>(n);
    double m2 = 0.0;
    for (const Complex& e : report.expectations) m2 += std::norm(e - report.mean);
    report.variance = m2 / static_cast<double>(n - 1);
    report.is_stable = report.variance <= threshold;
    return report;
}

// All basis-dependent entries are read in the eigenbasis of the supplied
// decomposition; born_deviation compares against the reference state rho0.
struct DecoherenceMetrics {
    double offdiagonal_norm = 0.0;  // max |entry|, r != c
    double purity = 0.0;
    double born_deviation = 0.0;
    double diagonal_drift = 0.0;
};

inline DecoherenceMetrics decoherence_metrics(const DensityMatrix& rho,
                                              const DensityMatrix& rho0,
                                              const SpectralDecomposition& decomp) {
    if (rho.dim() != decomp.dim || rho0.dim() != decomp.dim)
        throw DimensionError("decoherence metrics: state and decomposition dims differ");
    const Matrix t = decomp.basis.adjoint() * rho.matrix() * decomp.basis;
    const Matrix t0 = decomp.basis.adjoint() * rho0.matrix() * decomp.basis;

    DecoherenceMetrics out;
    for (int r = 0; r < decomp.dim; ++r)
        for (int c = 0; c < decomp.dim; ++c) {
            if (r != c) out.offdiagonal_norm = std::max(out.offdiagonal_norm, std::abs(t(r, c)));
        }
    out.purity = (rho.matrix() * rho.matrix()).trace().real();
    const auto p = born_distribution(rho, decomp);
    const auto p0 = born_distribution(rho0, decomp);
    for (std::size_t i = 0; i < p.size(); ++i)
        out.born_deviation = std::max(out.born_deviation, std::abs(p[i] - p0[i]));
    for (int r = 0; r < decomp.dim; ++r)
        out.diagonal_drift =
            std::max(out.diagonal_drift, std::abs(t(r, r).real() - t0(r, r).real()));
    return out;
}

// How close a mean dressed operator sits to a function of the original
// observable: entries between distinct eigenblocks should vanish, entries
// within a block should match the block eigenvalue on the diagonal.
struct ReducedOperatorCheck {
    double offdiagonal_block_norm = 0.0;
    double eigenvalue_drift = 0.0;
};

inline ReducedOperatorCheck reduced_operator_check(const Matrix& mean_operator,
                                                   const SpectralDecomposition& decomp) {
    if (mean_operator.rows() != decomp.dim || mean_operator.cols() != decomp.dim)
        throw DimensionError("reduced operator check: operator and decomposition dims differ");
    const Matrix t = decomp.basis.adjoint() * mean_operator * decomp.basis;
    ReducedOperatorCheck out;
    for (int r = 0; r < decomp.dim; ++r)
        for (int c = 0; c < decomp.dim; ++c) {
            if (decomp.block_of_column[r] != decomp.block_of_column[c]) {
                out.offdiagonal_block_norm =
                    std::max(out.offdiagonal_block_norm, std::abs(t(r, c)));
            } else {
                const Complex target =
                    r == c ? Complex(decomp.eigenvalues[decomp.block_of_column[r]], 0.0)
                           : Complex(0.0, 0.0);
                out.eigenvalue_drift = std::max(out.eigenvalue_drift, std::abs(t(r, c) - target));
            }
        }
    return out;
}

// Coherence decay against tau. measured[k] is the largest between-block entry
// of the mean dressed state in the readout basis; for the dephasing kind the
// analytic column carries the e^{-lambda^2 tau} law from the Gaussian
// characteristic function. slices_per_unit_time keeps the per-slice noise
// variance lambda^2/dt consistent across the tau axis.
struct DecayCurve {
    std::vector<double> taus;
    std::vector<double> measured;
    std::vector<double> analytic;  // empty unless the ensemble kind admits one
    std::vector<double> mc_errors;
    std::vector<int> slices;
    std::int64_t n_trajectories = 0;
};

namespace detail {

inline double offblock_max(const Matrix& m, const SpectralDecomposition& decomp) {
    const Matrix t = decomp.basis.adjoint() * m * decomp.basis;
    double out = 0.0;
    for (int r = 0; r < decomp.dim; ++r)
        for (int c = 0; c < decomp.dim; ++c)
            if (decomp.block_of_column[r] != decomp.block_of_column[c])
                out = std::max(out, std::abs(t(r, c)));
    return out;
}

} // namespace detail

inline DecayCurve decay_curve(const DensityMatrix& rho0, const EnsembleSpec& spec,
                              const SpectralDecomposition& readout,
                              const std::vector<double>& taus, int slices_per_unit_time,
                              std::int64_t n, std::uint64_t master_seed, int workers = 0) {
    if (rho0.dim() != spec.dim() || readout.dim != spec.dim())
        throw DimensionError("decay curve: state, readout, and ensemble dims differ");
    if (taus.empty()) throw PreconditionError("decay curve: at least one tau required");
    for (std::size_t k = 0; k < taus.size(); ++k) {
        if (!(taus[k] > 0.0)) throw PreconditionError("decay curve: taus must be positive");
        if (k > 0 && taus[k] <= taus[k - 1])
            throw PreconditionError("decay curve: taus must be strictly ascending");
    }
    if (slices_per_unit_time < 1)
        throw PreconditionError("decay curve: slices_per_unit_time >= 1 required");

    DecayCurve curve;
    curve.taus = taus;
    curve.n_trajectories = n;
    const bool analytic = spec.kind() == EnsembleKind::Dephasing;
    const double base_coherence = detail::offblock_max(rho0.matrix(), readout);

    for (std::size_t k = 0; k < taus.size(); ++k) {
        const int m_slices =
            std::max(1, static_cast<int>(std::lround(taus[k] * slices_per_unit_time)));
        const TimeGrid grid(taus[k], m_slices);
        const auto summary = ensemble_average_state(rho0, spec, grid, n,
                                                    derive_seed(master_seed, k),
                                                    ChannelOrdering::TimeOrdered, workers);
        curve.slices.push_back(m_slices);
        curve.measured.push_back(detail::offblock_max(summary.mean, readout));
        curve.mc_errors.push_back(summary.monte_carlo_error);
        if (analytic)
            curve.analytic.push_back(base_coherence *
                                     std::exp(-spec.lambda() * spec.lambda() * taus[k]));
    }
    return curve;
}

} // namespace smilab
