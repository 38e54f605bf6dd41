#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "smilab/quantum.hpp"
#include "smilab/rng.hpp"

namespace smilab {

struct TimeGrid {
    double tau;
    int slices;

    TimeGrid(double tau_, int slices_) : tau(tau_), slices(slices_) {
        if (!(tau > 0.0)) throw PreconditionError("time grid: tau > 0 required");
        if (slices < 1) throw PreconditionError("time grid: slices >= 1 required");
    }

    double dt() const { return tau / slices; }
};

enum class EnsembleKind { ZeroNoise, Dephasing, GuePerturbed };

// Distribution over Hamiltonian trajectories. The dephasing kind adds iid
// projector-weighted noise xi_i ~ N(0, lambda^2/dt) per slice, so the
// accumulated phase variance lambda^2 * tau is independent of the grid. The
// gue kind adds lambda * V_m with V_m a fresh GUE draw per slice.
class EnsembleSpec {
public:
    static EnsembleSpec zero_noise(HermitianOperator base) {
        return EnsembleSpec(EnsembleKind::ZeroNoise, std::move(base), 0.0, std::nullopt);
    }

    static EnsembleSpec dephasing(HermitianOperator base, SpectralDecomposition basis,
                                  double lambda) {
        if (basis.dim != base.dim())
            throw DimensionError("dephasing ensemble: base and basis dims differ");
        const double scale = std::max(1.0, max_abs(base.matrix()));
        for (const Matrix& p : basis.projectors) {
            const double comm = max_abs(base.matrix() * p - p * base.matrix());
            if (comm > kHermitianTol * scale)
                throw PreconditionError(
                    "dephasing ensemble: base must commute with the dephasing projectors "
                    "(max commutator " + fmt_double(comm) + ")");
        }
        return EnsembleSpec(EnsembleKind::Dephasing, std::move(base), lambda, std::move(basis));
    }

    static EnsembleSpec gue_perturbed(HermitianOperator base, double lambda) {
        return EnsembleSpec(EnsembleKind::GuePerturbed, std::move(base), lambda, std::nullopt);
    }

    EnsembleKind kind() const { return kind_; }
    const HermitianOperator& base() const { return base_; }
    double lambda() const { return lambda_; }
    int dim() const { return base_.dim(); }

    // present for the dephasing kind only
    const SpectralDecomposition& basis() const {
        if (!basis_) throw PreconditionError("ensemble spec: no dephasing basis present");
        return *basis_;
    }
    bool has_basis() const { return basis_.has_value(); }

private:
    EnsembleSpec(EnsembleKind kind, HermitianOperator base, double lambda,
                 std::optional<SpectralDecomposition> basis)
        : kind_(kind), base_(std::move(base)), lambda_(lambda), basis_(std::move(basis)) {
        if (lambda_ < 0.0)
            throw PreconditionError("ensemble spec: lambda >= 0 required");
    }

    EnsembleKind kind_;
    HermitianOperator base_;
    double lambda_;
    std::optional<SpectralDecomposition> basis_;
};

struct HamiltonianTrajectory {
    TimeGrid grid;
    std::vector<HermitianOperator> slices;
    std::uint64_t master_seed = 0;
    std::uint64_t index = 0;
};

// Draws are keyed by (master_seed, trajectory, slice), so trajectory l is the
// same no matter which worker samples it.
inline HamiltonianTrajectory sample_trajectory(const EnsembleSpec& spec, const TimeGrid& grid,
                                               std::uint64_t master_seed, std::uint64_t index) {
    HamiltonianTrajectory traj{grid, {}, master_seed, index};
    traj.slices.reserve(grid.slices);
    const int d = spec.dim();
    switch (spec.kind()) {
        case EnsembleKind::ZeroNoise:
            for (int m = 0; m < grid.slices; ++m) traj.slices.push_back(spec.base());
            break;
        case EnsembleKind::Dephasing: {
            const double sd = spec.lambda() / std::sqrt(grid.dt());
            const auto& projectors = spec.basis().projectors;
            for (int m = 0; m < grid.slices; ++m) {
                RandomStream rng(master_seed, index, static_cast<std::uint64_t>(m));
                Matrix slice = spec.base().matrix();
                for (const Matrix& p : projectors)
                    slice += (sd * rng.next_gaussian()) * p;
                traj.slices.emplace_back(std::move(slice),
                                         kHermitianTol * std::max(1.0, sd));
            }
            break;
        }
        case EnsembleKind::GuePerturbed:
            for (int m = 0; m < grid.slices; ++m) {
                RandomStream rng(master_seed, index, static_cast<std::uint64_t>(m));
                Matrix slice = spec.base().matrix() + spec.lambda() * sample_gue(d, rng);
                traj.slices.emplace_back(std::move(slice));
            }
            break;
    }
    return traj;
}

enum class ChannelOrdering { TimeOrdered, NaiveSum };

struct ChannelOperator {
    UnitaryOperator unitary;
    ChannelOrdering ordering;
    int slices;
};

// Time-ordered: K = exp(i H(t_M) dt) ... exp(i H(t_1) dt), later slices on
// the left. Naive sum: K = exp(i (sum_m H(t_m)) dt). The two agree only when
// all slices commute.
inline ChannelOperator channel_from_trajectory(const HamiltonianTrajectory& traj,
                                               ChannelOrdering ordering) {
    const int m_slices = static_cast<int>(traj.slices.size());
    if (m_slices < 1) throw PreconditionError("channel: trajectory has no slices");
    const double dt = traj.grid.dt();
    const double tol = kUnitaryTol * std::sqrt(static_cast<double>(m_slices));
    Matrix k;
    if (ordering == ChannelOrdering::TimeOrdered) {
        k = Matrix::Identity(traj.slices[0].dim(), traj.slices[0].dim());
        for (const HermitianOperator& h : traj.slices)
            k = matrix_exponential(h, dt).matrix() * k;
    } else {
        Matrix sum = traj.slices[0].matrix();
        for (int m = 1; m < m_slices; ++m) sum += traj.slices[m].matrix();
        k = matrix_exponential(HermitianOperator(std::move(sum)), dt).matrix();
    }
    return ChannelOperator{UnitaryOperator(std::move(k), tol), ordering, m_slices};
}

// A_d = K A K^dag: the observable carries the trajectory's integrated phase.
inline HermitianOperator dress_operator(const HermitianOperator& a, const ChannelOperator& k) {
    if (a.dim() != k.unitary.dim())
        throw DimensionError("dress operator: operator and channel dims differ");
    const Matrix& u = k.unitary.matrix();
    Matrix dressed = u * a.matrix() * u.adjoint();
    return HermitianOperator(std::move(dressed),
                             kHermitianTol * std::max(1.0, max_abs(a.matrix())));
}

// rho_d = K^dag rho K: the state picture adjoint to dress_operator, so that
// tr[dress_operator(A,K) rho] = tr[A dress_state(rho,K)].
inline DensityMatrix dress_state(const DensityMatrix& rho, const ChannelOperator& k) {
    if (rho.dim() != k.unitary.dim())
        throw DimensionError("dress state: state and channel dims differ");
    const Matrix& u = k.unitary.matrix();
    Matrix dressed = u.adjoint() * rho.matrix() * u;
    return DensityMatrix(std::move(dressed));
}

} // namespace smilab
