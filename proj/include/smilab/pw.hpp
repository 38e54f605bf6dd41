#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "smilab/smi.hpp"

namespace smilab {

inline constexpr double kConditioningTol = 1e-12;

// Bipartite system (x) observer with H = H_s (x) I + I (x) H_o + H_int.
// Tensor index order is system-major throughout.
class JointSystemConfig {
public:
    JointSystemConfig(HermitianOperator h_system, HermitianOperator h_observer,
                      Matrix h_interaction)
        : h_system_(std::move(h_system)), h_observer_(std::move(h_observer)),
          h_interaction_(std::move(h_interaction)) {
        const Eigen::Index joint =
            static_cast<Eigen::Index>(h_system_.dim()) * h_observer_.dim();
        if (h_interaction_.rows() != joint || h_interaction_.cols() != joint)
            throw DimensionError("joint config: interaction must act on the joint space");
        if (max_abs(h_interaction_ - h_interaction_.adjoint()) > kHermitianTol)
            throw PreconditionError("joint config: interaction must be Hermitian");
    }

    static JointSystemConfig noninteracting(HermitianOperator h_system,
                                            HermitianOperator h_observer) {
        const Eigen::Index joint =
            static_cast<Eigen::Index>(h_system.dim()) * h_observer.dim();
        return JointSystemConfig(std::move(h_system), std::move(h_observer),
                                 Matrix::Zero(joint, joint));
    }

    int d_system() const { return h_system_.dim(); }
    int d_observer() const { return h_observer_.dim(); }
    const HermitianOperator& h_system() const { return h_system_; }
    const HermitianOperator& h_observer() const { return h_observer_; }
    const Matrix& h_interaction() const { return h_interaction_; }

    bool is_noninteracting() const { return max_abs(h_interaction_) == 0.0; }

    HermitianOperator total() const {
        Matrix h = tensor_product(h_system_.matrix(),
                                  Matrix::Identity(d_observer(), d_observer())) +
                   tensor_product(Matrix::Identity(d_system(), d_system()),
                                  h_observer_.matrix()) +
                   h_interaction_;
        return HermitianOperator(std::move(h));
    }

private:
    HermitianOperator h_system_;
    HermitianOperator h_observer_;
    Matrix h_interaction_;
};

// Schrodinger evolution of the joint state: rho_tau = e^{-iH tau} rho e^{+iH tau}.
inline DensityMatrix joint_evolve(const DensityMatrix& rho0, const JointSystemConfig& config,
                                  double tau) {
    if (rho0.dim() != config.d_system() * config.d_observer())
        throw DimensionError("joint evolve: state must live on the joint space");
    const Matrix u = matrix_exponential(config.total(), -tau).matrix();
    return DensityMatrix(u * rho0.matrix() * u.adjoint());
}

inline StateVector observer_state_at(const JointSystemConfig& config, const StateVector& psi0,
                                     double tau) {
    if (psi0.dim() != config.d_observer())
        throw DimensionError("observer state: dim must match the observer register");
    return StateVector(matrix_exponential(config.h_observer(), -tau).matrix() * psi0.vector());
}

struct ConditionalExpectation {
    double value = 0.0;
    double weight = 0.0;  // probability of the conditioning outcome
};

// E(A | clock reads psi_o) = tr[(A (x) I) (I (x) |psi_o><psi_o|) rho] / tr[(I (x) P) rho]
inline ConditionalExpectation conditional_expectation(const HermitianOperator& a_system,
                                                      const DensityMatrix& rho_joint,
                                                      const StateVector& psi_observer,
                                                      int d_system, int d_observer) {
    if (a_system.dim() != d_system || psi_observer.dim() != d_observer ||
        rho_joint.dim() != d_system * d_observer)
        throw DimensionError("conditional expectation: register dims are inconsistent");
    const Matrix p =
        tensor_product(Matrix::Identity(d_system, d_system), projector_from_state(psi_observer));
    const double weight = (p * rho_joint.matrix()).trace().real();
    if (weight <= kConditioningTol)
        throw ConditioningError("conditional expectation: conditioning weight " +
                                fmt_double(weight) + " is not positive");
    const Matrix a_joint =
        tensor_product(a_system.matrix(), Matrix::Identity(d_observer, d_observer));
    const double numer = (a_joint * p * rho_joint.matrix()).trace().real();
    return {numer / weight, weight};
}

// Normalized system state conditioned on the observer outcome:
// (I (x) <psi_o|) rho (I (x) |psi_o>) / weight.
inline DensityMatrix relative_density(const DensityMatrix& rho_joint,
                                      const StateVector& psi_observer, int d_system,
                                      int d_observer) {
    if (psi_observer.dim() != d_observer || rho_joint.dim() != d_system * d_observer)
        throw DimensionError("relative density: register dims are inconsistent");
    const Vector& w = psi_observer.vector();
    Matrix t = Matrix::Zero(d_system, d_system);
    for (int i = 0; i < d_system; ++i)
        for (int j = 0; j < d_system; ++j)
            for (int a = 0; a < d_observer; ++a)
                for (int b = 0; b < d_observer; ++b)
                    t(i, j) += std::conj(w(a)) * rho_joint.matrix()(i * d_observer + a,
                                                                    j * d_observer + b) *
                               w(b);
    const double weight = t.trace().real();
    if (weight <= kConditioningTol)
        throw ConditioningError("relative density: conditioning weight " + fmt_double(weight) +
                                " is not positive");
    return DensityMatrix(t / weight);
}

// Heisenberg-picture readout tr[e^{+iH_s tau} A e^{-iH_s tau} rho].
inline double pw_heisenberg_expectation(const HermitianOperator& a_system,
                                        const HermitianOperator& h_system,
                                        const DensityMatrix& rho_system, double tau) {
    if (a_system.dim() != h_system.dim() || rho_system.dim() != h_system.dim())
        throw DimensionError("heisenberg expectation: dims differ");
    const Matrix u = matrix_exponential(h_system, tau).matrix();
    return ((u * a_system.matrix() * u.adjoint()) * rho_system.matrix()).trace().real();
}

struct LimitCheck {
    double route_joint = 0.0;       // conditional expectation on the evolved joint state
    double route_channel = 0.0;     // zero-noise dressed observable
    double route_heisenberg = 0.0;  // direct Heisenberg readout
    double max_discrepancy = 0.0;
};

// With the interaction switched off, conditioning the jointly evolved state
// on the clock, dressing the observable with a zero-noise channel, and the
// plain Heisenberg readout must produce the same number.
inline LimitCheck limit_consistency_check(const JointSystemConfig& config,
                                          const HermitianOperator& a_system,
                                          const DensityMatrix& rho_system,
                                          const StateVector& psi_observer0, double tau,
                                          int slices = 64, std::uint64_t seed = 0) {
    if (!config.is_noninteracting())
        throw PreconditionError("limit check: interaction must vanish");
    if (rho_system.dim() != config.d_system())
        throw DimensionError("limit check: system state dim mismatch");

    LimitCheck out;

    const DensityMatrix joint0(
        tensor_product(rho_system.matrix(), projector_from_state(psi_observer0)));
    const DensityMatrix joint_tau = joint_evolve(joint0, config, tau);
    const StateVector psi_tau = observer_state_at(config, psi_observer0, tau);
    out.route_joint = conditional_expectation(a_system, joint_tau, psi_tau, config.d_system(),
                                              config.d_observer())
                          .value;

    const auto spec = EnsembleSpec::zero_noise(config.h_system());
    const auto traj = sample_trajectory(spec, TimeGrid(tau, slices), seed, 0);
    const auto k = channel_from_trajectory(traj, ChannelOrdering::TimeOrdered);
    out.route_channel =
        (dress_operator(a_system, k).matrix() * rho_system.matrix()).trace().real();

    out.route_heisenberg =
        pw_heisenberg_expectation(a_system, config.h_system(), rho_system, tau);

    out.max_discrepancy = std::max({std::abs(out.route_joint - out.route_channel),
                                    std::abs(out.route_joint - out.route_heisenberg),
                                    std::abs(out.route_channel - out.route_heisenberg)});
    return out;
}

} // namespace smilab
