#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "smilab/quantum.hpp"

namespace smilab {

using Rational = boost::rational<long long>;

struct EnvarianceDims {
    int d_system;
    int d_observer;
    int d_environment;
};

// Equal-amplitude branching state (1/sqrt(M)) sum_j |s_{k(j)}> |o_j> |e_j>,
// where fine branch j lies in coarse cell k(j) and cells occupy contiguous
// fine-index ranges. multiplicities[k] counts the fine branches of cell k.
struct EnvarianceState {
    long long fine_count = 0;  // M
    std::vector<long long> multiplicities;
    EnvarianceDims dims{0, 0, 0};

    long long n_coarse() const { return static_cast<long long>(multiplicities.size()); }

    int coarse_of(long long fine) const {
        long long acc = 0;
        for (std::size_t k = 0; k < multiplicities.size(); ++k) {
            acc += multiplicities[k];
            if (fine < acc) return static_cast<int>(k);
        }
        throw DimensionError("envariance state: fine index out of range");
    }
};

namespace detail {

inline EnvarianceState make_envariance_state(std::vector<long long> multiplicities,
                                             EnvarianceDims dims) {
    EnvarianceState state;
    state.multiplicities = std::move(multiplicities);
    for (long long m : state.multiplicities) {
        if (m < 0) throw PreconditionError("envariance state: multiplicities must be >= 0");
        state.fine_count += m;
    }
    if (state.fine_count < 1)
        throw PreconditionError("envariance state: at least one fine branch required");
    if (dims.d_system < state.n_coarse() ||
        dims.d_observer < state.fine_count || dims.d_environment < state.fine_count)
        throw DimensionError(
            "envariance state: register dims must fit the coarse cells and fine branches");
    state.dims = dims;
    return state;
}

} // namespace detail

inline EnvarianceState build_equal_state(long long m, EnvarianceDims dims) {
    if (m < 1) throw PreconditionError("equal state: m >= 1 required");
    return detail::make_envariance_state(std::vector<long long>(m, 1), dims);
}

inline EnvarianceState build_coarse_state(const std::vector<long long>& multiplicities,
                                          EnvarianceDims dims) {
    return detail::make_envariance_state(multiplicities, dims);
}

// Every joint fine outcome (s_{k(j)}, o_j) carries weight exactly 1/M.
inline Rational fine_outcome_probability(const EnvarianceState& state) {
    return Rational(1, state.fine_count);
}

// Coarse-grained weights m_k / M, exactly. boost::rational normalizes, so
// refining every cell by a common factor leaves these identical.
inline std::vector<Rational> coarse_probabilities(const EnvarianceState& state) {
    std::vector<Rational> p;
    p.reserve(state.multiplicities.size());
    for (long long m : state.multiplicities) p.emplace_back(m, state.fine_count);
    return p;
}

inline StateVector to_state_vector(const EnvarianceState& state) {
    const auto& d = state.dims;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d.d_system) * d.d_observer *
                            d.d_environment);
    const double amp = 1.0 / std::sqrt(static_cast<double>(state.fine_count));
    for (long long j = 0; j < state.fine_count; ++j) {
        const long long s = state.coarse_of(j);
        v((s * d.d_observer + j) * d.d_environment + j) = amp;
    }
    return StateVector(std::move(v));
}

// Whether a permutation pi of the fine branches (applied to the observer and
// environment registers together) can be undone by relabeling system states:
// some sigma with sigma(k(j)) = k(pi(j)) for every j. Coefficient-equal
// states absorb every pi; unequal coarse cells only absorb block-preserving
// maps. The candidate sigma is verified by comparing the transformed support.
inline bool envariance_swap_check(const EnvarianceState& state,
                                  const std::vector<long long>& perm) {
    const long long m = state.fine_count;
    if (static_cast<long long>(perm.size()) != m)
        throw DimensionError("swap check: permutation size must equal the fine branch count");
    std::vector<bool> seen(m, false);
    for (long long p : perm) {
        if (p < 0 || p >= m || seen[p])
            throw PreconditionError("swap check: not a permutation of the fine branches");
        seen[p] = true;
    }

    const long long n_cells = state.n_coarse();
    std::vector<long long> sigma(n_cells, -1);
    for (long long j = 0; j < m; ++j) {
        const long long from = state.coarse_of(j);
        const long long to = state.coarse_of(perm[j]);
        if (sigma[from] == -1) {
            sigma[from] = to;
        } else if (sigma[from] != to) {
            return false;  // the cell is torn across targets; no relabeling helps
        }
    }

    // verify against the definition: relabeled-and-permuted support == support
    std::vector<std::pair<long long, long long>> original, transformed;
    original.reserve(m);
    transformed.reserve(m);
    for (long long j = 0; j < m; ++j) {
        original.emplace_back(state.coarse_of(j), j);
        transformed.emplace_back(sigma[state.coarse_of(j)], perm[j]);
    }
    std::sort(original.begin(), original.end());
    std::sort(transformed.begin(), transformed.end());
    return original == transformed;
}

// Best equal-weight realization of a probability vector: numerators over a
// common denominator M <= cap minimizing the worst cell error, every nonzero
// target kept realizable (m_k >= 1). Ties prefer the smaller denominator.
struct RationalApproximation {
    std::vector<long long> numerators;
    long long denominator = 0;
    double achieved_error = 0.0;
    long long cap = 0;
    std::vector<double> targets;
};

namespace detail {

// errors below this count as exact when comparing denominators, so
// rational-valued targets resolve to their smallest exact denominator
// instead of whichever larger multiple wins by a last-ulp margin
inline constexpr double kExactnessSnap = 1e-13;

struct Assignment {
    std::vector<long long> numerators;
    double error = 0.0;
    bool feasible = false;
};

inline Assignment best_assignment_for(const std::vector<double>& targets,
                                      const std::vector<bool>& nonzero, long long m) {
    const std::size_t n = targets.size();
    std::vector<double> beta(n);
    for (std::size_t k = 0; k < n; ++k) beta[k] = targets[k] * static_cast<double>(m);

    auto bounds_at = [&](double b, std::vector<long long>& lo, std::vector<long long>& hi) {
        long long lo_sum = 0, hi_sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (!nonzero[k]) {
                lo[k] = hi[k] = 0;
                continue;
            }
            lo[k] = std::max<long long>(1, static_cast<long long>(std::ceil(beta[k] - b)));
            hi[k] = static_cast<long long>(std::floor(beta[k] + b));
            if (lo[k] > hi[k]) return false;
            lo_sum += lo[k];
            hi_sum += hi[k];
        }
        return lo_sum <= m && m <= hi_sum;
    };

    std::vector<long long> lo(n), hi(n);
    double b_lo = 0.0, b_hi = static_cast<double>(m) + 1.0;
    if (!bounds_at(b_hi, lo, hi)) return {};
    if (bounds_at(0.0, lo, hi)) {
        b_hi = 0.0;
    } else {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (b_lo + b_hi);
            if (bounds_at(mid, lo, hi))
                b_hi = mid;
            else
                b_lo = mid;
        }
    }
    bounds_at(b_hi, lo, hi);

    Assignment out;
    out.feasible = true;
    out.numerators.resize(n);
    long long sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const long long rounded = static_cast<long long>(std::llround(beta[k]));
        out.numerators[k] = std::clamp(rounded, lo[k], hi[k]);
        sum += out.numerators[k];
    }
    while (sum != m) {
        // push the cell with the most headroom toward its target
        std::size_t pick = n;
        double best_gap = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (sum < m && out.numerators[k] < hi[k]) {
                const double gap = beta[k] - static_cast<double>(out.numerators[k]);
                if (gap > best_gap) {
                    best_gap = gap;
                    pick = k;
                }
            } else if (sum > m && out.numerators[k] > lo[k]) {
                const double gap = static_cast<double>(out.numerators[k]) - beta[k];
                if (gap > best_gap) {
                    best_gap = gap;
                    pick = k;
                }
            }
        }
        if (pick == n) return {};  // cannot happen when bounds_at held
        out.numerators[pick] += sum < m ? 1 : -1;
        sum += sum < m ? 1 : -1;
    }
    for (std::size_t k = 0; k < n; ++k)
        out.error = std::max(out.error,
                             std::abs(static_cast<double>(out.numerators[k]) /
                                          static_cast<double>(m) -
                                      targets[k]));
    return out;
}

} // namespace detail

inline RationalApproximation fine_grain(const std::vector<double>& targets, long long cap) {
    if (targets.empty()) throw PreconditionError("fine grain: at least one target required");
    if (cap < 1) throw PreconditionError("fine grain: cap >= 1 required");
    double sum = 0.0;
    std::vector<bool> nonzero(targets.size());
    long long n_nonzero = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] < 0.0)
            throw PreconditionError("fine grain: targets must be non-negative");
        nonzero[k] = targets[k] > 0.0;
        n_nonzero += nonzero[k] ? 1 : 0;
        sum += targets[k];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw PreconditionError("fine grain: targets must sum to 1");
    if (n_nonzero == 0) throw PreconditionError("fine grain: all targets are zero");
    if (n_nonzero > cap)
        throw ResolutionError("fine grain: " + std::to_string(n_nonzero) +
                              " nonzero targets cannot each get a branch under cap " +
                              std::to_string(cap));

    RationalApproximation best;
    best.cap = cap;
    best.targets = targets;
    double best_snapped = -1.0;
    for (long long m = n_nonzero; m <= cap; ++m) {
        const auto cand = detail::best_assignment_for(targets, nonzero, m);
        if (!cand.feasible) continue;
        const double snapped = cand.error < detail::kExactnessSnap ? 0.0 : cand.error;
        if (best_snapped < 0.0 || snapped < best_snapped) {
            best_snapped = snapped;
            best.numerators = cand.numerators;
            best.denominator = m;
            best.achieved_error = cand.error;
            if (snapped == 0.0) break;  // exact; smaller denominators were already scanned
        }
    }
    if (best_snapped < 0.0)
        throw ResolutionError("fine grain: no feasible denominator under cap " +
                              std::to_string(cap));
    return best;
}

} // namespace smilab
