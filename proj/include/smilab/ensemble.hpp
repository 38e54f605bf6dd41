#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "smilab/smi.hpp"

namespace smilab {

// Trajectories are reduced in fixed chunks of this many, accumulated in
// ascending index order within each chunk, and the chunk partials are
// combined in ascending chunk order on the calling thread. That tree does
// not depend on the worker count or on scheduling, which is what makes
// ensemble results byte-identical for 1 or many workers.
inline constexpr std::int64_t kReductionChunk = 64;

inline constexpr const char* kWorkerEnvVar = "SMILAB_WORKERS";

// requested = 0 defers to SMILAB_WORKERS, then hardware concurrency.
inline int resolve_worker_count(int requested) {
    if (requested < 0) throw ConfigError("worker count: must be >= 0");
    int n = requested;
    if (n == 0) {
        if (const char* env = std::getenv(kWorkerEnvVar)) {
            char* end = nullptr;
            const long parsed = std::strtol(env, &end, 10);
            if (end && *end == '\0' && parsed >= 1) n = static_cast<int>(parsed);
        }
    }
    if (n == 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (n > 64) n = 64;
    return n;
}

// Runs fn(l) for l in [0, n) on `workers` threads, handing out fixed chunks.
// fn must only write state owned by index l.
template <typename Fn>
inline void parallel_for_trajectories(std::int64_t n, int workers, Fn&& fn) {
    if (n <= 0) return;
    const std::int64_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::atomic<std::int64_t> next_chunk{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<bool> failed{false};

    auto drain = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::int64_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) break;
            const std::int64_t lo = c * kReductionChunk;
            const std::int64_t hi = std::min(n, lo + kReductionChunk);
            try {
                for (std::int64_t l = lo; l < hi; ++l) fn(l, c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    const int n_workers =
        std::max(1, static_cast<int>(std::min<std::int64_t>(workers, n_chunks)));
    if (n_workers == 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(drain);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

struct EnsembleSummary {
    Matrix mean;                      // ensemble mean of the per-trajectory matrices
    Eigen::MatrixXd entry_variance;   // per-entry sample variance across trajectories
    double monte_carlo_error = 0.0;   // max over entries of sqrt(variance / n)
    std::int64_t n_trajectories = 0;
};

// Averages per_trajectory(l) over l in [0, n). The reduction tree is fixed
// (see kReductionChunk), so the result is a pure function of the inputs.
template <typename MatrixFn>
inline EnsembleSummary average_trajectories(std::int64_t n, int dim, int workers,
                                            MatrixFn&& per_trajectory) {
    if (n < 2) throw PreconditionError("ensemble average: n_trajectories >= 2 required");
    if (dim < 1) throw DimensionError("ensemble average: dim >= 1 required");

    const std::int64_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    // Per-chunk sums are taken relative to the chunk's first sample, so an
    // ensemble of identical matrices reports variance exactly 0 instead of
    // the ~eps*|x|^2 residue of the naive sum-of-squares formula.
    struct ChunkAccum {
        std::int64_t count = 0;
        Matrix pivot;
        Matrix dsum;
        Eigen::MatrixXd dsumsq;
    };
    std::vector<ChunkAccum> chunks(n_chunks);

    parallel_for_trajectories(n, resolve_worker_count(workers),
                              [&](std::int64_t l, std::int64_t chunk) {
                                  const Matrix m = per_trajectory(l);
                                  if (m.rows() != dim || m.cols() != dim)
                                      throw DimensionError(
                                          "ensemble average: trajectory result has wrong dim");
                                  ChunkAccum& acc = chunks[chunk];
                                  if (acc.count == 0) {
                                      acc.pivot = m;
                                      acc.dsum = Matrix::Zero(dim, dim);
                                      acc.dsumsq = Eigen::MatrixXd::Zero(dim, dim);
                                  } else {
                                      const Matrix d = m - acc.pivot;
                                      acc.dsum += d;
                                      acc.dsumsq += d.cwiseAbs2();
                                  }
                                  ++acc.count;
                              });

    // chunk partials combine pairwise in ascending chunk order
    std::int64_t n_acc = 0;
    Matrix mean_acc;
    Eigen::MatrixXd m2_acc;
    for (const ChunkAccum& c : chunks) {
        const double cnt = static_cast<double>(c.count);
        const Matrix mean_c = c.pivot + c.dsum / cnt;
        const Eigen::MatrixXd m2_c = c.dsumsq - c.dsum.cwiseAbs2() / cnt;
        if (n_acc == 0) {
            mean_acc = mean_c;
            m2_acc = m2_c;
        } else {
            const double na = static_cast<double>(n_acc);
            const Matrix delta = mean_c - mean_acc;
            m2_acc += m2_c + delta.cwiseAbs2() * (na * cnt / (na + cnt));
            mean_acc += delta * (cnt / (na + cnt));
        }
        n_acc += c.count;
    }

    EnsembleSummary out;
    out.n_trajectories = n;
    out.mean = std::move(mean_acc);
    out.entry_variance = (m2_acc / static_cast<double>(n - 1)).cwiseMax(0.0);
    out.monte_carlo_error =
        std::sqrt(out.entry_variance.maxCoeff() / static_cast<double>(n));
    return out;
}

// Mean of K_l A K_l^dag over the ensemble.
inline EnsembleSummary ensemble_average_operator(
    const HermitianOperator& a, const EnsembleSpec& spec, const TimeGrid& grid, std::int64_t n,
    std::uint64_t master_seed, ChannelOrdering ordering = ChannelOrdering::TimeOrdered,
    int workers = 0) {
    if (a.dim() != spec.dim())
        throw DimensionError("ensemble average: operator and ensemble dims differ");
    return average_trajectories(n, spec.dim(), workers, [&](std::int64_t l) {
        const auto traj = sample_trajectory(spec, grid, master_seed, l);
        return dress_operator(a, channel_from_trajectory(traj, ordering)).matrix();
    });
}

// Mean of K_l^dag rho K_l over the ensemble; the mean of unitary images of a
// state is again a state (use summary_state to materialize).
inline EnsembleSummary ensemble_average_state(
    const DensityMatrix& rho, const EnsembleSpec& spec, const TimeGrid& grid, std::int64_t n,
    std::uint64_t master_seed, ChannelOrdering ordering = ChannelOrdering::TimeOrdered,
    int workers = 0) {
    if (rho.dim() != spec.dim())
        throw DimensionError("ensemble average: state and ensemble dims differ");
    return average_trajectories(n, spec.dim(), workers, [&](std::int64_t l) {
        const auto traj = sample_trajectory(spec, grid, master_seed, l);
        return dress_state(rho, channel_from_trajectory(traj, ordering)).matrix();
    });
}

inline DensityMatrix summary_state(const EnsembleSummary& summary) {
    return DensityMatrix(summary.mean);
}

} // namespace smilab
