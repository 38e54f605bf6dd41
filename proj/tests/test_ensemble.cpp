#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "smilab/ensemble.hpp"
#include "test_helpers.hpp"

using namespace smilab;
using testing::random_hermitian;

namespace {

Matrix keyed_matrix(std::int64_t l, int dim) {
    RandomStream rng(9090, static_cast<std::uint64_t>(l), 0);
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            m(r, c) = Complex(rng.next_gaussian(), rng.next_gaussian());
    return m;
}

} // namespace

TEST_CASE("mean and variance match a two-pass reference") {
    const int n = 1000, dim = 2;
    const auto summary =
        average_trajectories(n, dim, 1, [&](std::int64_t l) { return keyed_matrix(l, dim); });

    Matrix mean_ref = Matrix::Zero(dim, dim);
    for (int l = 0; l < n; ++l) mean_ref += keyed_matrix(l, dim);
    mean_ref /= n;
    Eigen::MatrixXd var_ref = Eigen::MatrixXd::Zero(dim, dim);
    for (int l = 0; l < n; ++l) var_ref += (keyed_matrix(l, dim) - mean_ref).cwiseAbs2();
    var_ref /= (n - 1);

    REQUIRE(max_abs(summary.mean - mean_ref) < 1e-12);
    REQUIRE((summary.entry_variance - var_ref).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(summary.monte_carlo_error ==
            std::sqrt(summary.entry_variance.maxCoeff() / static_cast<double>(n)));
    REQUIRE(summary.n_trajectories == n);
}

TEST_CASE("results are byte-identical for any worker count") {
    const int n = 1003, dim = 3;  // deliberately not a chunk multiple
    auto fn = [&](std::int64_t l) { return keyed_matrix(l, dim); };
    const auto base = average_trajectories(n, dim, 1, fn);
    for (int workers : {2, 4, 8}) {
        const auto other = average_trajectories(n, dim, workers, fn);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                REQUIRE(base.mean(r, c) == other.mean(r, c));
                REQUIRE(base.entry_variance(r, c) == other.entry_variance(r, c));
            }
        REQUIRE(base.monte_carlo_error == other.monte_carlo_error);
    }
}

TEST_CASE("scalar gaussian stream reproduces N(0,1) statistics") {
    const int n = 20000;
    const auto summary = average_trajectories(n, 1, 2, [](std::int64_t l) {
        RandomStream rng(515, static_cast<std::uint64_t>(l), 0);
        Matrix m(1, 1);
        m(0, 0) = rng.next_gaussian();
        return m;
    });
    REQUIRE(std::abs(summary.mean(0, 0)) < 4.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(summary.entry_variance(0, 0) - 1.0) < 0.05);
    REQUIRE(summary.monte_carlo_error ==
            Catch::Approx(std::sqrt(summary.entry_variance(0, 0) / n)));
}

TEST_CASE("degenerate ensembles are rejected") {
    auto fn = [](std::int64_t) { return Matrix::Zero(2, 2).eval(); };
    REQUIRE_THROWS_AS(average_trajectories(1, 2, 1, fn), PreconditionError);
    REQUIRE_NOTHROW(average_trajectories(2, 2, 1, fn));
    REQUIRE_THROWS_AS(average_trajectories(10, 2, 1,
                                           [](std::int64_t) { return Matrix::Zero(3, 3).eval(); }),
                      DimensionError);
}

TEST_CASE("worker exceptions propagate to the caller") {
    auto fn = [](std::int64_t l) -> Matrix {
        if (l == 777) throw ConfigError("injected failure");
        return Matrix::Zero(2, 2);
    };
    REQUIRE_THROWS_AS(average_trajectories(2000, 2, 4, fn), ConfigError);
}

TEST_CASE("worker count resolution") {
    REQUIRE_THROWS_AS(resolve_worker_count(-1), ConfigError);
    REQUIRE(resolve_worker_count(5) == 5);
    REQUIRE(resolve_worker_count(100) == 64);

    ::setenv(kWorkerEnvVar, "3", 1);
    REQUIRE(resolve_worker_count(0) == 3);
    ::setenv(kWorkerEnvVar, "not-a-number", 1);
    REQUIRE(resolve_worker_count(0) >= 1);
    ::unsetenv(kWorkerEnvVar);
    REQUIRE(resolve_worker_count(0) >= 1);
}

TEST_CASE("zero noise ensembles have zero dispersion") {
    RandomStream rng(26, 0, 0);
    const HermitianOperator base(random_hermitian(3, rng));
    const HermitianOperator a(random_hermitian(3, rng));
    const auto spec = EnsembleSpec::zero_noise(base);
    const TimeGrid grid(1.0, 16);

    const auto summary = ensemble_average_operator(a, spec, grid, 8, 42);
    REQUIRE(summary.entry_variance.maxCoeff() < 1e-25);
    REQUIRE(summary.monte_carlo_error < 1e-12);

    const auto k = channel_from_trajectory(sample_trajectory(spec, grid, 42, 0),
                                           ChannelOrdering::TimeOrdered);
    REQUIRE(max_abs(summary.mean - dress_operator(a, k).matrix()) < 1e-14);
}

TEST_CASE("dephasing state averages stay physical and keep their diagonal") {
    const auto spec = EnsembleSpec::dephasing(
        HermitianOperator(Matrix::Zero(2, 2)),
        spectral_decompose(HermitianOperator(pauli_z())), 1.0);
    const auto rho = pure_density(plus_state());
    const auto summary = ensemble_average_state(rho, spec, TimeGrid(1.0, 50), 200, 7);

    const DensityMatrix mean = summary_state(summary);
    REQUIRE(max_abs(Matrix(mean.matrix().diagonal().asDiagonal()) -
                    Matrix(rho.matrix().diagonal().asDiagonal())) < 1e-12);

    const auto other = ensemble_average_state(rho, spec, TimeGrid(1.0, 50), 200, 8);
    REQUIRE(max_abs(summary.mean - other.mean) > 0.0);
}

TEST_CASE("operator and state ensembles reject dimension mismatches") {
    const auto spec = EnsembleSpec::zero_noise(HermitianOperator(pauli_z()));
    const TimeGrid grid(1.0, 4);
    REQUIRE_THROWS_AS(
        ensemble_average_operator(diagonal_operator({1.0, 2.0, 3.0}), spec, grid, 4, 1),
        DimensionError);
    REQUIRE_THROWS_AS(
        ensemble_average_state(DensityMatrix(Matrix::Identity(3, 3) / 3.0), spec, grid, 4, 1),
        DimensionError);
}
