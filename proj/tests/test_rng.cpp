#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "smilab/rng.hpp"

using namespace smilab;

TEST_CASE("streams are pure functions of their key") {
    RandomStream a(42, 7, 3);
    RandomStream b(42, 7, 3);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    RandomStream c(42, 7, 4), d(42, 8, 3), e(43, 7, 3);
    RandomStream ref(42, 7, 3);
    const auto r0 = ref.next_u64();
    REQUIRE(c.next_u64() != r0);
    REQUIRE(d.next_u64() != r0);
    REQUIRE(e.next_u64() != r0);
}

TEST_CASE("derived seeds separate by salt") {
    REQUIRE(derive_seed(1, 0) != derive_seed(1, 1));
    REQUIRE(derive_seed(1, 0) != derive_seed(2, 0));
    REQUIRE(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("uniform draws live in [0,1)") {
    RandomStream rng(1, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("gaussian moments match N(0,1)") {
    // mean SE = 1/sqrt(N), variance SE ~ sqrt(2/N); bounds sit at ~4 sigma
    const int n = 200000;
    RandomStream rng(2024, 0, 0);
    double sum = 0.0, sumsq = 0.0, lag = 0.0, prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.next_gaussian();
        sum += x;
        sumsq += x * x;
        if (i > 0) lag += x * prev;
        prev = x;
    }
    const double mean = sum / n;
    const double var = (sumsq - sum * sum / n) / (n - 1);
    const double autocorr = lag / (n - 1);
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE(std::abs(var - 1.0) < 0.015);
    REQUIRE(std::abs(autocorr) < 0.01);
}

TEST_CASE("gaussian tail frequency is sane") {
    // P(|X| > 2) = 0.0455; 4 sigma of the frequency at N=2e5 is ~0.0019
    const int n = 200000;
    RandomStream rng(77, 1, 2);
    int tails = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(rng.next_gaussian()) > 2.0) ++tails;
    REQUIRE(std::abs(tails / static_cast<double>(n) - 0.0455) < 0.002);
}

TEST_CASE("gue draws are hermitian with the pinned frobenius scale") {
    const int dim = 4;
    RandomStream rng(9, 0, 0);
    double fsum = 0.0;
    const int reps = 2000;
    for (int k = 0; k < reps; ++k) {
        const Eigen::MatrixXcd v = sample_gue(dim, rng);
        REQUIRE((v - v.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        fsum += v.squaredNorm();
    }
    // E ||V||_F^2 = dim; SE of the mean at 2000 reps is ~0.021 for dim 4
    REQUIRE(std::abs(fsum / reps - static_cast<double>(dim)) < 0.1);
}

TEST_CASE("gue draws are deterministic per key") {
    RandomStream a(5, 3, 1), b(5, 3, 1);
    const Eigen::MatrixXcd va = sample_gue(3, a);
    const Eigen::MatrixXcd vb = sample_gue(3, b);
    REQUIRE((va - vb).cwiseAbs().maxCoeff() == 0.0);

    RandomStream c(5, 3, 2);
    const Eigen::MatrixXcd vc = sample_gue(3, c);
    REQUIRE((va - vc).cwiseAbs().maxCoeff() > 0.0);
}
