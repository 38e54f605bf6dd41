#pragma once

#include "smilab/quantum.hpp"
#include "smilab/rng.hpp"

namespace smilab {

inline Matrix random_hermitian(int dim, RandomStream& rng) {
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        m(r, r) = rng.next_gaussian();
        for (int c = r + 1; c < dim; ++c) {
            const Complex z(rng.next_gaussian(), rng.next_gaussian());
            m(r, c) = z;
            m(c, r) = std::conj(z);
        }
    }
    return m;
}

inline DensityMatrix random_density(int dim, RandomStream& rng) {
    Matrix g(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            g(r, c) = Complex(rng.next_gaussian(), rng.next_gaussian());
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return DensityMatrix(std::move(rho));
}

inline StateVector random_pure(int dim, RandomStream& rng) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(rng.next_gaussian(), rng.next_gaussian());
    v /= v.norm();
    return StateVector(std::move(v));
}

} // namespace smilab
