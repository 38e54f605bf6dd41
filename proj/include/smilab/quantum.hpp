#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "smilab/errors.hpp"

namespace smilab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// tolerances enforced by the validating constructors and checks below
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdFloor = -1e-10;
inline constexpr double kSpectralTol = 1e-10;
inline constexpr double kDegeneracyRel = 1e-9;

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_exactly_diagonal(const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (r != c && m(r, c) != Complex(0.0, 0.0)) return false;
    return true;
}

inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m, double tol = kHermitianTol) : m_(std::move(m)) {
        if (m_.rows() < 1 || m_.rows() != m_.cols())
            throw DimensionError("hermitian operator: square matrix with dim >= 1 required");
        const double dev = max_abs(m_ - m_.adjoint());
        if (dev > tol)
            throw PreconditionError("hermitian operator: max |H - H^dag| = " + fmt_double(dev) +
                                    " exceeds " + fmt_double(tol));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

class UnitaryOperator {
public:
    explicit UnitaryOperator(Matrix m, double tol = kUnitaryTol) : m_(std::move(m)) {
        if (m_.rows() < 1 || m_.rows() != m_.cols())
            throw DimensionError("unitary operator: square matrix with dim >= 1 required");
        const Matrix gram = m_.adjoint() * m_;
        const double dev = max_abs(gram - Matrix::Identity(m_.rows(), m_.cols()));
        if (dev > tol)
            throw PreconditionError("unitary operator: max |U^dag U - I| = " + fmt_double(dev) +
                                    " exceeds " + fmt_double(tol));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

class StateVector {
public:
    explicit StateVector(Vector v, double tol = kNormTol) : v_(std::move(v)) {
        if (v_.size() < 1) throw DimensionError("state vector: dim >= 1 required");
        const double dev = std::abs(v_.norm() - 1.0);
        if (dev > tol)
            throw PreconditionError("state vector: | ||psi|| - 1 | = " + fmt_double(dev) +
                                    " exceeds " + fmt_double(tol));
    }

    int dim() const { return static_cast<int>(v_.size()); }
    const Vector& vector() const { return v_; }

private:
    Vector v_;
};

class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m, double trace_tol = kTraceTol,
                           double psd_floor = kPsdFloor) : m_(std::move(m)) {
        if (m_.rows() < 1 || m_.rows() != m_.cols())
            throw DimensionError("density matrix: square matrix with dim >= 1 required");
        const double herm_dev = max_abs(m_ - m_.adjoint());
        if (herm_dev > kHermitianTol)
            throw PreconditionError("density matrix: max |rho - rho^dag| = " +
                                    fmt_double(herm_dev) + " exceeds " + fmt_double(kHermitianTol));
        const double trace_dev = std::abs(m_.trace() - Complex(1.0, 0.0));
        if (trace_dev > trace_tol)
            throw PreconditionError("density matrix: |tr(rho) - 1| = " + fmt_double(trace_dev) +
                                    " exceeds " + fmt_double(trace_tol));
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw NumericalError("density matrix: eigensolver failed during validation");
        const double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < psd_floor)
            throw PreconditionError("density matrix: min eigenvalue " + fmt_double(min_eig) +
                                    " below floor " + fmt_double(psd_floor));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

// Eigendecomposition with near-degenerate eigenvalues merged into blocks.
// Blocks are ascending in eigenvalue; basis columns are grouped by block.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;   // one per block
    std::vector<int> multiplicities;   // block sizes
    std::vector<Matrix> projectors;    // rank = multiplicity, sum = identity
    Matrix basis;                      // orthonormal eigenvector columns
    std::vector<int> block_of_column;  // block index for each basis column
    int dim = 0;

    int n_blocks() const { return static_cast<int>(eigenvalues.size()); }
};

// degeneracy_tol < 0 selects the default: kDegeneracyRel * (lambda_max - lambda_min)
inline SpectralDecomposition spectral_decompose(const HermitianOperator& a,
                                                double degeneracy_tol = -1.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral decomposition: eigensolver failed");
    const auto& vals = es.eigenvalues();
    const int d = a.dim();
    if (degeneracy_tol < 0.0)
        degeneracy_tol = kDegeneracyRel * (vals(d - 1) - vals(0));

    SpectralDecomposition out;
    out.dim = d;
    out.basis = es.eigenvectors();
    out.block_of_column.resize(d);
    int start = 0;
    for (int i = 1; i <= d; ++i) {
        if (i == d || vals(i) - vals(i - 1) > degeneracy_tol) {
            const int mult = i - start;
            double mean = 0.0;
            for (int j = start; j < i; ++j) mean += vals(j);
            mean /= mult;
            Matrix block = out.basis.middleCols(start, mult);
            out.eigenvalues.push_back(mean);
            out.multiplicities.push_back(mult);
            out.projectors.push_back(block * block.adjoint());
            for (int j = start; j < i; ++j)
                out.block_of_column[j] = static_cast<int>(out.eigenvalues.size()) - 1;
            start = i;
        }
    }
    return out;
}

// e^{i * scale * H}. Diagonal inputs take a closed-form path so diagonal
// generators produce exactly diagonal phases.
inline UnitaryOperator matrix_exponential(const HermitianOperator& h, double scale) {
    const Matrix& m = h.matrix();
    const int d = h.dim();
    Matrix u;
    if (is_exactly_diagonal(m)) {
        u = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i)
            u(i, i) = std::polar(1.0, scale * m(i, i).real());
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        if (es.info() != Eigen::Success)
            throw NumericalError("matrix exponential: eigensolver failed");
        Vector phases(d);
        for (int i = 0; i < d; ++i)
            phases(i) = std::polar(1.0, scale * es.eigenvalues()(i));
        u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    }
    return UnitaryOperator(std::move(u));
}

inline Matrix tensor_product(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b);
}

enum class Subsystem { Left, Right };

inline Matrix partial_trace_matrix(const Matrix& m, int d_left, int d_right, Subsystem keep) {
    if (d_left < 1 || d_right < 1 ||
        m.rows() != static_cast<Eigen::Index>(d_left) * d_right || m.rows() != m.cols())
        throw DimensionError("partial trace: matrix dim must equal d_left * d_right");
    if (keep == Subsystem::Left) {
        Matrix out = Matrix::Zero(d_left, d_left);
        for (int i = 0; i < d_left; ++i)
            for (int j = 0; j < d_left; ++j)
                for (int k = 0; k < d_right; ++k)
                    out(i, j) += m(i * d_right + k, j * d_right + k);
        return out;
    }
    Matrix out = Matrix::Zero(d_right, d_right);
    for (int k = 0; k < d_right; ++k)
        for (int l = 0; l < d_right; ++l)
            for (int i = 0; i < d_left; ++i)
                out(k, l) += m(i * d_right + k, i * d_right + l);
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, int d_left, int d_right,
                                   Subsystem keep) {
    return DensityMatrix(partial_trace_matrix(rho.matrix(), d_left, d_right, keep));
}

inline Matrix projector_from_state(const StateVector& psi) {
    return psi.vector() * psi.vector().adjoint();
}

inline std::vector<double> born_distribution(const DensityMatrix& rho,
                                             const SpectralDecomposition& decomp) {
    if (rho.dim() != decomp.dim)
        throw DimensionError("born distribution: state and decomposition dims differ");
    std::vector<double> p(decomp.projectors.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = (decomp.projectors[i] * rho.matrix()).trace().real();
    return p;
}

inline double expectation_value(const HermitianOperator& a, const DensityMatrix& rho) {
    if (a.dim() != rho.dim())
        throw DimensionError("expectation value: operator and state dims differ");
    return (a.matrix() * rho.matrix()).trace().real();
}

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline HermitianOperator diagonal_operator(const std::vector<double>& entries) {
    Matrix m = Matrix::Zero(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return HermitianOperator(std::move(m));
}

inline StateVector basis_state(int dim, int index) {
    if (index < 0 || index >= dim) throw DimensionError("basis state: index out of range");
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return StateVector(std::move(v));
}

// uniform superposition of all computational basis states
inline StateVector plus_state(int dim = 2) {
    Vector v = Vector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    return StateVector(std::move(v));
}

inline DensityMatrix pure_density(const StateVector& psi) {
    return DensityMatrix(projector_from_state(psi));
}

} // namespace smilab
