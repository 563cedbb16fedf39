// algebra.hpp — Dense complex-matrix foundation: states, observables,
// traces, purity, PSD checks, vectorization.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dephaser/errors.hpp"

namespace dephaser {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermiticity = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double psd = 1e-10;
inline constexpr double imag_residual = 1e-12;
} // namespace tol

// Largest entry-wise deviation from A = A†.
inline double hermiticity_defect(const Matrix& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

// max(0, -λ_min(A)) via a full Hermitian eigendecomposition.
inline double psd_defect(const Matrix& a) {
    if (a.rows() != a.cols())
        throw ValidationError("square", "psd_defect requires a square matrix");
    if (hermiticity_defect(a) > tol::hermiticity)
        throw ValidationError("hermiticity", "psd_defect requires a Hermitian matrix");
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    return std::max(0.0, -solver.eigenvalues().minCoeff());
}

// n x n complex Hermitian, unit-trace, PSD state. Immutable after construction;
// construction validates all three invariants and throws ValidationError naming
// the one that failed.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m) : matrix_(std::move(m)) {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
            throw ValidationError("square", "density matrix must be square and non-empty");
        const double herm = hermiticity_defect(matrix_);
        if (herm > tol::hermiticity)
            throw ValidationError("hermiticity",
                                  "max |rho - rho^dag| = " + std::to_string(herm));
        const double trace_err = std::abs(matrix_.trace() - Complex(1.0, 0.0));
        if (trace_err > tol::trace)
            throw ValidationError("unit-trace", "|Tr rho - 1| = " + std::to_string(trace_err));
        const double defect = psd_defect(matrix_);
        if (defect > tol::psd)
            throw ValidationError("psd", "smallest eigenvalue below -" + std::to_string(defect));
    }

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }

private:
    Matrix matrix_;
};

// Hermitian operator (POVM bounds are checked where measurements require them).
class HermitianObservable {
public:
    explicit HermitianObservable(Matrix m) : matrix_(std::move(m)) {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
            throw ValidationError("square", "observable must be square and non-empty");
        const double herm = hermiticity_defect(matrix_);
        if (herm > tol::hermiticity)
            throw ValidationError("hermiticity",
                                  "max |O - O^dag| = " + std::to_string(herm));
    }

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }

private:
    Matrix matrix_;
};

namespace detail {

// Re Tr(A B) for Hermitian A, B; the imaginary residual must cancel.
inline double real_trace_product(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("dimension", "trace_product dimension mismatch");
    Complex t = (a.array() * b.transpose().array()).sum(); // sum_ab A_ab B_ba
    if (std::abs(t.imag()) > tol::imag_residual)
        throw ValidationError("imag-residual",
                              "Im Tr(AB) = " + std::to_string(t.imag()));
    return t.real();
}

} // namespace detail

inline double trace_product(const DensityMatrix& a, const DensityMatrix& b) {
    return detail::real_trace_product(a.matrix(), b.matrix());
}

inline double trace_product(const HermitianObservable& a, const DensityMatrix& b) {
    return detail::real_trace_product(a.matrix(), b.matrix());
}

// Tr(rho^2), in [1/n, 1].
inline double purity(const DensityMatrix& rho) { return trace_product(rho, rho); }

// Column-stacking vectorization: entry (r, c) lands at position c*n + r
// (column index varies slowest). This is the one basis-ordering convention
// used everywhere: matrix-unit basis index, superoperator rows/columns, and
// the JSON entry order.
inline Vector vectorize(const Matrix& m) {
    if (m.rows() != m.cols())
        throw ValidationError("square", "vectorize requires a square matrix");
    return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix devectorize(const Vector& v) {
    const auto len = v.size();
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(len))));
    if (n * n != len)
        throw ValidationError("perfect-square",
                              "devectorize needs a perfect-square length, got " +
                                  std::to_string(len));
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

// Opt-in repair for nearly-physical inputs: hermitize, clip negative
// eigenvalues, renormalize the trace. Inputs that fail PSD by more than the
// tolerance are *not* silently routed through this; callers choose.
inline DensityMatrix project_to_physical(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw ValidationError("square", "project_to_physical requires a square matrix");
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
    RealVector eigs = solver.eigenvalues().cwiseMax(0.0);
    const double total = eigs.sum();
    if (total <= 0.0)
        throw ValidationError("psd", "projection has zero trace; input is not repairable");
    eigs /= total;
    Matrix repaired =
        solver.eigenvectors() * eigs.asDiagonal() * solver.eigenvectors().adjoint();
    return DensityMatrix(std::move(repaired));
}

// |psi><psi| from a (normalized on entry) state vector.
inline DensityMatrix pure_state(const Vector& psi) {
    Vector unit = psi / psi.norm();
    return DensityMatrix(unit * unit.adjoint());
}

inline DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

} // namespace dephaser
