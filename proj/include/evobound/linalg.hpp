#pragma once

// Dense complex linear algebra on small matrices: norms, Hermitian
// eigendecomposition, exponentials, principal logarithms of unitaries.
// Everything is pure and operates on immutable values; safe to call
// concurrently.

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "evobound/errors.hpp"

namespace evobound::linalg {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-9;

Matrix identity(int dim);
Matrix zero(int dim);

// Pauli matrices and Kronecker products, the working basis of most scenarios.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix kron(const Matrix& a, const Matrix& b);

bool is_finite(const Matrix& a);
bool is_hermitian(const Matrix& a, double tol = kHermTol);
bool is_unitary(const Matrix& a, double tol = kUnitaryTol);

/// Largest singular value. Full SVD; dimensions here are tiny, so exactness
/// wins over speed. Dedicated closed form for 2x2, the hot path.
double spectral_norm(const Matrix& a);

/// sqrt(tr(a^dag a))
double hs_norm(const Matrix& a);

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and a
/// unitary matrix of column eigenvectors. Throws NotHermitian.
std::pair<RealVector, Matrix> herm_eig(const Matrix& a, double tol = kHermTol);

/// exp(-i t h) for Hermitian h, via eigendecomposition (closed form for 2x2).
Matrix expm_hermitian(const Matrix& h, double t, double tol = kHermTol);

/// Principal logarithm of a unitary: Hermitian K with exp(-i K) = u and the
/// eigenphases of K in (-pi, pi]. Throws BranchAmbiguity when an eigenphase
/// lies within branch_tol of pi, instead of silently choosing a branch.
Matrix logm_unitary(const Matrix& u, double tol = kUnitaryTol,
                    double branch_tol = 1e-8);

/// a b - b a
Matrix commutator(const Matrix& a, const Matrix& b);

/// Nearest unitary (polar factor); used to curb round-off drift in very long
/// ordered products.
Matrix polar_unitary(const Matrix& a);

void require_square(const Matrix& a);
void require_same_dim(const Matrix& a, const Matrix& b);
void require_hermitian(const Matrix& a, double tol = kHermTol);
void require_unitary(const Matrix& a, double tol = kUnitaryTol);

}  // namespace evobound::linalg
