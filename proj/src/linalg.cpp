#include "evobound/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace evobound::linalg {

namespace {

constexpr cplx kI{0.0, 1.0};

// exp(-i (a*I + v.sigma)) for a 2x2 Hermitian written as a*I + vx X + vy Y + vz Z.
Matrix expm2(double a, double vx, double vy, double vz) {
  const double r = std::sqrt(vx * vx + vy * vy + vz * vz);
  const cplx phase = std::exp(-kI * a);
  Matrix m(2, 2);
  if (r < 1e-300) {
    m << phase, 0.0, 0.0, phase;
    return m;
  }
  const double c = std::cos(r);
  const double s = std::sin(r) / r;
  m << phase * (c - kI * s * vz), phase * (-kI * s * (vx - kI * vy)),
      phase * (-kI * s * (vx + kI * vy)), phase * (c + kI * s * vz);
  return m;
}

}  // namespace

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }
Matrix zero(int dim) { return Matrix::Zero(dim, dim); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_finite(const Matrix& a) { return a.allFinite(); }

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const Matrix d = a.adjoint() * a - identity(static_cast<int>(a.rows()));
  return d.cwiseAbs().maxCoeff() <= tol;
}

void require_square(const Matrix& a) {
  if (a.rows() != a.cols())
    throw DimMismatch("matrix is not square: " + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()));
}

void require_same_dim(const Matrix& a, const Matrix& b) {
  require_square(a);
  require_square(b);
  if (a.rows() != b.rows())
    throw DimMismatch("dimensions differ: " + std::to_string(a.rows()) +
                      " vs " + std::to_string(b.rows()));
}

void require_hermitian(const Matrix& a, double tol) {
  require_square(a);
  if (!is_hermitian(a, tol)) {
    throw NotHermitian("deviation " +
                       std::to_string((a - a.adjoint()).cwiseAbs().maxCoeff()) +
                       " exceeds tol " + std::to_string(tol));
  }
}

void require_unitary(const Matrix& a, double tol) {
  require_square(a);
  if (!is_unitary(a, tol)) {
    const Matrix d = a.adjoint() * a - identity(static_cast<int>(a.rows()));
    throw NotUnitary("deviation " + std::to_string(d.cwiseAbs().maxCoeff()) +
                     " exceeds tol " + std::to_string(tol));
  }
}

double spectral_norm(const Matrix& a) {
  require_square(a);
  if (a.rows() == 1) return std::abs(a(0, 0));
  if (a.rows() == 2) {
    // Largest eigenvalue of a^dag a from trace and determinant.
    const Matrix g = a.adjoint() * a;
    const double tr = g(0, 0).real() + g(1, 1).real();
    const double det = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    return std::sqrt(std::max(0.0, 0.5 * (tr + disc)));
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double hs_norm(const Matrix& a) { return a.norm(); }

std::pair<RealVector, Matrix> herm_eig(const Matrix& a, double tol) {
  require_hermitian(a, tol);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix expm_hermitian(const Matrix& h, double t, double tol) {
  require_hermitian(h, tol);
  if (h.rows() == 2) {
    const double a = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double vz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double vx = h(0, 1).real();
    const double vy = -h(0, 1).imag();
    return expm2(a * t, vx * t, vy * t, vz * t);
  }
  auto [vals, vecs] = herm_eig(h, tol);
  Eigen::VectorXcd phases(vals.size());
  for (int i = 0; i < vals.size(); ++i) phases(i) = std::exp(-kI * (t * vals(i)));
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

Matrix logm_unitary(const Matrix& u, double tol, double branch_tol) {
  require_unitary(u, tol);
  // A unitary is normal, so its Schur form is diagonal and the Schur basis is
  // an orthonormal eigenbasis, degenerate eigenvalues included.
  Eigen::ComplexSchur<Matrix> schur(u);
  const Matrix& q = schur.matrixU();
  const Matrix& tmat = schur.matrixT();
  const int dim = static_cast<int>(u.rows());
  RealVector k(dim);
  for (int i = 0; i < dim; ++i) {
    const double psi = std::arg(tmat(i, i));  // eigenvalue e^{i psi}
    if (std::abs(std::abs(psi) - M_PI) < branch_tol)
      throw BranchAmbiguity("eigenphase " + std::to_string(-psi) +
                            " within " + std::to_string(branch_tol) + " of pi");
    k(i) = -psi;  // exp(-i k) = e^{i psi}
  }
  Matrix out = q * k.asDiagonal() * q.adjoint();
  return 0.5 * (out + out.adjoint());
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b);
  return a * b - b * a;
}

Matrix polar_unitary(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace evobound::linalg
