#pragma once

// Spectral structure: clustered eigenprojections and gaps, Zeno Hamiltonians,
// ergodic means with their convergence bounds, and the adiabatic connection,
// transporter and dynamical phases for smoothly varying Hamiltonians.

#include <complex>
#include <vector>

#include "evobound/propagator.hpp"

namespace evobound::spectral {

using ham::TimeDepHamiltonian;
using ham::TimeWindow;
using linalg::Matrix;
using prop::EvolutionResult;

enum class Kind { hermitian, unitary };

struct SpectralDecomposition {
  Kind kind = Kind::hermitian;
  // cluster representatives, ascending: eigenvalues for hermitian inputs,
  // eigenphases phi in (-pi, pi] for unitary inputs (eigenvalue e^{-i phi})
  std::vector<double> distinct_values;
  std::vector<Matrix> projections;  // Hermitian idempotents, sum to identity
  int m = 0;
  double eta = 0.0;  // +inf when m == 1
  double cluster_tol = 0.0;

  std::complex<double> eigenvalue(int l) const;
  int dim() const { return static_cast<int>(projections.at(0).rows()); }
};

/// Eigenvalues clustered greedily: sorted values (phases on the circle for
/// unitaries) are grouped while adjacent gaps stay below cluster_tol, and the
/// projections are summed within each cluster. Throws DegenerateGap when an
/// inter-cluster gap is below 10 * cluster_tol, since every downstream bound
/// divides by the gap.
SpectralDecomposition spectral_decompose(const Matrix& a, Kind kind,
                                         double cluster_tol = 1e-8);

/// sum_l P_l h1 P_l
Matrix zeno_hamiltonian(const Matrix& h1, const SpectralDecomposition& dec);

struct MeanWithBound {
  Matrix mean;
  double bound = 0.0;
};

/// (1/t) int_0^t e^{isH0} a e^{-isH0} ds in closed form, with the deviation
/// bound 2 sqrt(m) ||a|| / (eta t) from its Zeno limit. m == 1 gives mean = a
/// and bound 0.
MeanWithBound continuous_ergodic_mean(const SpectralDecomposition& h0dec,
                                      const Matrix& a, double t);

/// (1/n) sum_{j=0}^{n-1} U^dag^j a U^j via geometric sums, with the bound
/// 2 sqrt(m) ||a|| / (eta n).
MeanWithBound discrete_ergodic_mean(const SpectralDecomposition& udec,
                                    const Matrix& a, long n);

struct ValueWithBound {
  double value = 0.0;
  double bound = 0.0;
};

/// || sum_{k,l} c_{kl} P_k a P_l || together with sqrt(m) max|c| ||a||.
ValueWithBound projected_sum_bound(const SpectralDecomposition& dec,
                                   const Matrix& a,
                                   const Eigen::MatrixXcd& coeffs);

// ---------------------------------------------------------------------------
// adiabatic structure

/// Bijective cluster matching between two nearby decompositions by maximal
/// projector overlap; throws LevelCrossing when counts, ranks or overlaps do
/// not line up. Returns sigma with next cluster sigma[l] matching prev l.
std::vector<int> match_clusters(const SpectralDecomposition& prev,
                                const SpectralDecomposition& next);

/// A(t) = sum_l (i/2) [Pdot_l(t), P_l(t)], Pdot by central differences on
/// gap-tracked clusters.
Matrix adiabatic_connection(const TimeDepHamiltonian& h0, double t,
                            double dec_tol = 1e-8, double fd_step = 1e-5);

/// W(t) = Texp(-i int_0^t A); W(t) P_l(0) W(t)^dag = P_l(t).
EvolutionResult adiabatic_transporter(const TimeDepHamiltonian& h0,
                                      const TimeWindow& window,
                                      double dec_tol = 1e-8,
                                      double fd_step = -1.0,  // < 0: 1e-5 * t_end
                                      double tol = 1e-9);

/// (1/t) int_0^t W(s)^dag H0(s) W(s) ds = sum_l Ebar_l(t) P_l(0), computed by
/// quadrature on the tracked eigenvalue traces.
Matrix dynamical_phase_generator(const TimeDepHamiltonian& h0,
                                 const EvolutionResult& w, double t);

/// Decompositions of h0 along the given times with clusters reordered to the
/// t = times[0] labelling; throws LevelCrossing if tracking fails.
std::vector<SpectralDecomposition> track_spectral_path(
    const TimeDepHamiltonian& h0, const std::vector<double>& times,
    double cluster_tol = 1e-8);

/// Minimal spectral gap and maximal spectral slope min/max over a tracked
/// path; the slope uses central differences of the tracked eigenvalues.
struct GapInfo {
  double eta = 0.0;
  double eta_prime = 0.0;
  int m = 0;
};
GapInfo path_gap_info(const TimeDepHamiltonian& h0, double t_end,
                      int grid_points, double cluster_tol = 1e-8);

}  // namespace evobound::spectral
