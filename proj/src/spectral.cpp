#include "evobound/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace evobound::spectral {

namespace {

using linalg::cplx;
using linalg::spectral_norm;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RawEig {
  std::vector<double> values;        // eigenvalues or phases, sorted ascending
  std::vector<Eigen::VectorXcd> vecs;  // matching orthonormal eigenvectors
};

RawEig raw_hermitian(const Matrix& a) {
  auto [vals, vecs] = linalg::herm_eig(a, 1e-9);
  RawEig out;
  for (int i = 0; i < vals.size(); ++i) {
    out.values.push_back(vals(i));
    out.vecs.push_back(vecs.col(i));
  }
  return out;
}

RawEig raw_unitary(const Matrix& a) {
  linalg::require_unitary(a, 1e-9);
  // Schur basis of a normal matrix is an orthonormal eigenbasis
  Eigen::ComplexSchur<Matrix> schur(a);
  const int dim = static_cast<int>(a.rows());
  std::vector<int> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phases(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    // eigenvalue e^{-i phi} with phi in (-pi, pi]
    double phi = -std::arg(schur.matrixT()(i, i));
    if (phi <= -M_PI) phi += 2.0 * M_PI;
    phases[static_cast<std::size_t>(i)] = phi;
  }
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return phases[static_cast<std::size_t>(x)] < phases[static_cast<std::size_t>(y)];
  });
  RawEig out;
  for (int idx : order) {
    out.values.push_back(phases[static_cast<std::size_t>(idx)]);
    out.vecs.push_back(schur.matrixU().col(idx));
  }
  return out;
}

double chordal(double phi_a, double phi_b) {
  return std::abs(std::exp(cplx(0.0, -phi_a)) - std::exp(cplx(0.0, -phi_b)));
}

}  // namespace

std::complex<double> SpectralDecomposition::eigenvalue(int l) const {
  const double v = distinct_values.at(static_cast<std::size_t>(l));
  if (kind == Kind::unitary) return std::exp(cplx(0.0, -v));
  return {v, 0.0};
}

SpectralDecomposition spectral_decompose(const Matrix& a, Kind kind,
                                         double cluster_tol) {
  if (cluster_tol <= 0.0) throw BadParam("cluster_tol must be positive");
  const RawEig raw =
      (kind == Kind::hermitian) ? raw_hermitian(a) : raw_unitary(a);
  const int dim = static_cast<int>(raw.values.size());

  // greedy grouping of adjacent sorted values
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < dim; ++i) {
    if (!clusters.empty() &&
        raw.values[static_cast<std::size_t>(i)] -
                raw.values[static_cast<std::size_t>(clusters.back().back())] <
            cluster_tol) {
      clusters.back().push_back(i);
    } else {
      clusters.push_back({i});
    }
  }
  // phases live on a circle: merge across the -pi/pi seam
  if (kind == Kind::unitary && clusters.size() >= 2) {
    const double wrap_gap = raw.values[static_cast<std::size_t>(clusters.front().front())] +
                            2.0 * M_PI -
                            raw.values[static_cast<std::size_t>(clusters.back().back())];
    if (wrap_gap < cluster_tol) {
      for (int i : clusters.back()) clusters.front().push_back(i);
      clusters.pop_back();
    }
  }

  SpectralDecomposition out;
  out.kind = kind;
  out.cluster_tol = cluster_tol;
  out.m = static_cast<int>(clusters.size());
  for (const auto& cl : clusters) {
    Matrix p = Matrix::Zero(dim, dim);
    double vsum = 0.0;
    cplx csum = 0.0;
    for (int i : cl) {
      const auto& v = raw.vecs[static_cast<std::size_t>(i)];
      p += v * v.adjoint();
      vsum += raw.values[static_cast<std::size_t>(i)];
      csum += std::exp(cplx(0.0, -raw.values[static_cast<std::size_t>(i)]));
    }
    p = 0.5 * (p + p.adjoint());
    double rep;
    if (kind == Kind::unitary) {
      rep = -std::arg(csum);  // circular mean
      if (rep <= -M_PI) rep += 2.0 * M_PI;
    } else {
      rep = vsum / static_cast<double>(cl.size());
    }
    out.distinct_values.push_back(rep);
    out.projections.push_back(std::move(p));
  }
  // keep representatives ascending (circular mean near the seam can reorder)
  if (kind == Kind::unitary) {
    std::vector<int> ord(static_cast<std::size_t>(out.m));
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int x, int y) {
      return out.distinct_values[static_cast<std::size_t>(x)] <
             out.distinct_values[static_cast<std::size_t>(y)];
    });
    SpectralDecomposition sorted = out;
    for (int i = 0; i < out.m; ++i) {
      sorted.distinct_values[static_cast<std::size_t>(i)] =
          out.distinct_values[static_cast<std::size_t>(ord[static_cast<std::size_t>(i)])];
      sorted.projections[static_cast<std::size_t>(i)] =
          out.projections[static_cast<std::size_t>(ord[static_cast<std::size_t>(i)])];
    }
    out = std::move(sorted);
  }

  if (out.m == 1) {
    out.eta = kInf;
    return out;
  }
  // ambiguous clustering guard, in the same metric the grouping used
  double min_adjacent = kInf;
  for (int i = 0; i + 1 < out.m; ++i)
    min_adjacent = std::min(min_adjacent,
                            out.distinct_values[static_cast<std::size_t>(i + 1)] -
                                out.distinct_values[static_cast<std::size_t>(i)]);
  if (kind == Kind::unitary)
    min_adjacent = std::min(min_adjacent,
                            out.distinct_values.front() + 2.0 * M_PI -
                                out.distinct_values.back());
  if (min_adjacent < 10.0 * cluster_tol)
    throw DegenerateGap("inter-cluster gap " + std::to_string(min_adjacent) +
                        " below 10 * cluster_tol");

  double eta = kInf;
  for (int k = 0; k < out.m; ++k)
    for (int l = k + 1; l < out.m; ++l) {
      const double gap =
          (kind == Kind::unitary)
              ? chordal(out.distinct_values[static_cast<std::size_t>(k)],
                        out.distinct_values[static_cast<std::size_t>(l)])
              : std::abs(out.distinct_values[static_cast<std::size_t>(k)] -
                         out.distinct_values[static_cast<std::size_t>(l)]);
      eta = std::min(eta, gap);
    }
  out.eta = eta;
  return out;
}

Matrix zeno_hamiltonian(const Matrix& h1, const SpectralDecomposition& dec) {
  if (h1.rows() != dec.dim()) throw DimMismatch("zeno_hamiltonian dims differ");
  Matrix out = Matrix::Zero(dec.dim(), dec.dim());
  for (const Matrix& p : dec.projections) out += p * h1 * p;
  return 0.5 * (out + out.adjoint());
}

MeanWithBound continuous_ergodic_mean(const SpectralDecomposition& h0dec,
                                      const Matrix& a, double t) {
  if (!(t > 0.0)) throw BadParam("continuous_ergodic_mean needs t > 0");
  if (h0dec.kind != Kind::hermitian)
    throw BadParam("continuous_ergodic_mean needs a hermitian decomposition");
  if (h0dec.m == 1) return {a, 0.0};
  Matrix mean = zeno_hamiltonian(a, h0dec);
  mean = Matrix::Zero(h0dec.dim(), h0dec.dim());
  for (int k = 0; k < h0dec.m; ++k)
    for (int l = 0; l < h0dec.m; ++l) {
      const Matrix blk = h0dec.projections[static_cast<std::size_t>(k)] * a *
                         h0dec.projections[static_cast<std::size_t>(l)];
      if (k == l) {
        mean += blk;
        continue;
      }
      const double w = t * (h0dec.distinct_values[static_cast<std::size_t>(k)] -
                            h0dec.distinct_values[static_cast<std::size_t>(l)]);
      const cplx phase = (std::exp(cplx(0.0, w)) - 1.0) / cplx(0.0, w);
      mean += phase * blk;
    }
  const double bound =
      2.0 * std::sqrt(static_cast<double>(h0dec.m)) / (h0dec.eta * t) *
      spectral_norm(a);
  return {mean, bound};
}

MeanWithBound discrete_ergodic_mean(const SpectralDecomposition& udec,
                                    const Matrix& a, long n) {
  if (n < 1) throw BadParam("discrete_ergodic_mean needs n >= 1");
  if (udec.kind != Kind::unitary)
    throw BadParam("discrete_ergodic_mean needs a unitary decomposition");
  if (udec.m == 1) return {a, 0.0};
  Matrix mean = Matrix::Zero(udec.dim(), udec.dim());
  for (int k = 0; k < udec.m; ++k)
    for (int l = 0; l < udec.m; ++l) {
      const Matrix blk = udec.projections[static_cast<std::size_t>(k)] * a *
                         udec.projections[static_cast<std::size_t>(l)];
      if (k == l) {
        mean += blk;
        continue;
      }
      const double d = udec.distinct_values[static_cast<std::size_t>(k)] -
                       udec.distinct_values[static_cast<std::size_t>(l)];
      const cplx q = std::exp(cplx(0.0, d));
      const cplx c = (1.0 - std::pow(q, static_cast<double>(n))) /
                     (1.0 - q) / static_cast<double>(n);
      mean += c * blk;
    }
  const double bound =
      2.0 * std::sqrt(static_cast<double>(udec.m)) /
      (udec.eta * static_cast<double>(n)) * spectral_norm(a);
  return {mean, bound};
}

ValueWithBound projected_sum_bound(const SpectralDecomposition& dec,
                                   const Matrix& a,
                                   const Eigen::MatrixXcd& coeffs) {
  if (coeffs.rows() != dec.m || coeffs.cols() != dec.m)
    throw BadParam("coeffs must be m x m");
  if (!coeffs.allFinite()) throw BadParam("coeffs must be finite");
  Matrix sum = Matrix::Zero(dec.dim(), dec.dim());
  double cmax = 0.0;
  for (int k = 0; k < dec.m; ++k)
    for (int l = 0; l < dec.m; ++l) {
      sum += coeffs(k, l) * dec.projections[static_cast<std::size_t>(k)] * a *
             dec.projections[static_cast<std::size_t>(l)];
      cmax = std::max(cmax, std::abs(coeffs(k, l)));
    }
  const double value = spectral_norm(sum);
  const double bound =
      std::sqrt(static_cast<double>(dec.m)) * cmax * spectral_norm(a);
  return {value, bound};
}

// ---------------------------------------------------------------------------
// adiabatic structure

std::vector<int> match_clusters(const SpectralDecomposition& prev,
                                const SpectralDecomposition& next) {
  if (prev.m != next.m)
    throw LevelCrossing("cluster count changed from " + std::to_string(prev.m) +
                        " to " + std::to_string(next.m));
  const int m = prev.m;
  std::vector<int> sigma(static_cast<std::size_t>(m), -1);
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (int k = 0; k < m; ++k) {
    const double rank =
        prev.projections[static_cast<std::size_t>(k)].trace().real();
    int best = -1;
    double best_overlap = -1.0;
    for (int l = 0; l < m; ++l) {
      if (used[static_cast<std::size_t>(l)]) continue;
      const double ov = (prev.projections[static_cast<std::size_t>(k)] *
                         next.projections[static_cast<std::size_t>(l)])
                            .trace()
                            .real();
      if (ov > best_overlap) {
        best_overlap = ov;
        best = l;
      }
    }
    if (best < 0 || best_overlap < 0.5 * rank)
      throw LevelCrossing("projector overlap " + std::to_string(best_overlap) +
                          " too small for cluster " + std::to_string(k));
    const double next_rank =
        next.projections[static_cast<std::size_t>(best)].trace().real();
    if (std::abs(next_rank - rank) > 0.1)
      throw LevelCrossing("cluster rank changed along the path");
    used[static_cast<std::size_t>(best)] = true;
    sigma[static_cast<std::size_t>(k)] = best;
  }
  return sigma;
}

namespace {

SpectralDecomposition reorder(const SpectralDecomposition& dec,
                              const std::vector<int>& sigma) {
  SpectralDecomposition out = dec;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out.distinct_values[k] =
        dec.distinct_values[static_cast<std::size_t>(sigma[k])];
    out.projections[k] = dec.projections[static_cast<std::size_t>(sigma[k])];
  }
  return out;
}

}  // namespace

Matrix adiabatic_connection(const TimeDepHamiltonian& h0, double t,
                            double dec_tol, double fd_step) {
  if (!(fd_step > 0.0)) throw BadParam("fd_step must be positive");
  const SpectralDecomposition mid =
      spectral_decompose(h0.eval(t), Kind::hermitian, dec_tol);
  SpectralDecomposition lo =
      spectral_decompose(h0.eval(t - fd_step), Kind::hermitian, dec_tol);
  lo = reorder(lo, match_clusters(mid, lo));
  SpectralDecomposition hi =
      spectral_decompose(h0.eval(t + fd_step), Kind::hermitian, dec_tol);
  hi = reorder(hi, match_clusters(mid, hi));
  Matrix a = Matrix::Zero(h0.dim(), h0.dim());
  for (int l = 0; l < mid.m; ++l) {
    const Matrix pdot = (hi.projections[static_cast<std::size_t>(l)] -
                         lo.projections[static_cast<std::size_t>(l)]) /
                        (2.0 * fd_step);
    a += cplx(0.0, 0.5) *
         linalg::commutator(pdot, mid.projections[static_cast<std::size_t>(l)]);
  }
  return 0.5 * (a + a.adjoint());
}

EvolutionResult adiabatic_transporter(const TimeDepHamiltonian& h0,
                                      const TimeWindow& window, double dec_tol,
                                      double fd_step, double tol) {
  const double step = fd_step > 0.0 ? fd_step : 1e-5 * window.t_end;
  auto h0c = h0;
  const TimeDepHamiltonian a_field = TimeDepHamiltonian::sampler(
      h0.dim(), [h0c, dec_tol, step](double t) {
        return adiabatic_connection(h0c, t, dec_tol, step);
      });
  EvolutionResult w = prop::evolve(a_field, window, prop::Method::cf_magnus4, tol);
  w.method = "transporter/" + w.method;
  return w;
}

std::vector<SpectralDecomposition> track_spectral_path(
    const TimeDepHamiltonian& h0, const std::vector<double>& times,
    double cluster_tol) {
  std::vector<SpectralDecomposition> out;
  out.reserve(times.size());
  for (double t : times) {
    SpectralDecomposition dec =
        spectral_decompose(h0.eval(t), Kind::hermitian, cluster_tol);
    if (!out.empty()) dec = reorder(dec, match_clusters(out.back(), dec));
    out.push_back(std::move(dec));
  }
  return out;
}

Matrix dynamical_phase_generator(const TimeDepHamiltonian& h0,
                                 const EvolutionResult& w, double t) {
  if (!(t > 0.0)) throw BadParam("dynamical_phase_generator needs t > 0");
  if (t > w.times.back() + 1e-12 * std::max(1.0, t))
    throw GridMismatch("t beyond the transporter window");
  // quadrature grid: transporter checkpoints up to t, refined by midpoints so
  // the cluster tracking stays tight
  std::vector<double> grid;
  for (double s : w.times) {
    if (s > t + 1e-12 * std::max(1.0, t)) break;
    if (!grid.empty()) grid.push_back(0.5 * (grid.back() + s));
    grid.push_back(s);
  }
  if (grid.size() < 3 || std::abs(grid.back() - t) > 1e-9 * std::max(1.0, t))
    throw GridMismatch("t must lie on the transporter grid");
  const auto path = track_spectral_path(h0, grid, 1e-8);
  const int m = path.front().m;
  std::vector<double> ebar(static_cast<std::size_t>(m), 0.0);
  for (std::size_t i = 0; i + 2 < grid.size(); i += 2) {
    const double h = grid[i + 2] - grid[i];
    for (int l = 0; l < m; ++l)
      ebar[static_cast<std::size_t>(l)] +=
          (h / 6.0) *
          (path[i].distinct_values[static_cast<std::size_t>(l)] +
           4.0 * path[i + 1].distinct_values[static_cast<std::size_t>(l)] +
           path[i + 2].distinct_values[static_cast<std::size_t>(l)]);
  }
  Matrix out = Matrix::Zero(h0.dim(), h0.dim());
  for (int l = 0; l < m; ++l)
    out += (ebar[static_cast<std::size_t>(l)] / t) *
           path.front().projections[static_cast<std::size_t>(l)];
  return 0.5 * (out + out.adjoint());
}

GapInfo path_gap_info(const TimeDepHamiltonian& h0, double t_end,
                      int grid_points, double cluster_tol) {
  TimeWindow win(t_end, grid_points);
  const auto path = track_spectral_path(h0, win.times(), cluster_tol);
  GapInfo info;
  info.m = path.front().m;
  if (info.m == 1) {
    info.eta = kInf;
    info.eta_prime = 0.0;
    return info;
  }
  info.eta = kInf;
  for (const auto& dec : path)
    for (int k = 0; k < dec.m; ++k)
      for (int l = k + 1; l < dec.m; ++l)
        info.eta = std::min(
            info.eta, std::abs(dec.distinct_values[static_cast<std::size_t>(k)] -
                               dec.distinct_values[static_cast<std::size_t>(l)]));
  const double dt = win.dt();
  for (std::size_t i = 1; i + 1 < path.size(); ++i)
    for (int k = 0; k < info.m; ++k)
      for (int l = 0; l < info.m; ++l) {
        if (k == l) continue;
        const double w_hi =
            path[i + 1].distinct_values[static_cast<std::size_t>(k)] -
            path[i + 1].distinct_values[static_cast<std::size_t>(l)];
        const double w_lo =
            path[i - 1].distinct_values[static_cast<std::size_t>(k)] -
            path[i - 1].distinct_values[static_cast<std::size_t>(l)];
        info.eta_prime =
            std::max(info.eta_prime, std::abs(w_hi - w_lo) / (2.0 * dt));
      }
  return info;
}

}  // namespace evobound::spectral
