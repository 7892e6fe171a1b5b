#include "evobound/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace evobound::prop {

namespace {

using linalg::expm_hermitian;
using linalg::spectral_norm;

// relaxed hermiticity tolerance inside step kernels: samplers built from
// cached propagators carry integrator noise at the 1e-9 scale
constexpr double kStepHermTol = 1e-6;

// CF-Magnus-4 nodes and weights (two exponentials per step, Gauss-Legendre
// nodes). The left factor weights the later node with a1.
const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0;
const double kNode2 = 0.5 + kSqrt3 / 6.0;
const double kA1 = 0.25 + kSqrt3 / 6.0;
const double kA2 = 0.25 - kSqrt3 / 6.0;

Matrix cf4_step(const TimeDepHamiltonian& h, double t, double dt) {
  const Matrix h1 = h.eval(t + kNode1 * dt);
  const Matrix h2 = h.eval(t + kNode2 * dt);
  return expm_hermitian(kA2 * h1 + kA1 * h2, dt, kStepHermTol) *
         expm_hermitian(kA1 * h1 + kA2 * h2, dt, kStepHermTol);
}

Matrix midpoint_step(const TimeDepHamiltonian& h, double t, double dt) {
  return expm_hermitian(h.eval(t + 0.5 * dt), dt, kStepHermTol);
}

template <class Step>
EvolutionResult run_fixed(const TimeDepHamiltonian& h, const TimeWindow& window,
                          long substeps, Step&& step, ExecPolicy policy) {
  const int cells = window.grid_points - 1;
  std::vector<Matrix> segs(static_cast<std::size_t>(cells));
  for_each_index(cells, policy, [&](std::int64_t i) {
    const double t0 = window.time(static_cast<int>(i));
    const double dt = window.dt() / static_cast<double>(substeps);
    Matrix u = linalg::identity(h.dim());
    for (long k = 0; k < substeps; ++k)
      u = step(h, t0 + dt * static_cast<double>(k), dt) * u;
    segs[static_cast<std::size_t>(i)] = std::move(u);
  });
  EvolutionResult out;
  out.times = window.times();
  out.unitaries.reserve(static_cast<std::size_t>(window.grid_points));
  Matrix acc = linalg::identity(h.dim());
  out.unitaries.push_back(acc);
  for (const Matrix& s : segs) {
    acc = s * acc;
    out.unitaries.push_back(acc);
  }
  return out;
}

double checkpoint_diff(const EvolutionResult& a, const EvolutionResult& b,
                       ExecPolicy policy) {
  return indexed_max(static_cast<std::int64_t>(a.unitaries.size()), policy,
                     [&](std::int64_t i) {
                       return spectral_norm(a.unitaries[static_cast<std::size_t>(i)] -
                                            b.unitaries[static_cast<std::size_t>(i)]);
                     });
}

EvolutionResult evolve_exact_constant(const Matrix& h, const TimeWindow& window,
                                      ExecPolicy policy) {
  EvolutionResult out;
  out.times = window.times();
  out.unitaries.assign(static_cast<std::size_t>(window.grid_points),
                       Matrix());
  for_each_index(window.grid_points, policy, [&](std::int64_t i) {
    out.unitaries[static_cast<std::size_t>(i)] =
        expm_hermitian(h, window.time(static_cast<int>(i)));
  });
  out.method = "exact_constant";
  out.est_error = 1e-14 * (1.0 + spectral_norm(h) * window.t_end);
  return out;
}

EvolutionResult evolve_piecewise_exact(const TimeDepHamiltonian& h,
                                       const TimeWindow& window,
                                       ExecPolicy policy) {
  const auto& bp = h.breakpoints();
  const auto& vals = h.piece_values();
  if (window.t_end > bp.back() + 1e-12 * std::max(1.0, bp.back()))
    throw OutOfSchedule("window extends beyond the schedule");
  const int cells = window.grid_points - 1;
  std::vector<Matrix> segs(static_cast<std::size_t>(cells));
  for_each_index(cells, policy, [&](std::int64_t i) {
    const double lo = window.time(static_cast<int>(i));
    const double hi = window.time(static_cast<int>(i) + 1);
    Matrix u = linalg::identity(h.dim());
    // ordered product of the constant pieces intersecting [lo, hi]
    auto it = std::upper_bound(bp.begin(), bp.end(), lo);
    std::size_t j = static_cast<std::size_t>(it - bp.begin()) - 1;
    double t = lo;
    while (t < hi - 1e-15 * std::max(1.0, hi) && j < vals.size()) {
      const double seg_end = std::min(hi, bp[j + 1]);
      u = expm_hermitian(vals[j], seg_end - t) * u;
      t = seg_end;
      ++j;
    }
    segs[static_cast<std::size_t>(i)] = std::move(u);
  });
  EvolutionResult out;
  out.times = window.times();
  Matrix acc = linalg::identity(h.dim());
  out.unitaries.push_back(acc);
  for (const Matrix& s : segs) {
    acc = s * acc;
    out.unitaries.push_back(acc);
  }
  out.method = "piecewise_exact";
  out.est_error = 1e-14 * static_cast<double>(vals.size() + out.unitaries.size());
  return out;
}

}  // namespace

EvolutionResult evolve(const TimeDepHamiltonian& h, const TimeWindow& window,
                       Method method, double tol, ExecPolicy policy) {
  using F = TimeDepHamiltonian::Form;
  if (method == Method::auto_select) {
    if (h.form() == F::constant)
      return evolve_exact_constant(h.constant_value(), window, policy);
    if (h.form() == F::piecewise)
      return evolve_piecewise_exact(h, window, policy);
    method = Method::cf_magnus4;
  }
  if (method == Method::piecewise_exact) {
    if (h.form() == F::constant)
      return evolve_exact_constant(h.constant_value(), window, policy);
    if (h.form() != F::piecewise)
      throw BadParam("piecewise_exact needs a piecewise or constant form");
    return evolve_piecewise_exact(h, window, policy);
  }

  const bool cf4 = (method == Method::cf_magnus4);
  auto step = [cf4](const TimeDepHamiltonian& hh, double t, double dt) {
    return cf4 ? cf4_step(hh, t, dt) : midpoint_step(hh, t, dt);
  };
  const double order = cf4 ? 15.0 : 3.0;  // 2^p - 1 Richardson factors
  constexpr int kMaxHalvings = 16;
  long m = 1;
  EvolutionResult prev = run_fixed(h, window, m, step, policy);
  for (int round = 0; round < kMaxHalvings; ++round) {
    m *= 2;
    EvolutionResult cur = run_fixed(h, window, m, step, policy);
    const double est = checkpoint_diff(prev, cur, policy) / order;
    if (est <= tol) {
      cur.method = std::string(cf4 ? "cf_magnus4" : "midpoint_exp") +
                   "(substeps=" + std::to_string(m) + ")";
      cur.est_error = est;
      return cur;
    }
    prev = std::move(cur);
  }
  throw ToleranceNotMet("step-halving stalled at " + std::to_string(m) +
                        " substeps per cell (tol " + std::to_string(tol) + ")");
}

EvolutionResult dyson_oracle(const TimeDepHamiltonian& h,
                             const TimeWindow& window, long steps,
                             ExecPolicy policy) {
  if (steps < 1) throw BadParam("dyson_oracle needs steps >= 1");
  const long cells = window.grid_points - 1;
  const long per_cell = std::max<long>(1, (steps + cells - 1) / cells);
  auto step = [](const TimeDepHamiltonian& hh, double t, double dt) {
    return midpoint_step(hh, t, dt);
  };
  EvolutionResult fine = run_fixed(h, window, per_cell, step, policy);
  fine.method = "midpoint_product(steps=" + std::to_string(per_cell * cells) + ")";
  if (per_cell % 2 == 0) {
    EvolutionResult half = run_fixed(h, window, per_cell / 2, step, policy);
    fine.est_error = checkpoint_diff(fine, half, policy) / 3.0;
  } else {
    EvolutionResult dbl = run_fixed(h, window, per_cell * 2, step, policy);
    fine.est_error = checkpoint_diff(fine, dbl, policy) * 4.0 / 3.0;
  }
  return fine;
}

double sup_distance(const EvolutionResult& u1, const EvolutionResult& u2,
                    ExecPolicy policy) {
  if (u1.times.size() != u2.times.size())
    throw GridMismatch("checkpoint counts differ");
  for (std::size_t i = 0; i < u1.times.size(); ++i)
    if (std::abs(u1.times[i] - u2.times[i]) >
        1e-12 * std::max(1.0, std::abs(u1.times[i])))
      throw GridMismatch("checkpoint times differ at index " + std::to_string(i));
  return checkpoint_diff(u1, u2, policy);
}

Matrix floquet_generator(const TimeDepHamiltonian& h, double period,
                         double kappa, double tol) {
  if (!(period > 0.0) || !(kappa > 0.0))
    throw BadParam("floquet_generator needs period > 0 and kappa > 0");
  const double l1 = ham::l1_norm(h, period).value;
  if (!(kappa > l1 / M_PI))
    throw BranchAmbiguity("kappa=" + std::to_string(kappa) +
                          " at or below the branch threshold " +
                          std::to_string(l1 / M_PI));
  // U_kappa(period/kappa) equals the one-period propagator of h/kappa
  const TimeWindow win(period, 257);
  const EvolutionResult one =
      evolve(ham::scaled(h, 1.0 / kappa), win, Method::auto_select, tol);
  const Matrix u = one.unitaries.back();
  const Matrix k = linalg::logm_unitary(u, 1e-8);
  const Matrix hbar = (kappa / period) * k;
  const double resid =
      spectral_norm(expm_hermitian(hbar, period / kappa) - u);
  if (resid > 1e-9 + 10.0 * one.est_error)
    throw ToleranceNotMet("one-period reconstruction residual " +
                          std::to_string(resid));
  return hbar;
}

Matrix magnus2_generator(const TimeDepHamiltonian& h, double period,
                         double kappa, int panels) {
  if (!(period > 0.0) || !(kappa > 0.0))
    throw BadParam("magnus2_generator needs period > 0 and kappa > 0");
  const Matrix hbar = ham::average_hamiltonian(h, period, panels);
  const int dim = h.dim();
  Matrix c = Matrix::Zero(dim, dim);
  if (h.form() == TimeDepHamiltonian::Form::piecewise) {
    // within-piece commutators vanish; double integral is an exact sum
    const auto& bp = h.breakpoints();
    const auto& vals = h.piece_values();
    Matrix prefix = Matrix::Zero(dim, dim);
    for (std::size_t j = 0; j < vals.size() && bp[j] < period; ++j) {
      const double len = std::min(bp[j + 1], period) - bp[j];
      c += len * linalg::commutator(vals[j], prefix);
      prefix += len * vals[j];
    }
  } else {
    // cumulative prefix F on an even grid, then one outer Simpson pass over
    // g(s) = [h(s), F(s)]
    int m = 2 * std::max(2, panels);
    if (m % 4 != 0) m += 4 - (m % 4);
    const double dt = period / m;
    std::vector<Matrix> hs(static_cast<std::size_t>(m + 1));
    for_each_index(m + 1, ExecPolicy::parallel, [&](std::int64_t i) {
      hs[static_cast<std::size_t>(i)] = h.eval(dt * static_cast<double>(i));
    });
    const int half = m / 2;
    std::vector<Matrix> g(static_cast<std::size_t>(half + 1));
    Matrix f = Matrix::Zero(dim, dim);
    g[0] = Matrix::Zero(dim, dim);
    for (int k = 0; k < half; ++k) {
      g[static_cast<std::size_t>(k)] =
          linalg::commutator(hs[static_cast<std::size_t>(2 * k)], f);
      f += (dt / 3.0) * (hs[static_cast<std::size_t>(2 * k)] +
                         4.0 * hs[static_cast<std::size_t>(2 * k + 1)] +
                         hs[static_cast<std::size_t>(2 * k + 2)]);
    }
    g[static_cast<std::size_t>(half)] =
        linalg::commutator(hs[static_cast<std::size_t>(m)], f);
    const double hh = 2.0 * dt;
    for (int k = 0; k + 2 <= half; k += 2)
      c += (hh / 3.0) * (g[static_cast<std::size_t>(k)] +
                         4.0 * g[static_cast<std::size_t>(k + 1)] +
                         g[static_cast<std::size_t>(k + 2)]);
  }
  const Matrix corr =
      (linalg::cplx(0.0, -1.0) / (2.0 * kappa * period)) * c;
  Matrix out = hbar + corr;
  return 0.5 * (out + out.adjoint());
}

PropagatorCache::PropagatorCache(TimeDepHamiltonian h0,
                                 const TimeWindow& window, double tol)
    : h0_(std::move(h0)) {
  if (h0_.form() == TimeDepHamiltonian::Form::constant) {
    constant_ = true;
    return;
  }
  base_ = evolve(h0_, window, Method::auto_select, tol);
}

Matrix PropagatorCache::at(double t) const {
  if (constant_) return expm_hermitian(h0_.constant_value(), t);
  const auto& ts = base_.times;
  if (t <= ts.front()) return base_.unitaries.front();
  const double dt = ts[1] - ts[0];
  std::size_t i = static_cast<std::size_t>(std::floor(t / dt));
  if (i >= ts.size() - 1) i = ts.size() - 2;
  const double t0 = ts[i];
  const double rem = t - t0;
  Matrix u = base_.unitaries[i];
  if (rem > 1e-15 * std::max(1.0, t)) {
    // short in-cell refinement, fixed 8 CF4 substeps
    const int k = 8;
    const double sub = rem / k;
    for (int j = 0; j < k; ++j)
      u = cf4_step(h0_, t0 + sub * static_cast<double>(j), sub) * u;
  }
  return u;
}

}  // namespace evobound::prop

namespace evobound::ham {

TimeDepHamiltonian rotated_hamiltonian(const TimeDepHamiltonian& h,
                                       const TimeDepHamiltonian& h0,
                                       const TimeWindow& window, double tol) {
  if (h.dim() != h0.dim()) throw DimMismatch("rotated_hamiltonian dims differ");
  auto cache = std::make_shared<prop::PropagatorCache>(h0, window, tol);
  auto hc = h;
  auto h0c = h0;
  return TimeDepHamiltonian::sampler(h.dim(), [cache, hc, h0c](double t) {
    const Matrix u0 = cache->at(t);
    const Matrix d = hc.eval(t) - h0c.eval(t);
    Matrix out = u0.adjoint() * d * u0;
    return 0.5 * (out + out.adjoint());
  });
}

}  // namespace evobound::ham
