#pragma once

// Time-dependent Hamiltonians in four concrete forms (constant, term-sum with
// scalar envelopes, piecewise-constant schedule, black-box sampler) plus their
// time-domain norms, integrals, averages and frame changes. Values are
// immutable once constructed; samplers must be pure functions of t.

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "evobound/linalg.hpp"
#include "evobound/parallel.hpp"

namespace evobound::ham {

using linalg::Matrix;

/// Scalar envelope with a declared smoothness class. smoothness == -1 means
/// C^inf (derivatives of any order may be requested); smoothness == n means
/// C^n, so derivative orders k <= n are available. Derivatives not supplied
/// analytically are formed by central differences of the previous order.
struct Envelope {
  std::function<double(double)> f;
  int smoothness = -1;
  std::vector<std::function<double(double)>> derivs;  // k-th entry: d^{k+1}/dt^{k+1}
  double fd_scale = 1.0;  // time scale used to pick finite-difference steps

  double operator()(double t) const { return f(t); }
  std::function<double(double)> derivative(int k) const;
};

struct Term {
  Envelope envelope;
  Matrix op;
};

class TimeDepHamiltonian {
 public:
  enum class Form { constant, term_sum, piecewise, sampler };

  static TimeDepHamiltonian constant(Matrix h);
  static TimeDepHamiltonian term_sum(std::vector<Term> terms);
  static TimeDepHamiltonian piecewise(std::vector<double> breakpoints,
                                      std::vector<Matrix> values);
  static TimeDepHamiltonian sampler(int dim, std::function<Matrix(double)> f,
                                    int smoothness = -1);

  int dim() const { return dim_; }
  Form form() const { return form_; }
  Matrix eval(double t) const;

  const Matrix& constant_value() const;
  const std::vector<Term>& terms() const;
  const std::vector<double>& breakpoints() const;
  const std::vector<Matrix>& piece_values() const;
  int sampler_smoothness() const { return smoothness_; }

  /// Largest schedule time for piecewise form, +inf otherwise.
  double schedule_end() const;

 private:
  TimeDepHamiltonian() = default;
  int dim_ = 0;
  Form form_ = Form::constant;
  Matrix const_;
  std::vector<Term> terms_;
  std::vector<double> breaks_;
  std::vector<Matrix> values_;
  std::function<Matrix(double)> sampler_;
  int smoothness_ = -1;
};

struct TimeWindow {
  double t_end = 1.0;
  int grid_points = 2;
  TimeWindow(double t_end_, int grid_points_);
  double dt() const { return t_end / (grid_points - 1); }
  double time(int i) const { return t_end * i / (grid_points - 1); }
  std::vector<double> times() const;
};

// ---------------------------------------------------------------------------
// quadrature

struct QuadScalar {
  double value = 0.0;
  double est_error = 0.0;
};

struct QuadMatrix {
  Matrix value;
  double est_error = 0.0;  // entrywise, from step-halving
};

inline constexpr int kDefaultPanels = 2048;

/// Composite Simpson on [a, b] with the stated number of panels; error
/// estimated by comparing against half the panels.
QuadScalar simpson(const std::function<double(double)>& f, double a, double b,
                   int panels = kDefaultPanels,
                   ExecPolicy policy = ExecPolicy::parallel);
QuadMatrix simpson_matrix(const std::function<Matrix(double)>& f, double a,
                          double b, int panels = kDefaultPanels,
                          ExecPolicy policy = ExecPolicy::parallel);

/// Running integral of f on the given grid: out[i] = int_0^{t_i} f. One
/// Simpson panel per grid cell. Exactness on cells is the caller's business
/// (choose the grid fine enough); the returned est_error is from comparing
/// one panel against two per cell.
std::vector<Matrix> cumulative_integral(const std::function<Matrix(double)>& f,
                                        const std::vector<double>& grid,
                                        double* est_error = nullptr,
                                        ExecPolicy policy = ExecPolicy::parallel);

// ---------------------------------------------------------------------------
// operations

/// int_0^t ||h(s)|| ds. Exact closed form for constant and piecewise forms,
/// composite Simpson otherwise.
QuadScalar l1_norm(const TimeDepHamiltonian& h, double t,
                   int panels = kDefaultPanels);

/// (int_0^t ||h(s)||^p ds)^{1/p}; p must be >= 1.
QuadScalar lp_norm(const TimeDepHamiltonian& h, double t, double p,
                   int panels = kDefaultPanels);

struct SupResult {
  double value = 0.0;
  int grid_points = 0;
};

/// sup_{s in [0, t_end]} ||h(s)|| over the window grid, with one parabolic
/// refinement around the peak cell. A grid sup is a lower estimate of the
/// true sup; bound evaluations use analytic expressions where they exist.
SupResult sup_norm(const TimeDepHamiltonian& h, const TimeWindow& window);

/// S_21(t) = int_0^t [h2(s) - h1(s)] ds.
QuadMatrix integral_action(const TimeDepHamiltonian& h2,
                           const TimeDepHamiltonian& h1, double t,
                           int panels = kDefaultPanels);

/// Mean of h over one period starting at 0.
Matrix average_hamiltonian(const TimeDepHamiltonian& h, double period,
                           int panels = kDefaultPanels);

/// Sampler form of U0(t)^dag [h(t) - h0(t)] U0(t), with U0 the propagator of
/// h0 (exact exponential when h0 is constant, cached checkpoints otherwise).
/// Defined in the propagator translation unit.
TimeDepHamiltonian rotated_hamiltonian(const TimeDepHamiltonian& h,
                                       const TimeDepHamiltonian& h0,
                                       const TimeWindow& window,
                                       double tol = 1e-10);

// ---------------------------------------------------------------------------
// combinators

/// h scaled by a real factor.
TimeDepHamiltonian scaled(const TimeDepHamiltonian& h, double factor);
/// Pointwise ca*a + cb*b; keeps an exact form when both operands share one.
TimeDepHamiltonian lincomb(const TimeDepHamiltonian& a, double ca,
                           const TimeDepHamiltonian& b, double cb);
/// h(kappa * t): the time-compressed Hamiltonian driving the fast evolutions.
TimeDepHamiltonian time_compressed(const TimeDepHamiltonian& h, double kappa);

/// Sample the window grid and check hermiticity of every value.
void validate_hermitian(const TimeDepHamiltonian& h, const TimeWindow& window,
                        double tol = 1e-10);

}  // namespace evobound::ham
