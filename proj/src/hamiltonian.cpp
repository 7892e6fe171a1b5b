#include "evobound/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace evobound::ham {

using linalg::spectral_norm;

std::function<double(double)> Envelope::derivative(int k) const {
  if (k == 0) return f;
  if (smoothness >= 0 && k > smoothness)
    throw SmoothnessUnavailable("derivative order " + std::to_string(k) +
                                " beyond declared class C^" +
                                std::to_string(smoothness));
  if (k <= static_cast<int>(derivs.size())) return derivs[k - 1];
  // central difference of the previous order; step widens with the order to
  // keep round-off in check
  auto prev = derivative(k - 1);
  const double step = fd_scale * std::pow(1e-16, 1.0 / (2.0 + k));
  return [prev, step](double t) {
    return (prev(t + step) - prev(t - step)) / (2.0 * step);
  };
}

TimeDepHamiltonian TimeDepHamiltonian::constant(Matrix h) {
  linalg::require_hermitian(h);
  if (!linalg::is_finite(h)) throw BadParam("constant Hamiltonian not finite");
  TimeDepHamiltonian out;
  out.dim_ = static_cast<int>(h.rows());
  out.form_ = Form::constant;
  out.const_ = std::move(h);
  return out;
}

TimeDepHamiltonian TimeDepHamiltonian::term_sum(std::vector<Term> terms) {
  if (terms.empty()) throw EmptySequence("term_sum needs at least one term");
  const int dim = static_cast<int>(terms.front().op.rows());
  for (const Term& t : terms) {
    linalg::require_hermitian(t.op);
    if (static_cast<int>(t.op.rows()) != dim)
      throw DimMismatch("term operators differ in dimension");
  }
  TimeDepHamiltonian out;
  out.dim_ = dim;
  out.form_ = Form::term_sum;
  out.terms_ = std::move(terms);
  return out;
}

TimeDepHamiltonian TimeDepHamiltonian::piecewise(std::vector<double> breakpoints,
                                                 std::vector<Matrix> values) {
  if (breakpoints.size() != values.size() + 1 || values.empty())
    throw BadParam("piecewise needs N+1 breakpoints for N values");
  if (breakpoints.front() != 0.0)
    throw BadParam("piecewise schedule must start at t=0");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw BadParam("breakpoints must be strictly increasing");
  const int dim = static_cast<int>(values.front().rows());
  for (const Matrix& v : values) {
    linalg::require_hermitian(v);
    if (static_cast<int>(v.rows()) != dim)
      throw DimMismatch("piece values differ in dimension");
  }
  TimeDepHamiltonian out;
  out.dim_ = dim;
  out.form_ = Form::piecewise;
  out.breaks_ = std::move(breakpoints);
  out.values_ = std::move(values);
  return out;
}

TimeDepHamiltonian TimeDepHamiltonian::sampler(int dim,
                                               std::function<Matrix(double)> f,
                                               int smoothness) {
  TimeDepHamiltonian out;
  out.dim_ = dim;
  out.form_ = Form::sampler;
  out.sampler_ = std::move(f);
  out.smoothness_ = smoothness;
  return out;
}

Matrix TimeDepHamiltonian::eval(double t) const {
  switch (form_) {
    case Form::constant:
      return const_;
    case Form::term_sum: {
      Matrix out = Matrix::Zero(dim_, dim_);
      for (const Term& term : terms_) out += term.envelope(t) * term.op;
      return out;
    }
    case Form::piecewise: {
      if (t < breaks_.front() || t >= breaks_.back())
        throw OutOfSchedule("t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(breaks_.back()) + ")");
      // right-open convention: value on [t_{j-1}, t_j) is values[j-1]
      const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - breaks_.begin());
      return values_[j - 1];
    }
    case Form::sampler:
      return sampler_(t);
  }
  throw BadParam("unreachable form");
}

const Matrix& TimeDepHamiltonian::constant_value() const {
  if (form_ != Form::constant) throw BadParam("not a constant Hamiltonian");
  return const_;
}

const std::vector<Term>& TimeDepHamiltonian::terms() const {
  if (form_ != Form::term_sum) throw BadParam("not a term-sum Hamiltonian");
  return terms_;
}

const std::vector<double>& TimeDepHamiltonian::breakpoints() const {
  if (form_ != Form::piecewise) throw BadParam("not a piecewise Hamiltonian");
  return breaks_;
}

const std::vector<Matrix>& TimeDepHamiltonian::piece_values() const {
  if (form_ != Form::piecewise) throw BadParam("not a piecewise Hamiltonian");
  return values_;
}

double TimeDepHamiltonian::schedule_end() const {
  if (form_ == Form::piecewise) return breaks_.back();
  return std::numeric_limits<double>::infinity();
}

TimeWindow::TimeWindow(double t_end_, int grid_points_)
    : t_end(t_end_), grid_points(grid_points_) {
  if (!(t_end > 0.0)) throw BadParam("window t_end must be positive");
  if (grid_points < 2) throw BadParam("window needs at least 2 grid points");
}

std::vector<double> TimeWindow::times() const {
  std::vector<double> out(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) out[static_cast<std::size_t>(i)] = time(i);
  return out;
}

// ---------------------------------------------------------------------------
// quadrature

namespace {

double simpson_once(const std::function<double(double)>& f, double a, double b,
                    int panels, ExecPolicy policy) {
  const double h = (b - a) / panels;
  const double sum = indexed_sum<double>(panels, 0.0, policy, [&](std::int64_t i) {
    const double lo = a + h * static_cast<double>(i);
    return f(lo) + 4.0 * f(lo + 0.5 * h) + f(lo + h);
  });
  return sum * h / 6.0;
}

Matrix simpson_matrix_once(const std::function<Matrix(double)>& f, double a,
                           double b, int panels, ExecPolicy policy) {
  const double h = (b - a) / panels;
  Matrix probe = f(a);
  Matrix zero = Matrix::Zero(probe.rows(), probe.cols());
  struct Acc {
    Matrix m;
    Acc& operator+=(const Acc& o) {
      m += o.m;
      return *this;
    }
  };
  Acc total = indexed_sum<Acc>(panels, Acc{zero}, policy, [&](std::int64_t i) {
    const double lo = a + h * static_cast<double>(i);
    return Acc{f(lo) + 4.0 * f(lo + 0.5 * h) + f(lo + h)};
  });
  return total.m * (h / 6.0);
}

}  // namespace

QuadScalar simpson(const std::function<double(double)>& f, double a, double b,
                   int panels, ExecPolicy policy) {
  if (b <= a) return {0.0, 0.0};
  panels = std::max(2, panels);
  const double coarse = simpson_once(f, a, b, panels / 2, policy);
  const double fine = simpson_once(f, a, b, panels, policy);
  return {fine, std::abs(fine - coarse) / 15.0};
}

QuadMatrix simpson_matrix(const std::function<Matrix(double)>& f, double a,
                          double b, int panels, ExecPolicy policy) {
  if (b <= a) {
    Matrix probe = f(a);
    return {Matrix::Zero(probe.rows(), probe.cols()), 0.0};
  }
  panels = std::max(2, panels);
  const Matrix coarse = simpson_matrix_once(f, a, b, panels / 2, policy);
  const Matrix fine = simpson_matrix_once(f, a, b, panels, policy);
  return {fine, (fine - coarse).cwiseAbs().maxCoeff() / 15.0};
}

std::vector<Matrix> cumulative_integral(const std::function<Matrix(double)>& f,
                                        const std::vector<double>& grid,
                                        double* est_error, ExecPolicy policy) {
  const std::size_t n = grid.size();
  std::vector<Matrix> inc(n > 0 ? n - 1 : 0);
  std::vector<double> err(n > 0 ? n - 1 : 0, 0.0);
  for_each_index(static_cast<std::int64_t>(inc.size()), policy, [&](std::int64_t i) {
    const double a = grid[static_cast<std::size_t>(i)];
    const double b = grid[static_cast<std::size_t>(i) + 1];
    const double h = b - a;
    const Matrix fa = f(a), fm = f(a + 0.5 * h), fb = f(b);
    const Matrix one = (fa + 4.0 * fm + fb) * (h / 6.0);
    const Matrix two = (fa + 4.0 * f(a + 0.25 * h) + 2.0 * fm +
                        4.0 * f(a + 0.75 * h) + fb) *
                       (h / 12.0);
    inc[static_cast<std::size_t>(i)] = two;
    err[static_cast<std::size_t>(i)] = (two - one).cwiseAbs().maxCoeff() / 15.0;
  });
  std::vector<Matrix> out;
  out.reserve(n);
  Matrix acc = f(grid.empty() ? 0.0 : grid.front());
  acc.setZero();
  out.push_back(acc);
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += inc[i];
    total_err += err[i];
    out.push_back(acc);
  }
  if (est_error) *est_error = total_err;
  return out;
}

// ---------------------------------------------------------------------------
// norms, actions, averages

namespace {

// Closed-form L1 norm of a piecewise schedule up to t (t == t_N allowed).
double l1_piecewise(const TimeDepHamiltonian& h, double t) {
  const auto& bp = h.breakpoints();
  const auto& vals = h.piece_values();
  if (t > bp.back() + 1e-12 * std::max(1.0, bp.back()))
    throw OutOfSchedule("l1_norm beyond schedule end");
  double acc = 0.0;
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double lo = bp[j];
    const double hi = std::min(bp[j + 1], t);
    if (hi <= lo) break;
    acc += (hi - lo) * spectral_norm(vals[j]);
  }
  return acc;
}

}  // namespace

QuadScalar l1_norm(const TimeDepHamiltonian& h, double t, int panels) {
  if (t < 0.0) throw BadParam("l1_norm needs t >= 0");
  if (t == 0.0) return {0.0, 0.0};
  switch (h.form()) {
    case TimeDepHamiltonian::Form::constant:
      return {t * spectral_norm(h.constant_value()), 0.0};
    case TimeDepHamiltonian::Form::piecewise:
      return {l1_piecewise(h, t), 0.0};
    default:
      return simpson([&](double s) { return spectral_norm(h.eval(s)); }, 0.0, t,
                     panels);
  }
}

QuadScalar lp_norm(const TimeDepHamiltonian& h, double t, double p, int panels) {
  if (p < 1.0) throw BadParam("lp_norm needs p >= 1");
  if (t <= 0.0) return {0.0, 0.0};
  if (h.form() == TimeDepHamiltonian::Form::constant)
    return {std::pow(t, 1.0 / p) * spectral_norm(h.constant_value()), 0.0};
  QuadScalar q = simpson(
      [&](double s) { return std::pow(spectral_norm(h.eval(s)), p); }, 0.0, t,
      panels);
  const double v = std::pow(q.value, 1.0 / p);
  const double err = q.value > 0.0 ? v * q.est_error / (p * q.value) : 0.0;
  return {v, err};
}

SupResult sup_norm(const TimeDepHamiltonian& h, const TimeWindow& window) {
  if (h.form() == TimeDepHamiltonian::Form::constant)
    return {spectral_norm(h.constant_value()), 1};
  if (h.form() == TimeDepHamiltonian::Form::piecewise) {
    double best = 0.0;
    int count = 0;
    const auto& bp = h.breakpoints();
    for (std::size_t j = 0; j + 1 < bp.size() && bp[j] < window.t_end; ++j) {
      best = std::max(best, spectral_norm(h.piece_values()[j]));
      ++count;
    }
    return {best, count};
  }
  const int n = window.grid_points;
  std::vector<double> vals(static_cast<std::size_t>(n));
  for_each_index(n, ExecPolicy::parallel, [&](std::int64_t i) {
    vals[static_cast<std::size_t>(i)] =
        spectral_norm(h.eval(window.time(static_cast<int>(i))));
  });
  int peak = 0;
  for (int i = 1; i < n; ++i)
    if (vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(peak)])
      peak = i;
  double best = vals[static_cast<std::size_t>(peak)];
  // parabolic refinement through the peak and its neighbours
  if (peak > 0 && peak + 1 < n) {
    const double fm = vals[static_cast<std::size_t>(peak - 1)];
    const double f0 = vals[static_cast<std::size_t>(peak)];
    const double fp = vals[static_cast<std::size_t>(peak + 1)];
    const double denom = fm - 2.0 * f0 + fp;
    if (denom < 0.0) {
      const double shift = 0.5 * (fm - fp) / denom;
      if (std::abs(shift) <= 1.0) {
        const double t = window.time(peak) + shift * window.dt();
        best = std::max(best, spectral_norm(h.eval(t)));
      }
    }
  }
  return {best, n};
}

QuadMatrix integral_action(const TimeDepHamiltonian& h2,
                           const TimeDepHamiltonian& h1, double t, int panels) {
  if (h2.dim() != h1.dim()) throw DimMismatch("integral_action dims differ");
  if (t < 0.0) throw BadParam("integral_action needs t >= 0");
  using F = TimeDepHamiltonian::Form;
  if (t == 0.0) return {Matrix::Zero(h2.dim(), h2.dim()), 0.0};
  auto exact_integral = [&](const TimeDepHamiltonian& h) -> Matrix {
    if (h.form() == F::constant) return t * h.constant_value();
    // piecewise
    const auto& bp = h.breakpoints();
    const auto& vals = h.piece_values();
    if (t > bp.back() + 1e-12 * std::max(1.0, bp.back()))
      throw OutOfSchedule("integral_action beyond schedule end");
    Matrix acc = Matrix::Zero(h.dim(), h.dim());
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const double lo = bp[j];
      const double hi = std::min(bp[j + 1], t);
      if (hi <= lo) break;
      acc += (hi - lo) * vals[j];
    }
    return acc;
  };
  auto is_exact = [](const TimeDepHamiltonian& h) {
    return h.form() == F::constant || h.form() == F::piecewise;
  };
  if (is_exact(h2) && is_exact(h1))
    return {exact_integral(h2) - exact_integral(h1), 0.0};
  return simpson_matrix([&](double s) { return h2.eval(s) - h1.eval(s); }, 0.0,
                        t, panels);
}

Matrix average_hamiltonian(const TimeDepHamiltonian& h, double period,
                           int panels) {
  if (!(period > 0.0)) throw BadParam("average needs period > 0");
  using F = TimeDepHamiltonian::Form;
  if (h.form() == F::constant) return h.constant_value();
  if (h.form() == F::piecewise) {
    TimeDepHamiltonian zero = TimeDepHamiltonian::constant(
        Matrix::Zero(h.dim(), h.dim()));
    return integral_action(h, zero, period).value / period;
  }
  return simpson_matrix([&](double s) { return h.eval(s); }, 0.0, period, panels)
             .value /
         period;
}

// ---------------------------------------------------------------------------
// combinators

TimeDepHamiltonian scaled(const TimeDepHamiltonian& h, double factor) {
  using F = TimeDepHamiltonian::Form;
  switch (h.form()) {
    case F::constant:
      return TimeDepHamiltonian::constant(factor * h.constant_value());
    case F::term_sum: {
      std::vector<Term> terms = h.terms();
      for (Term& t : terms) t.op *= factor;
      return TimeDepHamiltonian::term_sum(std::move(terms));
    }
    case F::piecewise: {
      std::vector<Matrix> vals = h.piece_values();
      for (Matrix& v : vals) v *= factor;
      return TimeDepHamiltonian::piecewise(h.breakpoints(), std::move(vals));
    }
    case F::sampler: {
      auto inner = h;
      return TimeDepHamiltonian::sampler(
          h.dim(), [inner, factor](double t) { return factor * inner.eval(t); },
          h.sampler_smoothness());
    }
  }
  throw BadParam("unreachable form");
}

TimeDepHamiltonian lincomb(const TimeDepHamiltonian& a, double ca,
                           const TimeDepHamiltonian& b, double cb) {
  if (a.dim() != b.dim()) throw DimMismatch("lincomb dims differ");
  using F = TimeDepHamiltonian::Form;
  if (a.form() == F::constant && b.form() == F::constant)
    return TimeDepHamiltonian::constant(ca * a.constant_value() +
                                        cb * b.constant_value());
  if (a.form() == F::term_sum && b.form() == F::term_sum) {
    std::vector<Term> terms = scaled(a, ca).terms();
    for (const Term& t : scaled(b, cb).terms()) terms.push_back(t);
    return TimeDepHamiltonian::term_sum(std::move(terms));
  }
  if (a.form() == F::constant && b.form() == F::term_sum)
    return lincomb(b, cb, a, ca);
  if (a.form() == F::term_sum && b.form() == F::constant) {
    std::vector<Term> terms = scaled(a, ca).terms();
    terms.push_back(Term{Envelope{[](double) { return 1.0; }, -1, {}},
                         cb * b.constant_value()});
    return TimeDepHamiltonian::term_sum(std::move(terms));
  }
  auto ac = a;
  auto bc = b;
  return TimeDepHamiltonian::sampler(
      a.dim(),
      [ac, bc, ca, cb](double t) { return ca * ac.eval(t) + cb * bc.eval(t); });
}

TimeDepHamiltonian time_compressed(const TimeDepHamiltonian& h, double kappa) {
  if (!(kappa > 0.0)) throw BadParam("time compression needs kappa > 0");
  using F = TimeDepHamiltonian::Form;
  switch (h.form()) {
    case F::constant:
      return h;
    case F::term_sum: {
      std::vector<Term> terms;
      for (const Term& t : h.terms()) {
        Envelope e;
        auto inner = t.envelope;
        e.f = [inner, kappa](double s) { return inner.f(kappa * s); };
        e.smoothness = inner.smoothness;
        e.fd_scale = inner.fd_scale / kappa;
        for (std::size_t k = 0; k < inner.derivs.size(); ++k) {
          auto d = inner.derivs[k];
          const double fac = std::pow(kappa, static_cast<double>(k + 1));
          e.derivs.push_back(
              [d, kappa, fac](double s) { return fac * d(kappa * s); });
        }
        terms.push_back(Term{std::move(e), t.op});
      }
      return TimeDepHamiltonian::term_sum(std::move(terms));
    }
    case F::piecewise: {
      std::vector<double> bp = h.breakpoints();
      for (double& x : bp) x /= kappa;
      return TimeDepHamiltonian::piecewise(std::move(bp), h.piece_values());
    }
    case F::sampler: {
      auto inner = h;
      return TimeDepHamiltonian::sampler(
          h.dim(), [inner, kappa](double s) { return inner.eval(kappa * s); },
          h.sampler_smoothness());
    }
  }
  throw BadParam("unreachable form");
}

void validate_hermitian(const TimeDepHamiltonian& h, const TimeWindow& window,
                        double tol) {
  for (int i = 0; i < window.grid_points; ++i) {
    double t = window.time(i);
    if (t >= h.schedule_end()) break;
    linalg::require_hermitian(h.eval(t), tol);
  }
}

}  // namespace evobound::ham
