#pragma once

// Time-ordered exponentials: the fixed-step commutator-free 4th-order Magnus
// integrator used everywhere, the independent midpoint product oracle used to
// cross-validate it, Floquet effective generators, and checkpoint distances.
// Ordered products place later-time factors on the left.

#include <memory>
#include <string>
#include <vector>

#include "evobound/hamiltonian.hpp"

namespace evobound::prop {

using ham::TimeDepHamiltonian;
using ham::TimeWindow;
using linalg::Matrix;

struct EvolutionResult {
  std::vector<double> times;
  std::vector<Matrix> unitaries;  // checkpoints U(t_i), U(0) = identity
  std::string method;
  double est_error = 0.0;  // operator-norm estimate from step-halving
};

enum class Method { auto_select, piecewise_exact, midpoint_exp, cf_magnus4 };

/// Propagator checkpoints on the window grid. auto_select takes the exact
/// exponential path for constant and piecewise forms and CF-Magnus-4
/// otherwise. Fixed step, halved until the step-halving estimate meets tol;
/// throws ToleranceNotMet if halving stalls.
EvolutionResult evolve(const TimeDepHamiltonian& h, const TimeWindow& window,
                       Method method = Method::auto_select, double tol = 1e-9,
                       ExecPolicy policy = ExecPolicy::parallel);

/// Independent first-order product integrator prod_j exp(-i dt H(s_j)) with
/// s_j the step midpoints; cross-validation oracle only. `steps` is rounded
/// up to a multiple of the cell count so the step stays uniform; the actual
/// count is recorded in the method string.
EvolutionResult dyson_oracle(const TimeDepHamiltonian& h,
                             const TimeWindow& window, long steps,
                             ExecPolicy policy = ExecPolicy::parallel);

/// max_i || u2(t_i) - u1(t_i) ||. Grids must agree.
double sup_distance(const EvolutionResult& u1, const EvolutionResult& u2,
                    ExecPolicy policy = ExecPolicy::parallel);

/// Effective generator reproducing the evolution of h(kappa t) exactly at
/// every period: Hbar_kappa = (i kappa / tau) log U_kappa(tau/kappa).
/// Requires kappa > l1_norm(h, tau)/pi so the principal branch is the
/// consistent choice; otherwise throws BranchAmbiguity.
Matrix floquet_generator(const TimeDepHamiltonian& h, double period,
                         double kappa, double tol = 1e-11);

/// Average Hamiltonian plus the second-order double-integral correction
/// -(i / 2 kappa tau) int_0^tau ds int_0^s du [h(s), h(u)]; differs from
/// floquet_generator by O(1/kappa^2).
Matrix magnus2_generator(const TimeDepHamiltonian& h, double period,
                         double kappa, int panels = ham::kDefaultPanels);

/// U0(t) evaluated at arbitrary times: exact exponential for constant h0,
/// cached checkpoints plus a short in-cell integration otherwise. Immutable
/// after construction, safe to share across threads.
class PropagatorCache {
 public:
  PropagatorCache(TimeDepHamiltonian h0, const TimeWindow& window,
                  double tol = 1e-10);
  Matrix at(double t) const;
  int dim() const { return h0_.dim(); }

 private:
  TimeDepHamiltonian h0_;
  bool constant_ = false;
  EvolutionResult base_;
};

}  // namespace evobound::prop
