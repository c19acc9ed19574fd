// nbs_central.hpp
//
// Centralized reference solver for the bargaining program: maximizes the sum
// of log surpluses over the shared feasible set by projected gradient ascent
// with a backtracking line search. The log objective acts as a barrier for
// the strict disagreement constraint.

#ifndef NBSHARE_NBS_CENTRAL_HPP
#define NBSHARE_NBS_CENTRAL_HPP

#include <optional>
#include <vector>

#include "nbs/model.hpp"

namespace nbs {

struct CentralConfig {
  double step_init = 0.1;
  double backtrack = 0.5;     // line-search shrink factor, in (0,1)
  long max_iters = 50000;
  double grad_tol = 1e-6;     // on the projected-gradient map norm
  double feas_tol = 1e-6;
  int projection_sweeps = 500;
};

struct CentralReport {
  Allocation allocation;
  SurplusVector surplus;
  std::vector<double> objective_trajectory;  // nondecreasing
  long iterations = 0;
  bool converged = false;
  double final_pg_norm = 0;
};

// sum_n ln(s_n(X) - d0[n]); throws OutOfDomain on a nonpositive surplus.
double nbs_log_objective(const Instance& inst, const Allocation& X,
                         const std::vector<double>& d0);

// prod_n (s_n(X) - d0[n]); defined everywhere (used by brute-force oracles).
double nbs_product_objective(const Instance& inst, const Allocation& X,
                             const std::vector<double>& d0);

// Analytic gradient of the log objective with respect to every x[n][j][k].
// Requires positive surpluses.
std::vector<double> nbs_log_gradient(const Instance& inst, const Allocation& X,
                                     const std::vector<double>& d0);

// Alternating Euclidean projections onto the capacity polytope
// {x >= 0, sum_j x <= C[n][k]} and the request polytope
// {x >= 0, sum_n x <= r[j][k]} until both are violated by < feas_tol.
void project_feasible(const Instance& inst, Allocation& X, double feas_tol,
                      int max_sweeps);

// Shrinks each foreign allocation whose net differential utility is negative
// back toward zero (bisection; the net utility is concave and zero at zero,
// so the feasible interval always contains the origin).
void shrink_negative_foreign(const Instance& inst, Allocation& X);

// Interior starting point: 0.999-scaled standalone allocations, then greedy
// foreign grants with positive marginal net utility until every surplus is
// strictly positive. Throws InfeasibleBargain when no such point is found.
Allocation find_interior_start(const Instance& inst,
                               const std::vector<double>& d0);

// Service-heavy starting point: foreign grants up to the peak of the net
// differential utility first, native demand after. The differential terms
// make the objective multimodal, so ascent runs from both this start and
// the standalone-shaped one. Empty when the point has a nonpositive surplus.
std::optional<Allocation> cross_service_start(const Instance& inst,
                                              const std::vector<double>& d0);

CentralReport solve_central(const Instance& inst, const std::vector<double>& d0,
                            const CentralConfig& config = {});

}  // namespace nbs

#endif  // NBSHARE_NBS_CENTRAL_HPP
