// standalone.hpp
//
// Single-provider allocation: each provider maximizes the sum of its native
// utilities subject to capacity, request caps and nonnegativity. The optima
// are the disagreement points of the bargaining problem.

#ifndef NBSHARE_STANDALONE_HPP
#define NBSHARE_STANDALONE_HPP

#include <vector>

#include "nbs/model.hpp"

namespace nbs {

// Solution of one provider's standalone problem. Allocations are stored for
// the provider's native apps only, indexed [local_j * K + k] following the
// order of Instance::native_apps[n].
struct StandaloneSlice {
  int provider = 0;
  std::vector<double> x;
  double objective = 0;  // sum of native utilities at the optimum
};

// Full standalone solution: per-provider slices embedded into an N*M*K
// allocation (foreign entries zero) plus the disagreement vector.
struct StandaloneSolution {
  Allocation allocation;
  std::vector<double> d0;
};

// Solves the provider's problem one resource at a time (the objective is
// separable across resources, coupled only by the per-resource capacity).
// If total demand fits, requests are met in full; otherwise a common-shift
// water-filling level is found by bisection so the capacity binds and all
// unclamped apps share one marginal utility.
StandaloneSlice solve_alone(const Instance& inst, int n);

// solve_alone for every provider.
StandaloneSolution disagreement_vector(const Instance& inst);

}  // namespace nbs

#endif  // NBSHARE_STANDALONE_HPP
