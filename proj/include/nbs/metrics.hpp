// metrics.hpp
//
// Evaluation quantities: request satisfaction, resource utilization, Jain's
// fairness index, and the alone-vs-bargained comparison report.

#ifndef NBSHARE_METRICS_HPP
#define NBSHARE_METRICS_HPP

#include <vector>

#include "nbs/model.hpp"
#include "nbs/standalone.hpp"

namespace nbs {

struct UtilizationResult {
  double percent = 0;
  bool zero_capacity = false;  // reported as 100% by convention
};

// Average over provider n's native (j,k) terms of allocated/requested, as a
// percentage. Zero-request terms are skipped and the divisor reduced.
double request_satisfaction(const Instance& inst, const Allocation& X, int n);

// sum_j x[n][j][k] / C[n][k] as a percentage.
UtilizationResult utilization(const Instance& inst, const Allocation& X, int n,
                              int k);

// (sum v)^2 / (N * sum v^2) for nonnegative values; throws AllZero.
double jain_index(const std::vector<double>& values);

struct MetricsReport {
  // per provider
  std::vector<double> utility_alone;   // d0
  std::vector<double> utility_nbs;     // cooperative utilities
  std::vector<double> surplus;         // utility_nbs - utility_alone
  std::vector<double> rs_alone;        // request satisfaction, percent
  std::vector<double> rs_nbs;
  std::vector<double> util_alone;      // mean utilization over resources
  std::vector<double> util_nbs;
  std::vector<bool> zero_capacity;     // any zero-capacity resource flagged

  // aggregates
  double aggregate_rs_alone = 0;  // mean over all counted (j,k) terms
  double aggregate_rs_nbs = 0;
  double aggregate_util_alone_nk = 0;  // mean over provider-resource pairs
  double aggregate_util_nbs_nk = 0;
  double aggregate_util_alone_k = 0;   // total allocated / total capacity
  double aggregate_util_nbs_k = 0;

  // Jain over surpluses (bargaining gains); raw-utility Jain only when all
  // utilities are nonnegative, else NaN
  double jain_surplus = 0;
  double jain_utility = 0;
};

MetricsReport compare_alone_vs_nbs(const Instance& inst,
                                   const StandaloneSolution& alone,
                                   const Allocation& nbs_allocation);

}  // namespace nbs

#endif  // NBSHARE_METRICS_HPP
