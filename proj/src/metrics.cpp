#include "nbs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nbs {

namespace {

// Mean served fraction over the native terms of one provider; nullptr
// accumulators allow reuse for the global aggregate.
void accumulate_rs(const Instance& inst, const Allocation& X, int n,
                   double& sum, long& count) {
  for (int j : inst.native_apps[n])
    for (int k = 0; k < inst.num_resources; ++k) {
      const double r = inst.req(j, k);
      if (r <= 0) continue;  // skipped, divisor reduced
      sum += X.app_total(j, k) / r;
      count += 1;
    }
}

}  // namespace

double request_satisfaction(const Instance& inst, const Allocation& X, int n) {
  double sum = 0;
  long count = 0;
  accumulate_rs(inst, X, n, sum, count);
  return count == 0 ? 0.0 : 100.0 * sum / count;
}

UtilizationResult utilization(const Instance& inst, const Allocation& X, int n,
                              int k) {
  const double cap = inst.cap(n, k);
  if (cap <= 0) return {100.0, true};
  return {100.0 * X.row_sum(n, k) / cap, false};
}

double jain_index(const std::vector<double>& values) {
  double sum = 0, sumsq = 0;
  for (double v : values) {
    sum += v;
    sumsq += v * v;
  }
  if (sumsq == 0) throw AllZero();
  return (sum * sum) / (values.size() * sumsq);
}

MetricsReport compare_alone_vs_nbs(const Instance& inst,
                                   const StandaloneSolution& alone,
                                   const Allocation& nbs_allocation) {
  const int N = inst.num_providers;
  const int K = inst.num_resources;
  MetricsReport rep;

  rep.utility_alone = alone.d0;
  rep.utility_nbs.resize(N);
  rep.surplus.resize(N);
  rep.rs_alone.resize(N);
  rep.rs_nbs.resize(N);
  rep.util_alone.resize(N);
  rep.util_nbs.resize(N);
  rep.zero_capacity.resize(N, false);

  double rs_sum_alone = 0, rs_sum_nbs = 0;
  long rs_count_alone = 0, rs_count_nbs = 0;
  double util_sum_alone = 0, util_sum_nbs = 0;
  double cap_total = 0, alloc_total_alone = 0, alloc_total_nbs = 0;

  for (int n = 0; n < N; ++n) {
    rep.utility_nbs[n] = esp_utility_unchecked(inst, nbs_allocation, n);
    rep.surplus[n] = rep.utility_nbs[n] - alone.d0[n];
    rep.rs_alone[n] = request_satisfaction(inst, alone.allocation, n);
    rep.rs_nbs[n] = request_satisfaction(inst, nbs_allocation, n);
    accumulate_rs(inst, alone.allocation, n, rs_sum_alone, rs_count_alone);
    accumulate_rs(inst, nbs_allocation, n, rs_sum_nbs, rs_count_nbs);

    double ua = 0, un = 0;
    for (int k = 0; k < K; ++k) {
      const UtilizationResult ra = utilization(inst, alone.allocation, n, k);
      const UtilizationResult rn = utilization(inst, nbs_allocation, n, k);
      ua += ra.percent;
      un += rn.percent;
      rep.zero_capacity[n] = rep.zero_capacity[n] || ra.zero_capacity;
      util_sum_alone += ra.percent;
      util_sum_nbs += rn.percent;
      cap_total += inst.cap(n, k);
      alloc_total_alone += alone.allocation.row_sum(n, k);
      alloc_total_nbs += nbs_allocation.row_sum(n, k);
    }
    rep.util_alone[n] = ua / K;
    rep.util_nbs[n] = un / K;
  }

  rep.aggregate_rs_alone = rs_count_alone ? 100.0 * rs_sum_alone / rs_count_alone : 0;
  rep.aggregate_rs_nbs = rs_count_nbs ? 100.0 * rs_sum_nbs / rs_count_nbs : 0;
  rep.aggregate_util_alone_nk = util_sum_alone / (N * K);
  rep.aggregate_util_nbs_nk = util_sum_nbs / (N * K);
  rep.aggregate_util_alone_k =
      cap_total > 0 ? 100.0 * alloc_total_alone / cap_total : 100.0;
  rep.aggregate_util_nbs_k =
      cap_total > 0 ? 100.0 * alloc_total_nbs / cap_total : 100.0;

  try {
    rep.jain_surplus = jain_index(rep.surplus);
  } catch (const AllZero&) {
    rep.jain_surplus = 1.0;  // all-equal limit
  }
  const bool all_nonneg = std::all_of(rep.utility_nbs.begin(),
                                      rep.utility_nbs.end(),
                                      [](double v) { return v >= 0; });
  rep.jain_utility = all_nonneg ? jain_index(rep.utility_nbs)
                                : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace nbs
