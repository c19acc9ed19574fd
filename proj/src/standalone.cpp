#include "nbs/standalone.hpp"

#include <algorithm>
#include <cmath>

namespace nbs {

namespace {

constexpr double kCapTol = 1e-9;
constexpr int kMaxBisect = 200;

// Water-filling for one (provider, resource) pair. Allocations follow
// x_j(t) = clamp(r_j - delta_j + ln(scale_j) - t, 0, r_j); the sum is
// continuous and nonincreasing in t, so the level t with sum == C is found
// by bisection. Unclamped apps then share the marginal utility exp(t).
void fill_resource(const Instance& inst, const std::vector<int>& apps, int k,
                   double cap, std::vector<double>& out, int stride_k,
                   int local_base) {
  const int count = static_cast<int>(apps.size());
  double demand = 0;
  for (int j : apps) demand += inst.req(j, k);

  if (demand <= cap) {  // monotone utility saturates every request
    for (int a = 0; a < count; ++a)
      out[(local_base + a) * stride_k + k] = inst.req(apps[a], k);
    return;
  }
  if (cap <= 0) {
    for (int a = 0; a < count; ++a) out[(local_base + a) * stride_k + k] = 0;
    return;
  }

  auto level_alloc = [&](int a, double t) {
    const int j = apps[a];
    const double raw = inst.req(j, k) - inst.delta[j] + std::log(inst.scale[j]) - t;
    return std::clamp(raw, 0.0, inst.req(j, k));
  };
  auto level_sum = [&](double t) {
    double s = 0;
    for (int a = 0; a < count; ++a) s += level_alloc(a, t);
    return s;
  };

  // sum(lo) = full demand > cap, sum(hi) = 0 < cap
  double lo = std::log(inst.scale[apps[0]]) - inst.delta[apps[0]];
  double hi = inst.req(apps[0], k) - inst.delta[apps[0]] + std::log(inst.scale[apps[0]]);
  for (int a = 1; a < count; ++a) {
    const int j = apps[a];
    lo = std::min(lo, std::log(inst.scale[j]) - inst.delta[j]);
    hi = std::max(hi, inst.req(j, k) - inst.delta[j] + std::log(inst.scale[j]));
  }

  double t = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisect; ++it) {
    t = 0.5 * (lo + hi);
    const double s = level_sum(t);
    if (std::abs(s - cap) <= kCapTol) break;
    if (s > cap)
      lo = t;
    else
      hi = t;
  }
  for (int a = 0; a < count; ++a)
    out[(local_base + a) * stride_k + k] = level_alloc(a, t);
}

}  // namespace

StandaloneSlice solve_alone(const Instance& inst, int n) {
  const int K = inst.num_resources;
  const auto& apps = inst.native_apps[n];

  StandaloneSlice slice;
  slice.provider = n;
  slice.x.assign(apps.size() * K, 0.0);
  for (int k = 0; k < K; ++k)
    fill_resource(inst, apps, k, inst.cap(n, k), slice.x, K, 0);

  for (size_t a = 0; a < apps.size(); ++a)
    for (int k = 0; k < K; ++k)
      slice.objective += utility_eval(inst, slice.x[a * K + k], apps[a], k);
  return slice;
}

StandaloneSolution disagreement_vector(const Instance& inst) {
  StandaloneSolution sol;
  sol.allocation = Allocation(inst.num_providers, inst.num_apps(), inst.num_resources);
  sol.d0.resize(inst.num_providers);
  for (int n = 0; n < inst.num_providers; ++n) {
    StandaloneSlice slice = solve_alone(inst, n);
    const auto& apps = inst.native_apps[n];
    for (size_t a = 0; a < apps.size(); ++a)
      for (int k = 0; k < inst.num_resources; ++k)
        sol.allocation.at(n, apps[a], k) = slice.x[a * inst.num_resources + k];
    sol.d0[n] = slice.objective;
  }
  return sol;
}

}  // namespace nbs
