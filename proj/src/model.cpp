#include "nbs/model.hpp"

#include <algorithm>
#include <cmath>

namespace nbs {

void Instance::finalize() {
  if (num_providers < 1) throw BadConfig("need at least one provider");
  if (num_resources < 1) throw BadConfig("need at least one resource");
  if (static_cast<int>(native_apps.size()) != num_providers)
    throw BadConfig("native_apps size does not match provider count");

  size_t total_apps = 0;
  for (const auto& apps : native_apps) total_apps += apps.size();
  if (total_apps == 0) throw BadConfig("no applications");

  if (requests.size() != total_apps * num_resources)
    throw BadConfig("requests size does not match app/resource counts");
  if (capacity.size() != static_cast<size_t>(num_providers) * num_resources)
    throw BadConfig("capacity size does not match provider/resource counts");
  if (delta.size() != total_apps || scale.size() != total_apps)
    throw BadConfig("utility parameter vectors must have one entry per app");
  if (comm_weight.size() != static_cast<size_t>(num_providers) * total_apps)
    throw BadConfig("comm_weight size does not match provider/app counts");

  // {M_n} must partition {0..M-1}: disjoint and covering.
  owner.assign(total_apps, -1);
  for (int n = 0; n < num_providers; ++n) {
    for (int j : native_apps[n]) {
      if (j < 0 || j >= static_cast<int>(total_apps))
        throw BadConfig("app id " + std::to_string(j) + " out of range");
      if (owner[j] != -1)
        throw BadConfig("app " + std::to_string(j) +
                        " appears in more than one native set");
      owner[j] = n;
    }
  }
  for (size_t j = 0; j < total_apps; ++j)
    if (owner[j] == -1)
      throw BadConfig("app " + std::to_string(j) + " has no native provider");

  for (double c : capacity)
    if (!std::isfinite(c) || c < 0) throw BadConfig("capacities must be finite and >= 0");
  for (double r : requests)
    if (!std::isfinite(r) || r < 0) throw BadConfig("requests must be finite and >= 0");
  for (double d : delta)
    if (!std::isfinite(d) || d <= 0) throw BadConfig("delta must be > 0");
  for (double s : scale)
    if (!std::isfinite(s) || s <= 0) throw BadConfig("scale must be > 0");
  for (int n = 0; n < num_providers; ++n)
    for (size_t j = 0; j < total_apps; ++j)
      if (owner[j] != n) {
        double wv = comm_weight[n * total_apps + j];
        if (!std::isfinite(wv) || wv <= 0)
          throw BadConfig("comm weight for provider " + std::to_string(n) +
                          ", app " + std::to_string(j) + " must be > 0");
      }
  if (!(feas_tol > 0)) throw BadConfig("feas_tol must be > 0");
}

double Allocation::app_total(int j, int k) const {
  double s = 0;
  for (int n = 0; n < n_; ++n) s += x_[idx(n, j, k)];
  return s;
}

double Allocation::others_total(int n, int j, int k) const {
  return app_total(j, k) - x_[idx(n, j, k)];
}

double Allocation::row_sum(int n, int k) const {
  double s = 0;
  for (int j = 0; j < m_; ++j) s += x_[idx(n, j, k)];
  return s;
}

double Allocation::max_violation(const Instance& inst) const {
  double v = 0;
  for (double xi : x_) v = std::max(v, -xi);
  for (int n = 0; n < n_; ++n)
    for (int k = 0; k < k_; ++k)
      v = std::max(v, row_sum(n, k) - inst.cap(n, k));
  for (int j = 0; j < m_; ++j)
    for (int k = 0; k < k_; ++k)
      v = std::max(v, app_total(j, k) - inst.req(j, k));
  return v;
}

double utility_eval(const Instance& inst, double total, int j, int k) {
  return inst.scale[j] * (1.0 - std::exp(-(total - inst.req(j, k) + inst.delta[j])));
}

double utility_deriv(const Instance& inst, double total, int j, int k) {
  return inst.scale[j] * std::exp(-(total - inst.req(j, k) + inst.delta[j]));
}

double utility_deriv_inv(const Instance& inst, double v, int j, int k) {
  if (!(v > 0)) throw NonPositiveTarget(v);
  return inst.req(j, k) - inst.delta[j] - std::log(v / inst.scale[j]);
}

double comm_cost(const Instance& inst, double x, int n, int j) {
  if (inst.is_native(n, j)) throw NativeApp(n, j);
  return x / inst.w(n, j);
}

double differential_utility(const Instance& inst, double x,
                            double others_total, int n, int j, int k) {
  if (inst.is_native(n, j)) throw NativeApp(n, j);
  return utility_eval(inst, others_total + x, j, k) -
         utility_eval(inst, others_total, j, k) - x / inst.w(n, j);
}

double esp_utility_unchecked(const Instance& inst, const Allocation& X, int n) {
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  double total = 0;
  for (int j = 0; j < M; ++j) {
    const bool native = inst.is_native(n, j);
    const double inv_w = native ? 0.0 : 1.0 / inst.w(n, j);
    for (int k = 0; k < K; ++k) {
      const double own = X.at(n, j, k);
      const double all = X.app_total(j, k);
      total += utility_eval(inst, all, j, k) -
               utility_eval(inst, all - own, j, k) - inv_w * own;
    }
  }
  return total;
}

double esp_utility(const Instance& inst, const Allocation& X, int n) {
  const double viol = X.max_violation(inst);
  if (viol > inst.feas_tol) throw InfeasibleAllocation(viol);
  return esp_utility_unchecked(inst, X, n);
}

SurplusVector SurplusVector::from(const Instance& inst, const Allocation& X,
                                  const std::vector<double>& d0) {
  SurplusVector sv;
  sv.d0 = d0;
  sv.coop.resize(inst.num_providers);
  sv.surplus.resize(inst.num_providers);
  for (int n = 0; n < inst.num_providers; ++n) {
    sv.coop[n] = esp_utility_unchecked(inst, X, n);
    sv.surplus[n] = sv.coop[n] - d0[n];
  }
  return sv;
}

}  // namespace nbs
