// Shared fixtures and independent oracles for the test suites.

#ifndef NBSHARE_TESTS_HELPERS_HPP
#define NBSHARE_TESTS_HELPERS_HPP

#include <cmath>
#include <random>
#include <vector>

#include "nbs/io.hpp"
#include "nbs/model.hpp"

namespace testutil {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Two providers, one resource, one app each. Used by the brute-force grid
// oracle and the hand-checked examples.
inline nbs::Instance tiny_instance(double c0 = 1.0, double c1 = 2.0,
                                   double r0 = 2.0, double r1 = 1.0,
                                   double w = 10.0) {
  nbs::Instance inst;
  inst.num_providers = 2;
  inst.num_resources = 1;
  inst.native_apps = {{0}, {1}};
  inst.capacity = {c0, c1};
  inst.requests = {r0, r1};
  inst.delta = {1.0, 1.0};
  inst.scale = {1.0, 1.0};
  inst.comm_weight = {0.0, w, w, 0.0};
  inst.finalize();
  return inst;
}

// Two providers, two resources, two apps each, uneven parameters; small
// enough for term-by-term hand enumeration.
inline nbs::Instance hand_instance() {
  nbs::Instance inst;
  inst.num_providers = 2;
  inst.num_resources = 2;
  inst.native_apps = {{0, 1}, {2, 3}};
  inst.capacity = {3.0, 2.5, 4.0, 3.5};
  inst.requests = {2.0, 1.5,   // app 0
                   1.0, 2.5,   // app 1
                   3.0, 1.0,   // app 2
                   1.5, 2.0};  // app 3
  inst.delta = {1.0, 0.8, 1.2, 1.0};
  inst.scale = {1.0, 1.5, 1.0, 0.7};
  inst.comm_weight = {0.0, 0.0, 8.0, 12.0,   // provider 0 serving apps 2,3
                      9.0, 11.0, 0.0, 0.0};  // provider 1 serving apps 0,1
  inst.finalize();
  return inst;
}

// Seeded preset-shaped instance via the generator.
inline nbs::Instance preset_instance(int preset, std::uint64_t seed) {
  nbs::ExperimentConfig config;
  config.preset = preset;
  config.seed = seed;
  nbs::apply_preset(config);
  return nbs::generate_instance(config);
}

// A feasible allocation drawn uniformly inside the box, then scaled onto the
// constraint polytope.
inline nbs::Allocation random_feasible(const nbs::Instance& inst,
                                       std::mt19937_64& rng,
                                       double fill = 0.9) {
  nbs::Allocation X(inst.num_providers, inst.num_apps(), inst.num_resources);
  for (double& v : X.data()) v = uniform01(rng);
  // scale columns into request caps, then rows into capacity
  for (int j = 0; j < inst.num_apps(); ++j)
    for (int k = 0; k < inst.num_resources; ++k) {
      const double total = X.app_total(j, k);
      if (total <= 0) continue;
      const double want = fill * inst.req(j, k);
      for (int n = 0; n < inst.num_providers; ++n)
        X.at(n, j, k) *= want / total;
    }
  for (int n = 0; n < inst.num_providers; ++n)
    for (int k = 0; k < inst.num_resources; ++k) {
      const double row = X.row_sum(n, k);
      const double cap = fill * inst.cap(n, k);
      if (row > cap && row > 0)
        for (int j = 0; j < inst.num_apps(); ++j)
          X.at(n, j, k) *= cap / row;
    }
  return X;
}

// Self-contained projected gradient ascent for one provider's standalone
// problem; the generic reference the water-filling is checked against.
inline std::vector<double> alone_pg_oracle(const nbs::Instance& inst, int n,
                                           long iters = 30000,
                                           double step = 0.05) {
  const int K = inst.num_resources;
  const auto& apps = inst.native_apps[n];
  std::vector<double> x(apps.size() * K, 0.0);

  auto project = [&](int k) {
    double sum = 0;
    for (size_t a = 0; a < apps.size(); ++a) {
      double& v = x[a * K + k];
      v = std::clamp(v, 0.0, inst.req(apps[a], k));
      sum += v;
    }
    const double cap = inst.cap(n, k);
    if (sum <= cap) return;
    double lo = 0, hi = 0;
    for (size_t a = 0; a < apps.size(); ++a) hi = std::max(hi, x[a * K + k]);
    for (int it = 0; it < 100; ++it) {
      const double tau = 0.5 * (lo + hi);
      double s = 0;
      for (size_t a = 0; a < apps.size(); ++a)
        s += std::clamp(x[a * K + k] - tau, 0.0, inst.req(apps[a], k));
      if (s > cap)
        lo = tau;
      else
        hi = tau;
    }
    const double tau = 0.5 * (lo + hi);
    for (size_t a = 0; a < apps.size(); ++a) {
      double& v = x[a * K + k];
      v = std::clamp(v - tau, 0.0, inst.req(apps[a], k));
    }
  };

  for (long it = 0; it < iters; ++it) {
    for (size_t a = 0; a < apps.size(); ++a)
      for (int k = 0; k < K; ++k)
        x[a * K + k] += step * nbs::utility_deriv(inst, x[a * K + k], apps[a], k);
    for (int k = 0; k < K; ++k) project(k);
  }
  return x;
}

inline double alone_objective(const nbs::Instance& inst, int n,
                              const std::vector<double>& x) {
  const int K = inst.num_resources;
  const auto& apps = inst.native_apps[n];
  double obj = 0;
  for (size_t a = 0; a < apps.size(); ++a)
    for (int k = 0; k < K; ++k)
      obj += nbs::utility_eval(inst, x[a * K + k], apps[a], k);
  return obj;
}

struct TinyGridResult {
  double product = -1e300;
  double x00 = 0, x01 = 0, x10 = 0, x11 = 0;  // x[provider][app], K = 1
};

// Exhaustive grid search maximizing the product of surpluses for the tiny
// two-provider instance, honoring capacity, request, nonnegativity and the
// foreign net-utility constraints. Entirely independent of the solvers.
inline TinyGridResult tiny_grid_oracle(const nbs::Instance& inst,
                                       const std::vector<double>& d0,
                                       double step = 0.01) {
  const double c0 = inst.cap(0, 0), c1 = inst.cap(1, 0);
  const double r0 = inst.req(0, 0), r1 = inst.req(1, 0);
  const double w01 = inst.w(0, 1), w10 = inst.w(1, 0);

  auto grid = [&](double hi) { return static_cast<int>(std::floor(hi / step + 1e-9)); };
  auto u_tab = [&](int j, double max_total) {
    std::vector<double> tab(grid(max_total) + 2);
    for (size_t i = 0; i < tab.size(); ++i)
      tab[i] = inst.scale[j] *
               (1.0 - std::exp(-(i * step - inst.req(j, 0) + inst.delta[j])));
    return tab;
  };
  const std::vector<double> u0 = u_tab(0, r0 + step);
  const std::vector<double> u1 = u_tab(1, r1 + step);

  TinyGridResult best;
  const int i00_max = grid(std::min(c0, r0));
  for (int i00 = 0; i00 <= i00_max; ++i00) {
    const double x00 = i00 * step;
    const int i01_max = grid(std::min(c0 - x00, r1));
    for (int i01 = 0; i01 <= i01_max; ++i01) {
      const double x01 = i01 * step;
      const int i10_max = grid(std::min(c1, r0 - x00));
      for (int i10 = 0; i10 <= i10_max; ++i10) {
        const double x10 = i10 * step;
        const double f1 = u0[i00 + i10] - u0[i00] - x10 / w10;
        if (f1 < 0) continue;  // provider 1 serving app 0 at a net loss
        const int i11_max = grid(std::min(c1 - x10, r1 - x01));
        for (int i11 = 0; i11 <= i11_max; ++i11) {
          const double x11 = i11 * step;
          const double f0 = u1[i01 + i11] - u1[i11] - x01 / w01;
          if (f0 < 0) continue;
          const double s0 = (u0[i00 + i10] - u0[i10]) + f0 - d0[0];
          const double s1 = (u1[i01 + i11] - u1[i01]) + f1 - d0[1];
          const double product = s0 * s1;
          if (product > best.product) {
            best = {product, x00, x01, x10, x11};
          }
        }
      }
    }
  }
  return best;
}

}  // namespace testutil

#endif  // NBSHARE_TESTS_HELPERS_HPP
