#include "nbs/nbs_central.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "nbs/standalone.hpp"

namespace nbs {

namespace {

std::vector<double> surpluses(const Instance& inst, const Allocation& X,
                              const std::vector<double>& d0) {
  std::vector<double> s(inst.num_providers);
  for (int n = 0; n < inst.num_providers; ++n)
    s[n] = esp_utility_unchecked(inst, X, n) - d0[n];
  return s;
}

// Euclidean projection of v onto {x : x >= 0, sum x <= budget}.
void project_budget(std::vector<double>& v, double budget) {
  double sum = 0;
  double vmax = 0;
  for (double& e : v) {
    if (e < 0) e = 0;
    sum += e;
    vmax = std::max(vmax, e);
  }
  if (sum <= budget) return;
  if (budget <= 0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  // shift tau with sum max(v - tau, 0) == budget
  double lo = 0, hi = vmax;
  for (int it = 0; it < 100; ++it) {
    const double tau = 0.5 * (lo + hi);
    double s = 0;
    for (double e : v) s += std::max(e - tau, 0.0);
    if (s > budget)
      lo = tau;
    else
      hi = tau;
  }
  const double tau = 0.5 * (lo + hi);
  for (double& e : v) e = std::max(e - tau, 0.0);
}

}  // namespace

double nbs_log_objective(const Instance& inst, const Allocation& X,
                         const std::vector<double>& d0) {
  double sum = 0;
  for (int n = 0; n < inst.num_providers; ++n) {
    const double s = esp_utility_unchecked(inst, X, n) - d0[n];
    if (!(s > 0)) throw OutOfDomain(n, s);
    sum += std::log(s);
  }
  return sum;
}

double nbs_product_objective(const Instance& inst, const Allocation& X,
                             const std::vector<double>& d0) {
  double prod = 1;
  for (int n = 0; n < inst.num_providers; ++n)
    prod *= esp_utility_unchecked(inst, X, n) - d0[n];
  return prod;
}

std::vector<double> nbs_log_gradient(const Instance& inst, const Allocation& X,
                                     const std::vector<double>& d0) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;

  std::vector<double> inv_delta(N);
  double inv_delta_sum = 0;
  for (int n = 0; n < N; ++n) {
    const double s = esp_utility_unchecked(inst, X, n) - d0[n];
    if (!(s > 0)) throw OutOfDomain(n, s);
    inv_delta[n] = 1.0 / s;
    inv_delta_sum += inv_delta[n];
  }

  // d s_v / d x_njk = u'(T) - 1/w for v == n (native terms have no cost),
  //                   u'(T) - u'(T - x_vjk) for v != n.
  std::vector<double> grad(static_cast<size_t>(N) * M * K);
  for (int j = 0; j < M; ++j) {
    for (int k = 0; k < K; ++k) {
      const double total = X.app_total(j, k);
      const double up = utility_deriv(inst, total, j, k);
      double cross = 0;  // sum_v inv_delta[v] * u'(T - x_vjk)
      for (int v = 0; v < N; ++v)
        cross += inv_delta[v] * utility_deriv(inst, total - X.at(v, j, k), j, k);
      for (int n = 0; n < N; ++n) {
        const double own_up = utility_deriv(inst, total - X.at(n, j, k), j, k);
        double g = up * inv_delta_sum - (cross - inv_delta[n] * own_up);
        if (!inst.is_native(n, j)) g -= inv_delta[n] / inst.w(n, j);
        grad[X.idx(n, j, k)] = g;
      }
    }
  }
  return grad;
}

void project_feasible(const Instance& inst, Allocation& X, double feas_tol,
                      int max_sweeps) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  std::vector<double> buf;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (X.max_violation(inst) < feas_tol) return;
    // capacity rows
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < K; ++k) {
        buf.resize(M);
        for (int j = 0; j < M; ++j) buf[j] = X.at(n, j, k);
        project_budget(buf, inst.cap(n, k));
        for (int j = 0; j < M; ++j) X.at(n, j, k) = buf[j];
      }
    }
    // request columns
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < K; ++k) {
        buf.resize(N);
        for (int n = 0; n < N; ++n) buf[n] = X.at(n, j, k);
        project_budget(buf, inst.req(j, k));
        for (int n = 0; n < N; ++n) X.at(n, j, k) = buf[n];
      }
    }
  }
}

void shrink_negative_foreign(const Instance& inst, Allocation& X) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  constexpr double kTol = 1e-9;

  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < M; ++j) {
      if (inst.is_native(n, j)) continue;
      for (int k = 0; k < K; ++k) {
        const double x = X.at(n, j, k);
        if (x <= 0) continue;
        const double others = X.others_total(n, j, k);
        auto net = [&](double y) {
          return differential_utility(inst, y, others, n, j, k);
        };
        if (net(x) >= 0) continue;
        double lo = 0, hi = x;  // net(0) == 0, net concave
        while (hi - lo > kTol) {
          const double mid = 0.5 * (lo + hi);
          if (net(mid) >= 0)
            lo = mid;
          else
            hi = mid;
        }
        X.at(n, j, k) = lo;
      }
    }
  }
}

Allocation find_interior_start(const Instance& inst,
                               const std::vector<double>& d0) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;

  StandaloneSolution alone = disagreement_vector(inst);
  Allocation X(N, M, K);
  for (size_t i = 0; i < X.data().size(); ++i)
    X.data()[i] = 0.999 * alone.allocation.data()[i];

  auto all_positive = [&](const std::vector<double>& s) {
    return std::all_of(s.begin(), s.end(), [](double v) { return v > 0; });
  };

  std::vector<double> s = surpluses(inst, X, d0);
  if (all_positive(s)) return X;

  // Greedy repair: grant foreign resources with positive marginal net
  // utility to providers whose surplus is still nonpositive.
  constexpr int kMaxPasses = 1000;
  constexpr double kMinGain = 1e-12;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool progress = false;
    for (int n = 0; n < N; ++n) {
      if (s[n] > 0) continue;
      for (int j = 0; j < M && s[n] <= 0; ++j) {
        if (inst.is_native(n, j)) continue;
        for (int k = 0; k < K && s[n] <= 0; ++k) {
          const double room = std::min(inst.req(j, k) - X.app_total(j, k),
                                       inst.cap(n, k) - X.row_sum(n, k));
          if (room <= kMinGain) continue;
          const double others = X.others_total(n, j, k);
          const double marginal =
              utility_deriv(inst, others + X.at(n, j, k), j, k) - 1.0 / inst.w(n, j);
          if (marginal <= 0) continue;
          // stay on the increasing branch of the net utility
          const double peak =
              utility_deriv_inv(inst, 1.0 / inst.w(n, j), j, k) - others;
          const double add = std::min(room, std::max(peak - X.at(n, j, k), 0.0));
          if (add <= kMinGain) continue;
          X.at(n, j, k) += add;
          progress = true;
          s = surpluses(inst, X, d0);
        }
      }
    }
    if (all_positive(s)) return X;
    if (!progress) break;
  }
  throw InfeasibleBargain(
      "no feasible point with strictly positive surplus for every provider");
}

// The differential terms make the log objective multimodal: serving an app
// nobody else serves earns the whole utility rise from its deeply negative
// zero point, so single-sourced service-heavy allocations form their own
// basin. Ascent is run from both this start and the standalone-shaped one.
std::optional<Allocation> cross_service_start(const Instance& inst,
                                              const std::vector<double>& d0) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  Allocation X(N, M, K);

  for (int n = 0; n < N; ++n) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < M; ++j) {
        const bool native = inst.is_native(n, j);
        if ((pass == 0) == native) continue;  // foreign first
        for (int k = 0; k < K; ++k) {
          const double room = std::min(inst.req(j, k) - X.app_total(j, k),
                                       inst.cap(n, k) - X.row_sum(n, k));
          if (room <= 0) continue;
          double take = room;
          if (!native) {
            const double peak =
                utility_deriv_inv(inst, 1.0 / inst.w(n, j), j, k) -
                X.others_total(n, j, k);
            take = std::clamp(peak, 0.0, room);
          }
          X.at(n, j, k) = take;
        }
      }
    }
  }

  for (double& v : X.data()) v *= 0.999;
  project_feasible(inst, X, 1e-9, 500);
  shrink_negative_foreign(inst, X);
  for (int n = 0; n < N; ++n)
    if (!(esp_utility_unchecked(inst, X, n) - d0[n] > 0)) return std::nullopt;
  return X;
}

static CentralReport ascend_from(const Instance& inst, Allocation X,
                                 const std::vector<double>& d0,
                                 const CentralConfig& config) {
  const auto dim = static_cast<size_t>(inst.num_providers) * inst.num_apps() *
                   inst.num_resources;

  double obj = nbs_log_objective(inst, X, d0);

  CentralReport report;
  report.objective_trajectory.push_back(obj);

  auto propose = [&](const Allocation& base, const std::vector<double>& grad,
                     double step) {
    Allocation trial = base;
    for (size_t i = 0; i < dim; ++i) trial.data()[i] += step * grad[i];
    project_feasible(inst, trial, config.feas_tol, config.projection_sweeps);
    shrink_negative_foreign(inst, trial);
    return trial;
  };

  double step = config.step_init;
  long iter = 0;
  for (; iter < config.max_iters; ++iter) {
    const std::vector<double> grad = nbs_log_gradient(inst, X, d0);

    // projected-gradient map norm at the reference step
    const Allocation probe = propose(X, grad, config.step_init);
    double pg = 0;
    for (size_t i = 0; i < dim; ++i)
      pg = std::max(pg, std::abs(probe.data()[i] - X.data()[i]));
    pg /= config.step_init;
    report.final_pg_norm = pg;
    if (pg < config.grad_tol) {
      report.converged = true;
      break;
    }

    // backtracking: accept only steps that keep every surplus positive and
    // do not decrease the objective
    bool accepted = false;
    double trial_step = step;
    for (int bt = 0; bt < 80; ++bt) {
      Allocation trial = propose(X, grad, trial_step);
      double trial_obj;
      try {
        trial_obj = nbs_log_objective(inst, trial, d0);
      } catch (const OutOfDomain&) {
        trial_step *= config.backtrack;
        continue;
      }
      if (trial_obj >= obj) {
        X = std::move(trial);
        obj = trial_obj;
        step = std::min(trial_step / config.backtrack, 1e3 * config.step_init);
        accepted = true;
        break;
      }
      trial_step *= config.backtrack;
    }
    report.objective_trajectory.push_back(obj);
    if (!accepted) break;  // no improving step at any scale
  }

  report.iterations = iter;
  report.allocation = std::move(X);
  report.surplus = SurplusVector::from(inst, report.allocation, d0);
  return report;
}

CentralReport solve_central(const Instance& inst, const std::vector<double>& d0,
                            const CentralConfig& config) {
  CentralReport best = ascend_from(inst, find_interior_start(inst, d0), d0, config);
  if (std::optional<Allocation> cross = cross_service_start(inst, d0)) {
    CentralReport other = ascend_from(inst, std::move(*cross), d0, config);
    if (other.objective_trajectory.back() > best.objective_trajectory.back())
      best = std::move(other);
  }
  return best;
}

}  // namespace nbs
