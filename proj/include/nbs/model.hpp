// model.hpp
//
// Problem data model for NBS resource sharing among edge service providers:
// instances (capacities, requests, native app sets), allocation tensors, the
// exponential utility family with its derivative and inverse, communication
// cost, differential utility, and per-provider cooperative utility.

#ifndef NBSHARE_MODEL_HPP
#define NBSHARE_MODEL_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace nbs {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Inverse marginal utility requested at a nonpositive target.
class NonPositiveTarget : public Error {
 public:
  explicit NonPositiveTarget(double v)
      : Error("inverse marginal utility undefined for target " +
              std::to_string(v)) {}
};

/// Communication cost or differential utility queried for a native app.
class NativeApp : public Error {
 public:
  NativeApp(int provider, int app)
      : Error("app " + std::to_string(app) + " is native to provider " +
              std::to_string(provider)) {}
};

/// Allocation violates feasibility beyond the instance tolerance.
class InfeasibleAllocation : public Error {
 public:
  explicit InfeasibleAllocation(double violation)
      : Error("allocation infeasible, max violation " +
              std::to_string(violation)) {}
};

/// Log-domain entered with a nonpositive surplus (disagreement constraint).
class OutOfDomain : public Error {
 public:
  OutOfDomain(int provider, double surplus)
      : Error("provider " + std::to_string(provider) +
              " has nonpositive surplus " + std::to_string(surplus)) {}
};

/// No feasible point gives every provider a strictly positive surplus.
class InfeasibleBargain : public Error {
 public:
  explicit InfeasibleBargain(const std::string& msg) : Error(msg) {}
};

class BadConfig : public Error {
 public:
  explicit BadConfig(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  long line;
};

class MissingColumn : public Error {
 public:
  explicit MissingColumn(const std::string& name)
      : Error("required column missing: " + name) {}
};

/// Jain's index is undefined when every value is zero.
class AllZero : public Error {
 public:
  AllZero() : Error("all values are zero") {}
};

// ---------------------------------------------------------------------------
// Instance

// Full problem statement. Applications carry global ids 0..M-1; the native
// sets M_n partition them, so each app has exactly one native provider.
struct Instance {
  int num_providers = 0;  // N
  int num_resources = 0;  // K

  std::vector<std::vector<int>> native_apps;  // per provider, global app ids
  std::vector<double> capacity;               // N*K, C[n][k] >= 0
  std::vector<double> requests;               // M*K, r[j][k] >= 0
  std::vector<double> delta;                  // per app, > 0
  std::vector<double> scale;                  // per app, > 0
  std::vector<double> comm_weight;            // N*M, w[n][j] > 0 for foreign j

  double feas_tol = 1e-6;

  // app -> native provider, filled by finalize()
  std::vector<int> owner;

  int num_apps() const { return static_cast<int>(requests.size()) / num_resources; }

  double cap(int n, int k) const { return capacity[n * num_resources + k]; }
  double req(int j, int k) const { return requests[j * num_resources + k]; }
  double w(int n, int j) const { return comm_weight[n * num_apps() + j]; }

  bool is_native(int n, int j) const { return owner[j] == n; }

  // Validates every invariant (partition, positivity, finiteness) and builds
  // the owner map. Throws BadConfig. Must be called before use.
  void finalize();
};

// ---------------------------------------------------------------------------
// Allocation

// x[n][j][k]: amount of resource k granted by provider n to application j.
class Allocation {
 public:
  Allocation() = default;
  Allocation(int providers, int apps, int resources)
      : n_(providers), m_(apps), k_(resources),
        x_(static_cast<size_t>(providers) * apps * resources, 0.0) {}

  int providers() const { return n_; }
  int apps() const { return m_; }
  int resources() const { return k_; }

  double& at(int n, int j, int k) { return x_[idx(n, j, k)]; }
  double at(int n, int j, int k) const { return x_[idx(n, j, k)]; }

  /// Total allocated to app j for resource k, summed over providers.
  double app_total(int j, int k) const;
  /// app_total minus provider n's own share.
  double others_total(int n, int j, int k) const;
  /// Provider n's usage of resource k, summed over apps.
  double row_sum(int n, int k) const;

  std::vector<double>& data() { return x_; }
  const std::vector<double>& data() const { return x_; }

  // Largest violation of x >= 0, row sums <= C, app totals <= r.
  double max_violation(const Instance& inst) const;
  bool feasible(const Instance& inst, double tol) const {
    return max_violation(inst) <= tol;
  }

  size_t idx(int n, int j, int k) const {
    return (static_cast<size_t>(n) * m_ + j) * k_ + k;
  }

 private:
  int n_ = 0, m_ = 0, k_ = 0;
  std::vector<double> x_;
};

// ---------------------------------------------------------------------------
// Utility family (concave, injective, invertible first derivative)

// u_jk(total) = scale_j * (1 - exp(-(total - r[j][k] + delta_j)))
double utility_eval(const Instance& inst, double total, int j, int k);

// u'_jk(total) = scale_j * exp(-(total - r[j][k] + delta_j)); always > 0.
double utility_deriv(const Instance& inst, double total, int j, int k);

// y with u'_jk(y) = v, i.e. r[j][k] - delta_j - ln(v / scale_j).
// The result may be negative; callers clamp. Throws NonPositiveTarget.
double utility_deriv_inv(const Instance& inst, double v, int j, int k);

// Linear communication cost x / w[n][j] of serving foreign app j at n.
// Throws NativeApp when j is native to n.
double comm_cost(const Instance& inst, double x, int n, int j);

// Net utility provider n earns by granting x of resource k to foreign app j
// when the other providers jointly grant others_total:
//   u(others_total + x) - u(others_total) - comm_cost(x).
double differential_utility(const Instance& inst, double x,
                            double others_total, int n, int j, int k);

// Cooperative utility of provider n under allocation X: differential terms
// over native (j,k) plus differential-minus-cost terms over foreign (l,k).
// Validates feasibility within inst.feas_tol; throws InfeasibleAllocation.
double esp_utility(const Instance& inst, const Allocation& X, int n);

// Same value without the feasibility check (solver inner loops).
double esp_utility_unchecked(const Instance& inst, const Allocation& X, int n);

// ---------------------------------------------------------------------------
// Surpluses

struct SurplusVector {
  std::vector<double> d0;       // disagreement utilities
  std::vector<double> coop;     // cooperative utilities s_n
  std::vector<double> surplus;  // s_n - d0[n]

  static SurplusVector from(const Instance& inst, const Allocation& X,
                            const std::vector<double>& d0);
};

}  // namespace nbs

#endif  // NBSHARE_MODEL_HPP
