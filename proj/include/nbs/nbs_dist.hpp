// nbs_dist.hpp
//
// Distributed primal-dual engine: five-group Lagrangian, dual gradient
// descent on the multipliers, and closed-form price functions that each
// provider evaluates for native and foreign applications in a round-robin
// schedule. Prices at round t consume the surplus computed at round t-1.

#ifndef NBSHARE_NBS_DIST_HPP
#define NBSHARE_NBS_DIST_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "nbs/model.hpp"

namespace nbs {

// Dual state. Entries stay nonnegative through every update (projection to
// the nonnegative orthant).
struct Multipliers {
  std::vector<double> alpha;  // N*K, capacity
  std::vector<double> beta;   // M*K, request cap
  std::vector<double> zeta;   // N, disagreement constraint
  std::vector<double> gamma;  // N*M*K, nonnegativity
  std::vector<double> pi;     // N*M*K, foreign net-utility (native entries 0)

  static Multipliers zeros(const Instance& inst);
  double min_entry() const;  // >= 0 iff dual feasible
};

struct StepSizes {
  std::vector<double> phi;    // N*K, for alpha
  std::vector<double> eta;    // M*K, for beta
  std::vector<double> omega;  // N, for zeta
  std::vector<double> theta;  // N*M*K, for gamma
  std::vector<double> psi;    // N*M*K, for pi

  static StepSizes uniform(const Instance& inst, double s = 0.01);
};

struct DistConfig {
  double uniform_step = 0.01;
  bool sqrt_decay = false;  // scale multiplier steps by 1/sqrt(round)
  double kkt_tol = 1e-5;
  long max_rounds = 200000;
  std::uint64_t seed = 0;  // picks the first provider of the round-robin

  // Per-turn refinement of the provider's own block: after the price
  // proposal, up to inner_steps projected ascent steps on the Lagrangian
  // (the gradient-based iterative update), starting at inner_step length.
  int inner_steps = 30;
  double inner_step = 0.25;

  // End-of-round joint ascent by the token holder on the broadcast state;
  // escapes points where providers are pairwise wedged on a shared request
  // cap that no single block move can improve.
  int joint_steps = 12;
  double joint_step = 0.1;

  bool record_trace = false;

  StepSizes make_steps(const Instance& inst) const {
    return StepSizes::uniform(inst, uniform_step);
  }
};

struct DualState {
  Multipliers mult;
  Allocation X;
  std::vector<double> delta_prev;  // surplus snapshot from the previous round
  long round = 0;
  double kkt = 0;
};

struct RoundRecord {
  long round = 0;
  int provider = 0;  // token holder that opened the round
  double kkt = 0;
  double objective = 0;
  double max_violation = 0;
};

struct DistReport {
  Allocation allocation;
  SurplusVector surplus;
  std::vector<double> kkt_trajectory;
  std::vector<RoundRecord> trace;
  long rounds = 0;
  bool converged = false;
  double final_kkt = 0;
};

// --------------------------------------------------------------------------
// Operations (free functions; the engine composes them)

// Full Lagrangian: log surpluses plus the five multiplier groups.
// Throws OutOfDomain when a surplus is nonpositive.
double lagrangian_eval(const Instance& inst, const Allocation& X,
                       const Multipliers& mult, const std::vector<double>& d0);

// Analytic gradient of the Lagrangian with respect to every x[n][j][k]
// (all cross-provider terms included; checked against finite differences).
std::vector<double> lagrangian_grad_x(const Instance& inst, const Allocation& X,
                                      const Multipliers& mult,
                                      const std::vector<double>& d0);

// Surplus of provider n at X (cooperative utility minus disagreement point).
double surplus_delta(const Instance& inst, const Allocation& X, int n,
                     const std::vector<double>& d0);

// Closed-form price for a native app: inverse marginal utility evaluated at
// delta_prev*(alpha+beta-gamma)/(1+delta_prev*zeta), minus what the other
// providers already granted. Raw (unclamped); may be negative.
// Throws NonPositiveTarget when the target is nonpositive (callers treat
// this as "marginal price nonpositive - saturate the box").
double price_native(const Instance& inst, int n, int j, int k,
                    const Multipliers& mult, double delta_prev_n,
                    double others_total);

// Same for a foreign app: inverts the net marginal utility u' - 1/w at
// delta_prev*(alpha+beta-gamma)/(1+delta_prev*(zeta+pi)).
// Throws NonPositiveTarget when target + 1/w is nonpositive.
double price_foreign(const Instance& inst, int n, int j, int k,
                     const Multipliers& mult, double delta_prev_n,
                     double others_total);

// Box clamp of a raw price to [0, r[j][k] - sum_{m != n} x_m]. Row sums are
// additionally rescaled to capacity by rescale_capacity_row.
double clamp_primal(const Instance& inst, const Allocation& X, double raw,
                    int n, int j, int k);

// Scales provider n's row for resource k down when it exceeds capacity.
void rescale_capacity_row(const Instance& inst, Allocation& X, int n, int k);

// One full dual gradient step (all five groups, residuals taken at X),
// projected to the nonnegative orthant.
void update_multipliers(const Instance& inst, const Allocation& X,
                        const std::vector<double>& d0, const StepSizes& steps,
                        Multipliers& mult);

// Max over primal infeasibility, dual infeasibility, complementary
// slackness products and stationarity on coordinates strictly inside their
// box (the closed form behind the price functions).
double kkt_residual(const Instance& inst, const Allocation& X,
                    const Multipliers& mult, const std::vector<double>& d0);

// --------------------------------------------------------------------------
// Engine

// Deterministic sequential state machine. Each round the token visits every
// provider once: the provider recomputes its primal block from the price
// functions (with the previous round's surplus) and clamps; because the
// closed forms ignore how a grant moves the other providers' surpluses, the
// proposal is kept only when it improves the Lagrangian and is then refined
// by the gradient-based iterative update on the provider's own block
// (projected ascent; everything it needs is broadcast state). The provider
// then updates its local multipliers; the round closes with the shared
// request multipliers and a fresh surplus snapshot.
class DistributedEngine {
 public:
  // Starts from the given allocation (Algorithm step-0 input); it must be
  // feasible with strictly positive surpluses.
  DistributedEngine(const Instance& inst, std::vector<double> d0,
                    const DistConfig& config, Allocation start);

  // Instrumentation: called once per provider turn with the surplus vector
  // consumed by that turn's price computations.
  std::function<void(long round, int provider, const std::vector<double>&)>
      on_price_hook;

  void provider_turn(int n);
  void end_round();
  bool step_round();  // one full round; true once the stopping rule is met

  const DualState& state() const { return state_; }
  const std::vector<int>& schedule() const { return schedule_; }
  const std::vector<double>& d0() const { return d0_; }
  const Instance& instance() const { return *inst_; }
  double current_kkt() const { return state_.kkt; }
  long round() const { return state_.round; }
  const std::vector<double>& kkt_trajectory() const { return kkt_trajectory_; }
  const std::vector<RoundRecord>& trace() const { return trace_; }
  bool finished(long max_rounds) const;
  // True when the residual has not improved for the given number of rounds;
  // callers stop early instead of burning the whole round budget.
  bool stalled(long window = 800) const;

  DistReport report(bool converged) const;

 private:
  double step_scale() const;
  double block_lagrangian() const;

  const Instance* inst_;
  std::vector<double> d0_;
  DistConfig config_;
  StepSizes steps_;
  DualState state_;
  std::vector<int> schedule_;
  std::vector<double> raw_;  // raw price responses of the current round
  double best_kkt_ = 0;
  long best_kkt_round_ = 0;
  std::vector<double> kkt_trajectory_;
  std::vector<RoundRecord> trace_;
};

// First provider of the round-robin for a given seed.
int schedule_start(std::uint64_t seed, int num_providers);

// Candidate step-0 allocations (standalone-shaped interior point, plus the
// service-heavy one when it has positive surpluses). The objective is
// multimodal and the round-robin iteration stays in the basin it starts in,
// so the engine is run from each candidate and the best result kept.
std::vector<Allocation> candidate_starts(const Instance& inst,
                                         const std::vector<double>& d0);

// Runs the engine from every candidate start until the KKT residual drops
// below kkt_tol or max_rounds is exhausted, and returns the best result
// (converged first, then higher bargaining objective; deterministic).
DistReport solve_distributed(const Instance& inst, const std::vector<double>& d0,
                             const DistConfig& config = {});

// Index into candidate_starts chosen by solve_distributed's selection rule.
size_t select_start(const Instance& inst, const std::vector<double>& d0,
                    const DistConfig& config);

}  // namespace nbs

#endif  // NBSHARE_NBS_DIST_HPP
