#include "nbs/nbs_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nbs/nbs_central.hpp"

namespace nbs {

namespace {

// Interior margin for the stationarity part of the KKT residual.
constexpr double kInteriorTol = 1e-7;

double foreign_net(const Instance& inst, const Allocation& X, int n, int j,
                   int k, double x) {
  const double others = X.others_total(n, j, k);
  return utility_eval(inst, others + x, j, k) -
         utility_eval(inst, others, j, k) - x / inst.w(n, j);
}

}  // namespace

Multipliers Multipliers::zeros(const Instance& inst) {
  const size_t nk = static_cast<size_t>(inst.num_providers) * inst.num_resources;
  const size_t mk = static_cast<size_t>(inst.num_apps()) * inst.num_resources;
  Multipliers m;
  m.alpha.assign(nk, 0.0);
  m.beta.assign(mk, 0.0);
  m.zeta.assign(inst.num_providers, 0.0);
  m.gamma.assign(static_cast<size_t>(inst.num_providers) * inst.num_apps() *
                     inst.num_resources,
                 0.0);
  m.pi = m.gamma;
  return m;
}

double Multipliers::min_entry() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto* vec : {&alpha, &beta, &zeta, &gamma, &pi})
    for (double e : *vec) v = std::min(v, e);
  return v;
}

StepSizes StepSizes::uniform(const Instance& inst, double s) {
  const size_t nk = static_cast<size_t>(inst.num_providers) * inst.num_resources;
  const size_t mk = static_cast<size_t>(inst.num_apps()) * inst.num_resources;
  const size_t nmk = static_cast<size_t>(inst.num_providers) * inst.num_apps() *
                     inst.num_resources;
  StepSizes st;
  st.phi.assign(nk, s);
  st.eta.assign(mk, s);
  st.omega.assign(inst.num_providers, s);
  st.theta.assign(nmk, s);
  st.psi.assign(nmk, s);
  return st;
}

double lagrangian_eval(const Instance& inst, const Allocation& X,
                       const Multipliers& mult, const std::vector<double>& d0) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;

  double L = 0;
  for (int n = 0; n < N; ++n) {
    const double s = esp_utility_unchecked(inst, X, n) - d0[n];
    if (!(s > 0)) throw OutOfDomain(n, s);
    L += std::log(s) + mult.zeta[n] * s;
  }
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k)
        L += mult.gamma[X.idx(n, j, k)] * X.at(n, j, k);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      L += mult.alpha[n * K + k] * (inst.cap(n, k) - X.row_sum(n, k));
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k)
      L += mult.beta[j * K + k] * (inst.req(j, k) - X.app_total(j, k));
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < M; ++j) {
      if (inst.is_native(n, j)) continue;
      for (int k = 0; k < K; ++k)
        L += mult.pi[X.idx(n, j, k)] * foreign_net(inst, X, n, j, k, X.at(n, j, k));
    }
  return L;
}

std::vector<double> lagrangian_grad_x(const Instance& inst, const Allocation& X,
                                      const Multipliers& mult,
                                      const std::vector<double>& d0) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;

  // weight of provider v's utility terms: 1/surplus + zeta (+ pi per coord)
  std::vector<double> base(N);
  for (int n = 0; n < N; ++n) {
    const double s = esp_utility_unchecked(inst, X, n) - d0[n];
    if (!(s > 0)) throw OutOfDomain(n, s);
    base[n] = 1.0 / s + mult.zeta[n];
  }

  std::vector<double> grad(static_cast<size_t>(N) * M * K);
  for (int j = 0; j < M; ++j) {
    for (int k = 0; k < K; ++k) {
      const double total = X.app_total(j, k);
      const double up = utility_deriv(inst, total, j, k);
      double weight_sum = 0;
      double cross = 0;  // sum_v weight_v * u'(T - x_vjk)
      for (int v = 0; v < N; ++v) {
        const double wv =
            base[v] + (inst.is_native(v, j) ? 0.0 : mult.pi[X.idx(v, j, k)]);
        weight_sum += wv;
        cross += wv * utility_deriv(inst, total - X.at(v, j, k), j, k);
      }
      for (int n = 0; n < N; ++n) {
        const double wn =
            base[n] + (inst.is_native(n, j) ? 0.0 : mult.pi[X.idx(n, j, k)]);
        double g = up * weight_sum -
                   (cross - wn * utility_deriv(inst, total - X.at(n, j, k), j, k));
        if (!inst.is_native(n, j)) g -= wn / inst.w(n, j);
        g += mult.gamma[X.idx(n, j, k)] - mult.alpha[n * K + k] -
             mult.beta[j * K + k];
        grad[X.idx(n, j, k)] = g;
      }
    }
  }
  return grad;
}

double surplus_delta(const Instance& inst, const Allocation& X, int n,
                     const std::vector<double>& d0) {
  return esp_utility_unchecked(inst, X, n) - d0[n];
}

double price_native(const Instance& inst, int n, int j, int k,
                    const Multipliers& mult, double delta_prev_n,
                    double others_total) {
  const int K = inst.num_resources;
  const double price = mult.alpha[n * K + k] + mult.beta[j * K + k] -
                       mult.gamma[(static_cast<size_t>(n) * inst.num_apps() + j) * K + k];
  const double target =
      delta_prev_n * price / (1.0 + delta_prev_n * mult.zeta[n]);
  if (!(target > 0)) throw NonPositiveTarget(target);
  return utility_deriv_inv(inst, target, j, k) - others_total;
}

double price_foreign(const Instance& inst, int n, int j, int k,
                     const Multipliers& mult, double delta_prev_n,
                     double others_total) {
  const int K = inst.num_resources;
  const size_t idx = (static_cast<size_t>(n) * inst.num_apps() + j) * K + k;
  const double price =
      mult.alpha[n * K + k] + mult.beta[j * K + k] - mult.gamma[idx];
  const double target = delta_prev_n * price /
                        (1.0 + delta_prev_n * (mult.zeta[n] + mult.pi[idx]));
  const double shifted = target + 1.0 / inst.w(n, j);
  if (!(shifted > 0)) throw NonPositiveTarget(shifted);
  return inst.req(j, k) - inst.delta[j] - std::log(shifted / inst.scale[j]) -
         others_total;
}

double clamp_primal(const Instance& inst, const Allocation& X, double raw,
                    int n, int j, int k) {
  const double box_hi = std::max(0.0, inst.req(j, k) - X.others_total(n, j, k));
  return std::clamp(raw, 0.0, box_hi);
}

void rescale_capacity_row(const Instance& inst, Allocation& X, int n, int k) {
  const double row = X.row_sum(n, k);
  const double cap = inst.cap(n, k);
  if (row <= cap) return;
  const double factor = cap > 0 ? cap / row : 0.0;
  for (int j = 0; j < X.apps(); ++j) X.at(n, j, k) *= factor;
}

void update_multipliers(const Instance& inst, const Allocation& X,
                        const std::vector<double>& d0, const StepSizes& steps,
                        Multipliers& mult) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;

  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      const size_t i = n * K + k;
      mult.alpha[i] = std::max(
          0.0, mult.alpha[i] - steps.phi[i] * (inst.cap(n, k) - X.row_sum(n, k)));
    }
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k) {
      const size_t i = j * K + k;
      mult.beta[i] = std::max(
          0.0, mult.beta[i] - steps.eta[i] * (inst.req(j, k) - X.app_total(j, k)));
    }
  for (int n = 0; n < N; ++n)
    mult.zeta[n] = std::max(
        0.0, mult.zeta[n] - steps.omega[n] * surplus_delta(inst, X, n, d0));
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k) {
        const size_t i = X.idx(n, j, k);
        mult.gamma[i] =
            std::max(0.0, mult.gamma[i] - steps.theta[i] * X.at(n, j, k));
      }
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < M; ++j) {
      if (inst.is_native(n, j)) continue;
      for (int k = 0; k < K; ++k) {
        const size_t i = X.idx(n, j, k);
        mult.pi[i] = std::max(
            0.0, mult.pi[i] - steps.psi[i] *
                                  foreign_net(inst, X, n, j, k, X.at(n, j, k)));
      }
    }
}

double kkt_residual(const Instance& inst, const Allocation& X,
                    const Multipliers& mult, const std::vector<double>& d0) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  double resid = 0;

  // primal feasibility
  for (double xi : X.data()) resid = std::max(resid, -xi);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      resid = std::max(resid, X.row_sum(n, k) - inst.cap(n, k));
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k)
      resid = std::max(resid, X.app_total(j, k) - inst.req(j, k));

  // dual feasibility (zero by construction, kept for completeness)
  resid = std::max(resid, -mult.min_entry());

  std::vector<double> delta(N);
  for (int n = 0; n < N; ++n) delta[n] = surplus_delta(inst, X, n, d0);

  // complementary slackness
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k)
      resid = std::max(resid, std::abs(mult.alpha[n * K + k] *
                                       (inst.cap(n, k) - X.row_sum(n, k))));
    resid = std::max(resid, std::abs(mult.zeta[n] * delta[n]));
  }
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k)
      resid = std::max(resid, std::abs(mult.beta[j * K + k] *
                                       (inst.req(j, k) - X.app_total(j, k))));
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < M; ++j) {
      const bool native = inst.is_native(n, j);
      for (int k = 0; k < K; ++k) {
        const size_t i = X.idx(n, j, k);
        resid = std::max(resid, std::abs(mult.gamma[i] * X.at(n, j, k)));
        if (!native) {
          const double f = foreign_net(inst, X, n, j, k, X.at(n, j, k));
          resid = std::max(resid, -f);  // 5e primal side
          resid = std::max(resid, std::abs(mult.pi[i] * f));
        }
      }
    }

  // stationarity |dL/dx| on coordinates strictly inside their box
  for (int n = 0; n < N; ++n)
    if (!(delta[n] > 0)) return std::numeric_limits<double>::infinity();
  const std::vector<double> grad = lagrangian_grad_x(inst, X, mult, d0);
  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < K; ++k) {
        const double x = X.at(n, j, k);
        if (x <= kInteriorTol) continue;
        if (X.app_total(j, k) >= inst.req(j, k) - kInteriorTol) continue;
        if (X.row_sum(n, k) >= inst.cap(n, k) - kInteriorTol) continue;
        resid = std::max(resid, std::abs(grad[X.idx(n, j, k)]));
      }
    }
  }
  return resid;
}

int schedule_start(std::uint64_t seed, int num_providers) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  return static_cast<int>(rng() % static_cast<std::uint64_t>(num_providers));
}

DistributedEngine::DistributedEngine(const Instance& inst,
                                     std::vector<double> d0,
                                     const DistConfig& config, Allocation start)
    : inst_(&inst), d0_(std::move(d0)), config_(config),
      steps_(config.make_steps(inst)) {
  if (!(config.uniform_step > 0) || !(config.inner_step > 0) ||
      !(config.joint_step > 0) || !(config.kkt_tol > 0))
    throw BadConfig("engine steps and tolerances must be positive");
  state_.X = std::move(start);
  state_.mult = Multipliers::zeros(inst);
  state_.delta_prev.resize(inst.num_providers);
  for (int n = 0; n < inst.num_providers; ++n)
    state_.delta_prev[n] = surplus_delta(inst, state_.X, n, d0_);
  state_.round = 0;
  state_.kkt = std::numeric_limits<double>::infinity();

  const int first = schedule_start(config.seed, inst.num_providers);
  schedule_.resize(inst.num_providers);
  for (int i = 0; i < inst.num_providers; ++i)
    schedule_[i] = (first + i) % inst.num_providers;

  raw_ = state_.X.data();
}

double DistributedEngine::step_scale() const {
  return config_.sqrt_decay ? 1.0 / std::sqrt(static_cast<double>(state_.round + 1))
                            : 1.0;
}

double DistributedEngine::block_lagrangian() const {
  try {
    return lagrangian_eval(*inst_, state_.X, state_.mult, d0_);
  } catch (const OutOfDomain&) {
    return -std::numeric_limits<double>::infinity();
  }
}

void DistributedEngine::provider_turn(int n) {
  const Instance& inst = *inst_;
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  Allocation& X = state_.X;
  Multipliers& mult = state_.mult;

  if (on_price_hook) on_price_hook(state_.round, n, state_.delta_prev);
  const double dprev = std::max(state_.delta_prev[n], 1e-10);

  // price proposal for the whole block: closed forms, box clamp, capacity
  // rescale; kept only when it does not lower the Lagrangian (the closed
  // forms ignore how this provider's grants move the other surpluses, so
  // late in the run they can propose worse blocks than the current one)
  std::vector<double> saved(static_cast<size_t>(M) * K);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k) saved[j * K + k] = X.at(n, j, k);
  const double before = block_lagrangian();

  for (int j = 0; j < M; ++j) {
    const bool native = inst.is_native(n, j);
    for (int k = 0; k < K; ++k) {
      const double others = X.others_total(n, j, k);
      double raw;
      try {
        raw = native ? price_native(inst, n, j, k, mult, dprev, others)
                     : price_foreign(inst, n, j, k, mult, dprev, others);
      } catch (const NonPositiveTarget&) {
        // marginal price nonpositive: saturate the box
        raw = std::max(0.0, inst.req(j, k) - others) + 1.0;
      }
      raw_[X.idx(n, j, k)] = raw;
      X.at(n, j, k) = clamp_primal(inst, X, raw, n, j, k);
    }
  }
  for (int k = 0; k < K; ++k) rescale_capacity_row(inst, X, n, k);

  if (block_lagrangian() < before) {
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k) X.at(n, j, k) = saved[j * K + k];
  }

  // gradient-based iterative refinement of the own block: projected ascent
  // on the Lagrangian with a backtracking step
  double current = block_lagrangian();
  double step = config_.inner_step;
  for (int it = 0; it < config_.inner_steps; ++it) {
    std::vector<double> grad;
    try {
      grad = lagrangian_grad_x(inst, X, mult, d0_);
    } catch (const OutOfDomain&) {
      break;
    }
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < K; ++k) saved[j * K + k] = X.at(n, j, k);

    bool accepted = false;
    for (int bt = 0; bt < 12 && !accepted; ++bt) {
      for (int j = 0; j < M; ++j)
        for (int k = 0; k < K; ++k) {
          const size_t i = X.idx(n, j, k);
          const double trial = saved[j * K + k] + step * grad[i];
          X.at(n, j, k) = clamp_primal(inst, X, trial, n, j, k);
        }
      for (int k = 0; k < K; ++k) rescale_capacity_row(inst, X, n, k);
      const double value = block_lagrangian();
      if (value >= current) {
        accepted = value > current + 1e-14;
        current = value;
        if (!accepted) {  // flat step: keep the point but stop refining
          accepted = true;
          it = config_.inner_steps;
        }
        break;
      }
      step *= 0.5;
      for (int j = 0; j < M; ++j)
        for (int k = 0; k < K; ++k) X.at(n, j, k) = saved[j * K + k];
    }
    if (!accepted) break;
    step = std::min(step * 2.0, config_.inner_step);
  }

  // local dual updates at the actual allocation
  const double sc = step_scale();
  for (int k = 0; k < K; ++k) {
    const size_t i = n * K + k;
    mult.alpha[i] = std::max(
        0.0, mult.alpha[i] -
                 sc * steps_.phi[i] * (inst.cap(n, k) - X.row_sum(n, k)));
  }
  mult.zeta[n] =
      std::max(0.0, mult.zeta[n] - sc * steps_.omega[n] *
                                       surplus_delta(inst, X, n, d0_));
  for (int j = 0; j < M; ++j) {
    const bool native = inst.is_native(n, j);
    for (int k = 0; k < K; ++k) {
      const size_t i = X.idx(n, j, k);
      mult.gamma[i] =
          std::max(0.0, mult.gamma[i] - sc * steps_.theta[i] * X.at(n, j, k));
      if (!native) {
        const double f = foreign_net(inst, X, n, j, k, X.at(n, j, k));
        mult.pi[i] = std::max(0.0, mult.pi[i] - sc * steps_.psi[i] * f);
      }
    }
  }
}

void DistributedEngine::end_round() {
  const Instance& inst = *inst_;
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;
  Allocation& X = state_.X;

  // joint ascent by the token holder over all coordinates (same projection
  // machinery as the centralized reference, so both settle on the same
  // stationary points)
  const Allocation before_polish = X;
  double current = block_lagrangian();
  double step = config_.joint_step;
  for (int it = 0; it < config_.joint_steps; ++it) {
    std::vector<double> grad;
    try {
      grad = lagrangian_grad_x(inst, X, state_.mult, d0_);
    } catch (const OutOfDomain&) {
      break;
    }
    const Allocation saved = X;
    bool accepted = false;
    for (int bt = 0; bt < 12 && !accepted; ++bt) {
      X = saved;
      for (size_t i = 0; i < X.data().size(); ++i) X.data()[i] += step * grad[i];
      project_feasible(inst, X, 1e-9, 500);
      shrink_negative_foreign(inst, X);
      const double value = block_lagrangian();
      if (value >= current) {
        accepted = value > current + 1e-14;
        current = value;
        if (!accepted) {
          accepted = true;
          it = config_.joint_steps;
        }
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      X = saved;
      break;
    }
    step = std::min(step * 2.0, config_.joint_step);
  }

  // shared request multipliers, updated once per round by the token holder
  const double sc = step_scale();
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k) {
      const size_t i = j * K + k;
      state_.mult.beta[i] = std::max(
          0.0, state_.mult.beta[i] - sc * steps_.eta[i] *
                                         (inst.req(j, k) - X.app_total(j, k)));
    }

  // surplus snapshot consumed by the next round's prices
  for (int n = 0; n < N; ++n)
    state_.delta_prev[n] = surplus_delta(inst, X, n, d0_);

  state_.round += 1;

  // a round with material joint movement has not settled, whatever the
  // pointwise residual says
  double moved = 0;
  for (size_t i = 0; i < X.data().size(); ++i)
    moved = std::max(moved, std::abs(X.data()[i] - before_polish.data()[i]));
  state_.kkt = std::max(kkt_residual(inst, X, state_.mult, d0_), moved);
  if (state_.round == 1 || state_.kkt < 0.99 * best_kkt_) {
    best_kkt_ = state_.kkt;
    best_kkt_round_ = state_.round;
  }
  kkt_trajectory_.push_back(state_.kkt);

  if (config_.record_trace) {
    RoundRecord rec;
    rec.round = state_.round;
    rec.provider = schedule_.front();
    rec.kkt = state_.kkt;
    rec.max_violation = X.max_violation(inst);
    try {
      rec.objective = nbs_log_objective(inst, X, d0_);
    } catch (const OutOfDomain&) {
      rec.objective = std::numeric_limits<double>::quiet_NaN();
    }
    trace_.push_back(rec);
  }
}

bool DistributedEngine::step_round() {
  for (int n : schedule_) provider_turn(n);
  end_round();
  return state_.kkt < config_.kkt_tol;
}

bool DistributedEngine::finished(long max_rounds) const {
  return state_.kkt < config_.kkt_tol || state_.round >= max_rounds;
}

bool DistributedEngine::stalled(long window) const {
  return state_.round - best_kkt_round_ >= window;
}

DistReport DistributedEngine::report(bool converged) const {
  DistReport rep;
  rep.allocation = state_.X;
  rep.surplus = SurplusVector::from(*inst_, state_.X, d0_);
  rep.kkt_trajectory = kkt_trajectory_;
  rep.trace = trace_;
  rep.rounds = state_.round;
  rep.converged = converged;
  rep.final_kkt = state_.kkt;
  return rep;
}

std::vector<Allocation> candidate_starts(const Instance& inst,
                                         const std::vector<double>& d0) {
  std::vector<Allocation> starts;
  starts.push_back(find_interior_start(inst, d0));
  if (std::optional<Allocation> cross = cross_service_start(inst, d0))
    starts.push_back(std::move(*cross));
  return starts;
}

namespace {

DistReport run_engine(const Instance& inst, const std::vector<double>& d0,
                      const DistConfig& config, Allocation start) {
  DistributedEngine engine(inst, d0, config, std::move(start));
  bool converged = false;
  while (engine.round() < config.max_rounds) {
    if (engine.step_round()) {
      converged = true;
      break;
    }
    if (engine.stalled()) break;
  }
  return engine.report(converged);
}

double report_objective(const Instance& inst, const std::vector<double>& d0,
                        const DistReport& rep) {
  try {
    return nbs_log_objective(inst, rep.allocation, d0);
  } catch (const OutOfDomain&) {
    return -std::numeric_limits<double>::infinity();
  }
}

bool better_report(const Instance& inst, const std::vector<double>& d0,
                   const DistReport& challenger, const DistReport& incumbent) {
  if (challenger.converged != incumbent.converged)
    return challenger.converged;
  return report_objective(inst, d0, challenger) >
         report_objective(inst, d0, incumbent);
}

}  // namespace

size_t select_start(const Instance& inst, const std::vector<double>& d0,
                    const DistConfig& config) {
  const std::vector<Allocation> starts = candidate_starts(inst, d0);
  size_t best = 0;
  DistReport best_rep = run_engine(inst, d0, config, starts[0]);
  for (size_t i = 1; i < starts.size(); ++i) {
    DistReport rep = run_engine(inst, d0, config, starts[i]);
    if (better_report(inst, d0, rep, best_rep)) {
      best = i;
      best_rep = std::move(rep);
    }
  }
  return best;
}

DistReport solve_distributed(const Instance& inst, const std::vector<double>& d0,
                             const DistConfig& config) {
  std::vector<Allocation> starts = candidate_starts(inst, d0);
  DistReport best = run_engine(inst, d0, config, std::move(starts[0]));
  for (size_t i = 1; i < starts.size(); ++i) {
    DistReport rep = run_engine(inst, d0, config, std::move(starts[i]));
    if (better_report(inst, d0, rep, best)) best = std::move(rep);
  }
  return best;
}

}  // namespace nbs
