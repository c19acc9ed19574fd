#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "nbs/model.hpp"

using namespace nbs;

namespace {

// Independent root-finder: the y with utility_deriv(y) == v, by bisection
// on the monotone derivative.
double deriv_inv_oracle(const Instance& inst, double v, int j, int k) {
  double lo = -50, hi = 50;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (utility_deriv(inst, mid, j, k) > v)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Term-by-term cooperative utility written directly from the formulas, with
// explicit native/foreign branches and raw exp calls.
double esp_utility_oracle(const Instance& inst, const Allocation& X, int n) {
  double sum = 0;
  for (int j = 0; j < inst.num_apps(); ++j) {
    for (int k = 0; k < inst.num_resources; ++k) {
      double total = 0;
      for (int m = 0; m < inst.num_providers; ++m) total += X.at(m, j, k);
      const double others = total - X.at(n, j, k);
      auto u = [&](double y) {
        return inst.scale[j] *
               (1.0 - std::exp(-(y - inst.req(j, k) + inst.delta[j])));
      };
      if (inst.owner[j] == n) {
        sum += u(total) - u(others);
      } else {
        sum += u(total) - u(others) - X.at(n, j, k) / inst.w(n, j);
      }
    }
  }
  return sum;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("instance validation enforces the partition and positivity") {
  Instance inst = testutil::tiny_instance();
  CHECK(inst.owner == std::vector<int>{0, 1});

  Instance bad = inst;
  bad.native_apps = {{0, 1}, {1}};  // app 1 in two native sets
  CHECK_THROWS_AS(bad.finalize(), BadConfig);

  bad = inst;
  bad.native_apps = {{0}, {}};  // app 1 uncovered
  CHECK_THROWS_AS(bad.finalize(), BadConfig);

  bad = inst;
  bad.delta = {1.0, 0.0};
  CHECK_THROWS_AS(bad.finalize(), BadConfig);

  bad = inst;
  bad.comm_weight = {0.0, -1.0, 10.0, 0.0};
  CHECK_THROWS_AS(bad.finalize(), BadConfig);

  bad = inst;
  bad.capacity = {1.0, -0.5};
  CHECK_THROWS_AS(bad.finalize(), BadConfig);
}

TEST_CASE("utility_eval closed-form points") {
  Instance inst = testutil::tiny_instance(1, 2, /*r0=*/2.0, 1.0);
  // total == r: exponent reduces to -delta
  CHECK(utility_eval(inst, 2.0, 0, 0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  // total == r - delta: zero exponent
  CHECK(utility_eval(inst, 1.0, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  // total == 0, r = 2, delta = 1
  CHECK(utility_eval(inst, 0.0, 0, 0) ==
        doctest::Approx(1.0 - std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("utility_deriv closed-form points and monotonicity") {
  Instance inst = testutil::tiny_instance();
  CHECK(utility_deriv(inst, 2.0, 0, 0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(utility_deriv(inst, 1.0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // strict concavity: derivative decreases
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const double a = testutil::uniform_in(rng, 0, 4);
    const double b = a + testutil::uniform_in(rng, 1e-6, 2);
    CHECK(utility_deriv(inst, a, 0, 0) > utility_deriv(inst, b, 0, 0));
  }
}

TEST_CASE("utility_deriv_inv closed form, oracle, and error") {
  Instance inst = testutil::tiny_instance();
  CHECK(utility_deriv_inv(inst, 1.0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(utility_deriv_inv(inst, std::exp(-1.0), 0, 0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // derived: root-find u'(y) = 0.3
  const double oracle = deriv_inv_oracle(inst, 0.3, 0, 0);
  CHECK(utility_deriv_inv(inst, 0.3, 0, 0) ==
        doctest::Approx(oracle).epsilon(1e-9));
  CHECK(utility_deriv_inv(inst, 0.3, 0, 0) ==
        doctest::Approx(1.0 - std::log(0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(utility_deriv_inv(inst, 0.0, 0, 0), NonPositiveTarget);
  CHECK_THROWS_AS(utility_deriv_inv(inst, -1.0, 0, 0), NonPositiveTarget);
}

TEST_CASE("inverse of the derivative is a true inverse") {
  Instance inst = testutil::hand_instance();
  std::mt19937_64 rng(11);
  for (int j = 0; j < inst.num_apps(); ++j)
    for (int k = 0; k < inst.num_resources; ++k)
      for (int i = 0; i < 20; ++i) {
        const double total = testutil::uniform_in(rng, 0, 2 * inst.req(j, k));
        const double v = utility_deriv(inst, total, j, k);
        CHECK(utility_deriv_inv(inst, v, j, k) ==
              doctest::Approx(total).epsilon(1e-10));
      }
}

TEST_CASE("utility is strictly increasing and concave on a grid") {
  Instance inst = testutil::hand_instance();
  const int j = 1, k = 0;
  const double h = 0.05;
  double prev = utility_eval(inst, 0.0, j, k);
  double prev_diff = 0;
  bool first = true;
  for (int i = 1; i <= 80; ++i) {
    const double cur = utility_eval(inst, i * h, j, k);
    CHECK(cur > prev);
    const double diff = cur - prev;
    if (!first) CHECK(diff <= prev_diff + 1e-12);  // second differences <= 0
    prev = cur;
    prev_diff = diff;
    first = false;
  }
}

TEST_CASE("comm_cost is linear and rejects native apps") {
  Instance inst = testutil::tiny_instance();
  CHECK(comm_cost(inst, 0.0, 0, 1) == 0.0);
  CHECK(comm_cost(inst, 1.0, 0, 1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(comm_cost(inst, 2.0, 0, 1) ==
        doctest::Approx(2.0 * comm_cost(inst, 1.0, 0, 1)).epsilon(1e-12));
  CHECK_THROWS_AS(comm_cost(inst, 1.0, 0, 0), NativeApp);
}

TEST_CASE("differential_utility hand values") {
  Instance inst = testutil::tiny_instance();
  // provider 1 serving app 0 (r = 2, delta = 1, w = 10)
  CHECK(differential_utility(inst, 0.0, 0.5, 1, 0, 0) == 0.0);
  const double expected = (1.0 - 1.0) - (1.0 - std::exp(1.0)) - 0.1;
  CHECK(differential_utility(inst, 1.0, 0.0, 1, 0, 0) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(std::exp(1.0) - 1.0 - 0.1).epsilon(1e-12));
  CHECK_THROWS_AS(differential_utility(inst, 1.0, 0.0, 0, 0, 0), NativeApp);

  // infinite-weight limit: pure utility difference
  Instance big_w = testutil::tiny_instance(1, 2, 2, 1, /*w=*/1e12);
  const double pure = utility_eval(big_w, 1.0, 0, 0) - utility_eval(big_w, 0.0, 0, 0);
  CHECK(differential_utility(big_w, 1.0, 0.0, 1, 0, 0) ==
        doctest::Approx(pure).epsilon(1e-9));
}

TEST_CASE("differential_utility is concave with the right maximizer") {
  Instance inst = testutil::hand_instance();
  const int n = 0, j = 2, k = 1;  // foreign to provider 0, w = 8
  const double others = 0.3;
  auto f = [&](double x) {
    return differential_utility(inst, x, others, n, j, k);
  };
  CHECK(f(0.0) == 0.0);
  // concavity along the coordinate
  double prev_diff = 0;
  bool first = true;
  for (int i = 1; i <= 60; ++i) {
    const double diff = f(i * 0.05) - f((i - 1) * 0.05);
    if (!first) CHECK(diff <= prev_diff + 1e-12);
    prev_diff = diff;
    first = false;
  }
  // first-order condition at the maximizer: u'(others + x*) == 1/w
  const double x_star = utility_deriv_inv(inst, 1.0 / inst.w(n, j), j, k) - others;
  CHECK(utility_deriv(inst, others + x_star, j, k) ==
        doctest::Approx(1.0 / inst.w(n, j)).epsilon(1e-8));
  CHECK(f(x_star) >= f(x_star + 1e-4));
  CHECK(f(x_star) >= f(x_star - 1e-4));
}

TEST_CASE("esp_utility zero and single-provider reductions") {
  Instance inst = testutil::hand_instance();
  Allocation zero(2, 4, 2);
  CHECK(esp_utility(inst, zero, 0) == 0.0);
  CHECK(esp_utility(inst, zero, 1) == 0.0);

  // single provider, single native app: reduces to u(x) - u(0)
  Instance solo;
  solo.num_providers = 1;
  solo.num_resources = 1;
  solo.native_apps = {{0}};
  solo.capacity = {2.0};
  solo.requests = {2.0};
  solo.delta = {1.0};
  solo.scale = {1.0};
  solo.comm_weight = {0.0};
  solo.finalize();
  Allocation X(1, 1, 1);
  X.at(0, 0, 0) = 1.3;
  CHECK(esp_utility(solo, X, 0) ==
        doctest::Approx(utility_eval(solo, 1.3, 0, 0) -
                        utility_eval(solo, 0.0, 0, 0)).epsilon(1e-12));
}

TEST_CASE("esp_utility matches independent term enumeration") {
  Instance inst = testutil::hand_instance();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    Allocation X = testutil::random_feasible(inst, rng);
    for (int n = 0; n < 2; ++n)
      CHECK(esp_utility(inst, X, n) ==
            doctest::Approx(esp_utility_oracle(inst, X, n)).epsilon(1e-12));
  }
}

TEST_CASE("esp_utility is additive over (j,k) terms") {
  Instance inst = testutil::hand_instance();
  std::mt19937_64 rng(31);
  Allocation X = testutil::random_feasible(inst, rng);
  const int n = 0;
  const double full = esp_utility(inst, X, n);
  // dropping one pair's own allocation changes the value by exactly that term
  for (int j = 0; j < inst.num_apps(); ++j)
    for (int k = 0; k < inst.num_resources; ++k) {
      Allocation Y = X;
      Y.at(n, j, k) = 0.0;
      const double total = X.app_total(j, k);
      const double others = total - X.at(n, j, k);
      double term = utility_eval(inst, total, j, k) -
                    utility_eval(inst, others, j, k);
      if (!inst.is_native(n, j)) term -= X.at(n, j, k) / inst.w(n, j);
      CHECK(full - esp_utility(inst, Y, n) ==
            doctest::Approx(term).epsilon(1e-10));
    }
}

TEST_CASE("esp_utility rejects infeasible allocations") {
  Instance inst = testutil::tiny_instance();
  Allocation X(2, 2, 1);
  X.at(0, 0, 0) = inst.cap(0, 0) + 1.0;  // over capacity by 1
  CHECK_THROWS_AS(esp_utility(inst, X, 0), InfeasibleAllocation);
  X.at(0, 0, 0) = -0.1;
  CHECK_THROWS_AS(esp_utility(inst, X, 0), InfeasibleAllocation);
}

TEST_CASE("surplus vector wiring") {
  Instance inst = testutil::tiny_instance();
  Allocation X(2, 2, 1);
  X.at(0, 0, 0) = 0.5;
  X.at(1, 1, 0) = 0.7;
  std::vector<double> d0 = {0.1, 0.2};
  const SurplusVector sv = SurplusVector::from(inst, X, d0);
  for (int n = 0; n < 2; ++n) {
    CHECK(sv.coop[n] == doctest::Approx(esp_utility(inst, X, n)));
    CHECK(sv.surplus[n] == doctest::Approx(sv.coop[n] - d0[n]));
  }
}

}  // TEST_SUITE
