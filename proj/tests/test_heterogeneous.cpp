#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "aoi/heterogeneous.hpp"
#include "aoi/homogeneous.hpp"

using aoi::Error;
using aoi::ErrorCode;
using aoi::perm::Permutation;
using namespace aoi::heterogeneous;

namespace {

double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

HeteroParams random_params(std::mt19937_64& rng, int n, double lo = 0.3, double hi = 3.0) {
  std::uniform_real_distribution<double> rate(lo, hi);
  HeteroParams p;
  p.n = n;
  for (int j = 0; j < n; ++j) {
    p.lambdas.push_back(rate(rng));
    p.mus.push_back(rate(rng));
  }
  return p;
}

/// Monitor-variable coefficient block, built from its defining pattern.
T0Block monitor_block(const HeteroParams& p) {
  T0Block block;
  block.param = p.n;
  block.states = aoi::perm::enumerate(p.n);
  double lambda_total = 0.0, mu_total = 0.0;
  for (int j = 0; j < p.n; ++j) {
    lambda_total += p.lambdas[static_cast<std::size_t>(j)];
    mu_total += p.mus[static_cast<std::size_t>(j)];
  }
  block.cols.resize(block.states.size());
  for (std::size_t cp = 0; cp < block.states.size(); ++cp) {
    const Permutation& state = block.states[cp];
    block.cols[cp].emplace_back(
        static_cast<int>(cp),
        (lambda_total - p.lambdas[static_cast<std::size_t>(state.at(1) - 1)]) + mu_total);
    for (int j = 2; j <= p.n; ++j) {
      const Permutation row_state = aoi::perm::to_front(j, state);
      block.cols[cp].emplace_back(
          static_cast<int>(aoi::perm::lex_rank(row_state)),
          -p.lambdas[static_cast<std::size_t>(row_state.at(1) - 1)]);
    }
  }
  return block;
}

double system_value(const SparseLinearSystem& sys, const std::vector<double>& v,
                    const Permutation& q, int i) {
  return v[static_cast<std::size_t>(sys.index(aoi::perm::lex_rank(q), i))];
}

}  // namespace

TEST_CASE("steady state probabilities") {
  const SteadyState two = steady_state({2, {1.0, 3.0}, {1.0, 1.0}});
  CHECK(two.probability(Permutation{1, 2}) == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(two.probability(Permutation{2, 1}) == Catch::Approx(0.75).epsilon(1e-14));

  const SteadyState equal = steady_state({3, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
  for (double prob : equal.pi) CHECK(prob == Catch::Approx(1.0 / 6.0).epsilon(1e-14));

  const SteadyState skew = steady_state({3, {1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}});
  CHECK(skew.probability(Permutation{3, 2, 1}) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("steady state sums to one and balances flows") {
  std::mt19937_64 rng(31);
  for (int n = 2; n <= 7; ++n) {
    for (int t = 0; t < 6; ++t) {
      const HeteroParams p = random_params(rng, n);
      const SteadyState ss = steady_state(p);
      double total = 0.0;
      for (double prob : ss.pi) total += prob;
      CHECK(std::fabs(total - 1.0) <= 1e-12);
      double lambda_total = 0.0;
      for (double l : p.lambdas) lambda_total += l;
      for (const Permutation& q : ss.states) {
        double inflow = 0.0;
        for (int i = 1; i <= n; ++i) inflow += ss.probability(aoi::perm::front_to(i, q));
        const double residual = ss.probability(q) * lambda_total -
                                p.lambdas[static_cast<std::size_t>(q.at(1) - 1)] * inflow;
        CHECK(std::fabs(residual) <= 1e-12);
      }
    }
  }
}

TEST_CASE("system rows for the freshest position are diagonal") {
  std::mt19937_64 rng(37);
  const HeteroParams p = random_params(rng, 4);
  const SparseLinearSystem sys = build_system(p);
  double lambda_total = 0.0;
  for (double l : p.lambdas) lambda_total += l;
  for (std::size_t rank = 0; rank < sys.states.size(); ++rank) {
    const auto& row = sys.rows[static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), 1))];
    REQUIRE(row.size() == 1);
    CHECK(row[0].first == sys.index(static_cast<std::int64_t>(rank), 1));
    CHECK(row[0].second == Catch::Approx(lambda_total).epsilon(1e-14));
  }
}

TEST_CASE("two-server system matches the displayed matrix") {
  const double l1 = 0.7, l2 = 1.9, m1 = 1.3, m2 = 0.4;
  const SparseLinearSystem sys = build_system({2, {l1, l2}, {m1, m2}});
  // column layout: ((1,2),0..2) then ((2,1),0..2); (q,i) is position i of q
  std::map<std::pair<int, int>, double> expected{
      {{0, 0}, l2 + m1 + m2}, {{0, 1}, -m1}, {{0, 2}, -m2}, {{0, 3}, -l1},
      {{1, 1}, l1 + l2},
      {{2, 2}, l2 + m1}, {{2, 1}, -m1}, {{2, 4}, -l1},
      {{3, 3}, l1 + m1 + m2}, {{3, 4}, -m2}, {{3, 5}, -m1}, {{3, 0}, -l2},
      {{4, 4}, l1 + l2},
      {{5, 5}, l1 + m2}, {{5, 4}, -m2}, {{5, 1}, -l2}};
  std::map<std::pair<int, int>, double> actual;
  for (int r = 0; r < 6; ++r) {
    for (const auto& [c, val] : sys.rows[static_cast<std::size_t>(r)]) {
      actual[{r, c}] += val;
    }
  }
  REQUIRE(actual.size() == expected.size());
  for (const auto& [pos, val] : expected) {
    REQUIRE(actual.count(pos) == 1);
    CHECK(actual[pos] == Catch::Approx(val).epsilon(1e-13));
  }
}

TEST_CASE("three-server diagonals follow the position rules") {
  std::mt19937_64 rng(41);
  const HeteroParams p = random_params(rng, 3);
  const SparseLinearSystem sys = build_system(p);
  double lambda_total = 0.0, mu_total = 0.0;
  for (int j = 0; j < 3; ++j) {
    lambda_total += p.lambdas[static_cast<std::size_t>(j)];
    mu_total += p.mus[static_cast<std::size_t>(j)];
  }
  for (std::size_t rank = 0; rank < sys.states.size(); ++rank) {
    const Permutation& q = sys.states[rank];
    const double tail = lambda_total - p.lambdas[static_cast<std::size_t>(q.at(1) - 1)];
    const double mu1 = p.mus[static_cast<std::size_t>(q.at(1) - 1)];
    const double mu2 = p.mus[static_cast<std::size_t>(q.at(2) - 1)];
    auto diag = [&](int i) {
      const int idx = sys.index(static_cast<std::int64_t>(rank), i);
      for (const auto& [c, val] : sys.rows[static_cast<std::size_t>(idx)]) {
        if (c == idx) return val;
      }
      return 0.0;
    };
    CHECK(diag(0) == Catch::Approx(tail + mu_total).epsilon(1e-13));
    CHECK(diag(1) == Catch::Approx(lambda_total).epsilon(1e-13));
    CHECK(diag(2) == Catch::Approx(tail + mu1).epsilon(1e-13));
    CHECK(diag(3) == Catch::Approx(tail + mu1 + mu2).epsilon(1e-13));
  }
}

TEST_CASE("dense solve at known points") {
  const SparseLinearSystem sys = build_system({2, {1.0, 1.0}, {1.0, 1.0}});
  const std::vector<double> v = solve_dense(sys);
  CHECK(system_value(sys, v, Permutation{1, 2}, 1) == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(system_value(sys, v, Permutation{1, 2}, 0) ==
        Catch::Approx(system_value(sys, v, Permutation{2, 1}, 0)).epsilon(1e-12));

  const SparseLinearSystem sys3 = build_system({3, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
  const std::vector<double> v3 = solve_dense(sys3);
  double age = 0.0;
  for (const Permutation& q : sys3.states) age += system_value(sys3, v3, q, 0);
  CHECK(age == Catch::Approx(26.0 / 27.0).epsilon(1e-12));
  for (double x : v3) CHECK(x >= -1e-12);
}

TEST_CASE("block solver on the two-state example") {
  T0Block block;
  block.param = 2;
  block.states = {Permutation{1, 2}, Permutation{2, 1}};
  block.cols = {{{0, 3.0}, {1, -1.0}}, {{0, -1.0}, {1, 3.0}}};
  ForwardTrace trace;
  const std::vector<double> v = solve_block(block, {0.5, 0.5}, &trace);
  CHECK(v[0] == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(v[1] == Catch::Approx(0.25).epsilon(1e-14));

  REQUIRE(trace.stages.size() == 1);
  const auto& entries = trace.stages[0].entries;
  REQUIRE(entries.size() == 3);
  CHECK(entries.at({0, 0}) == Catch::Approx(2.0).epsilon(1e-14));  // service total
  CHECK(entries.at({1, 0}) == Catch::Approx(-1.0).epsilon(1e-14));
  CHECK(entries.at({1, 1}) == Catch::Approx(4.0).epsilon(1e-14));  // service + arrival totals
  CHECK(trace.final_scalar == Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("block solver rejects broken structure") {
  T0Block block;
  block.param = 2;
  block.states = {Permutation{1, 2}, Permutation{2, 1}};
  block.cols = {{{0, 3.0}, {1, -1.0}}, {{0, 1.0}, {1, 3.0}}};  // positive off-diagonal
  CHECK_THROWS_AS(solve_block(block, {0.5, 0.5}), Error);
}

TEST_CASE("forward reduction of the three-server monitor block") {
  std::mt19937_64 rng(43);
  const HeteroParams p = random_params(rng, 3);
  const double l1 = p.lambdas[0], l2 = p.lambdas[1], l3 = p.lambdas[2];
  const double mu_total = p.mus[0] + p.mus[1] + p.mus[2];
  const double lambda_total = l1 + l2 + l3;
  const T0Block block = monitor_block(p);
  const SteadyState ss = steady_state(p);

  ForwardTrace trace;
  const std::vector<double> v = solve_block(block, ss.pi, &trace);
  REQUIRE(trace.stages.size() == 2);

  // first fold over state pairs sharing a prefix
  const std::map<std::pair<int, int>, double> stage1{
      {{0, 0}, l2 + l3 + mu_total}, {{0, 2}, -l1}, {{0, 4}, -l1},
      {{1, 1}, l2 + l3 + mu_total}, {{1, 4}, -l1},
      {{2, 0}, -l2}, {{2, 2}, l1 + l3 + mu_total}, {{2, 4}, -l2},
      {{3, 3}, l1 + l3 + mu_total}, {{3, 4}, -l2},
      {{4, 0}, -l3}, {{4, 2}, -l3}, {{4, 4}, l1 + l2 + mu_total},
      {{5, 2}, -l3}, {{5, 5}, l1 + l2 + mu_total}};
  REQUIRE(trace.stages[0].entries.size() == stage1.size());
  for (const auto& [pos, val] : stage1) {
    REQUIRE(trace.stages[0].entries.count(pos) == 1);
    CHECK(trace.stages[0].entries.at(pos) == Catch::Approx(val).epsilon(1e-12));
  }

  // second fold closes the kept corner to the service-rate total
  const auto& stage2 = trace.stages[1].entries;
  CHECK(stage2.at({0, 0}) == Catch::Approx(mu_total).epsilon(1e-12));
  CHECK(stage2.count({0, 2}) == 0);
  CHECK(stage2.count({0, 4}) == 0);
  CHECK(stage2.at({2, 0}) == Catch::Approx(-l2).epsilon(1e-12));
  CHECK(stage2.at({4, 0}) == Catch::Approx(-l3).epsilon(1e-12));
  CHECK(stage2.at({2, 2}) == Catch::Approx(lambda_total + mu_total).epsilon(1e-12));
  CHECK(stage2.at({4, 4}) == Catch::Approx(lambda_total + mu_total).epsilon(1e-12));
  CHECK(trace.final_scalar == Catch::Approx(mu_total).epsilon(1e-12));

  // closing identity of the fold
  double c_total = 0.0, v_total = 0.0;
  for (double x : ss.pi) c_total += x;
  for (double x : v) v_total += x;
  CHECK(v_total == Catch::Approx(c_total / mu_total).epsilon(1e-12));
}

TEST_CASE("forward matrices keep the predicted pattern") {
  std::mt19937_64 rng(47);
  for (int n = 3; n <= 5; ++n) {
    const HeteroParams p = random_params(rng, n);
    const T0Block block = monitor_block(p);
    const SteadyState ss = steady_state(p);
    ForwardTrace trace;
    solve_block(block, ss.pi, &trace);

    double lambda_total = 0.0, mu_total = 0.0;
    for (int j = 0; j < n; ++j) {
      lambda_total += p.lambdas[static_cast<std::size_t>(j)];
      mu_total += p.mus[static_cast<std::size_t>(j)];
    }
    const double scale = lambda_total + mu_total;

    for (const auto& stage : trace.stages) {
      const int j = stage.iteration;
      if (j > n - 2) continue;
      // expected entries among the states kept after this fold
      std::map<std::pair<int, int>, double> expected;
      for (std::size_t cp = 0; cp < block.states.size(); ++cp) {
        if (!aoi::perm::has_increasing_tail(j + 1, block.states[cp])) continue;
        expected[{static_cast<int>(cp), static_cast<int>(cp)}] =
            scale - p.lambdas[static_cast<std::size_t>(block.states[cp].at(1) - 1)];
        for (int i = 2; i <= n; ++i) {
          const Permutation q =
              aoi::perm::sort_into_tail(j + 1, aoi::perm::to_front(i, block.states[cp]));
          expected[{static_cast<int>(aoi::perm::lex_rank(q)), static_cast<int>(cp)}] =
              -p.lambdas[static_cast<std::size_t>(q.at(1) - 1)];
        }
      }
      for (const auto& [pos, val] : expected) {
        REQUIRE(stage.entries.count(pos) == 1);
        CHECK(stage.entries.at(pos) == Catch::Approx(val).epsilon(1e-12));
      }
      // and nothing extra in the kept square
      for (const auto& [pos, val] : stage.entries) {
        const bool row_kept =
            aoi::perm::has_increasing_tail(j + 1, block.states[static_cast<std::size_t>(pos.first)]);
        const bool col_kept = aoi::perm::has_increasing_tail(
            j + 1, block.states[static_cast<std::size_t>(pos.second)]);
        if (row_kept && col_kept) CHECK(expected.count(pos) == 1);
      }
    }
  }
}

TEST_CASE("structured solver agrees with the dense oracle") {
  std::mt19937_64 rng(53);
  for (int n = 2; n <= 4; ++n) {
    for (int t = 0; t < 8; ++t) {
      const HeteroParams p = random_params(rng, n);
      const SparseLinearSystem sys = build_system(p);
      const std::vector<double> dense = solve_dense(sys);
      const HeteroSolution structured = solve_structured(p);
      double dense_age = 0.0;
      for (std::size_t rank = 0; rank < sys.states.size(); ++rank) {
        dense_age += dense[static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), 0))];
      }
      CHECK(rel_err(structured.aoi, dense_age) < 1e-9);
      for (std::size_t i = 0; i < dense.size(); ++i) {
        CHECK(std::fabs(structured.v[i] - dense[i]) <=
              1e-9 * std::max(1.0, std::fabs(dense[i])));
        CHECK(structured.v[i] >= -1e-12);
      }
    }
  }
}

TEST_CASE("every block solve satisfied the closing sum identity") {
  const auto solves_before = counters::block_solves.load();
  const auto checks_before = counters::sum_identity_checks.load();
  std::mt19937_64 rng(57);
  for (int t = 0; t < 5; ++t) solve_structured(random_params(rng, 4));
  const auto solves = counters::block_solves.load() - solves_before;
  const auto checks = counters::sum_identity_checks.load() - checks_before;
  CHECK(solves > 0);
  CHECK(checks == solves);
}

TEST_CASE("structured solver reduces to the homogeneous closed form") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> rate(0.3, 3.0);
  for (int n = 2; n <= 5; ++n) {
    const double lambda = rate(rng), mu = rate(rng);
    HeteroParams p;
    p.n = n;
    p.lambdas.assign(static_cast<std::size_t>(n), lambda);
    p.mus.assign(static_cast<std::size_t>(n), mu);
    const double closed = aoi::homogeneous::average_age_single({n, lambda, mu});
    CHECK(rel_err(solve_structured(p).aoi, closed) < 1e-9);
  }
}

TEST_CASE("single server degenerates to the sum of inverse rates") {
  CHECK(solve_structured({1, {2.0}, {0.5}}).aoi == Catch::Approx(0.5 + 2.0).epsilon(1e-12));
}

TEST_CASE("two-server closed form") {
  CHECK(average_age_two_servers(1.0, 1.0, 1.0, 1.0) == Catch::Approx(1.25).epsilon(1e-14));
  CHECK(average_age_two_servers(1.0, 2.0, 1.0, 3.0) ==
        Catch::Approx(17.0 / 24.0).epsilon(1e-13));

  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> rate(0.2, 4.0);
  for (int t = 0; t < 30; ++t) {
    const double a = rate(rng), b = rate(rng), c = rate(rng), d = rate(rng);
    CHECK(average_age_two_servers(a, b, c, d) ==
          Catch::Approx(average_age_two_servers(b, a, d, c)).epsilon(1e-13));
    // identical servers reproduce the homogeneous two-server form
    CHECK(rel_err(average_age_two_servers(a, a, c, c),
                  aoi::homogeneous::average_age_single({2, a, c})) < 1e-12);
  }
}

TEST_CASE("two-server closed form against the structured solver") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> rate(0.2, 4.0);
  for (int t = 0; t < 40; ++t) {
    const double l1 = rate(rng), l2 = rate(rng), m1 = rate(rng), m2 = rate(rng);
    const double closed = average_age_two_servers(l1, l2, m1, m2);
    CHECK(rel_err(solve_structured({2, {l1, l2}, {m1, m2}}).aoi, closed) < 1e-12);
  }
}

TEST_CASE("optimal two-server split") {
  const auto equal = optimal_split_two_servers(3.0, 50.0, 50.0);
  CHECK(equal.first == Catch::Approx(1.5).epsilon(1e-14));
  CHECK(equal.second == Catch::Approx(1.5).epsilon(1e-14));

  const auto starved = optimal_split_two_servers(1.0, 100.0, 0.01);
  CHECK(starved.first == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(starved.second == 0.0);

  const auto mirrored = optimal_split_two_servers(1.0, 0.01, 100.0);
  CHECK(mirrored.first == 0.0);
  CHECK(mirrored.second == Catch::Approx(1.0).epsilon(1e-14));

  // interior optima match a grid search of the closed form
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> rate(0.5, 5.0);
  for (int t = 0; t < 10; ++t) {
    const double lam = rate(rng), m1 = rate(rng), m2 = rate(rng);
    const auto [o1, o2] = optimal_split_two_servers(lam, m1, m2);
    const int grid = 2000;
    double best = std::numeric_limits<double>::infinity(), best_l1 = 0.0;
    for (int g = 1; g < grid; ++g) {
      const double l1 = lam * g / grid;
      const double age = average_age_two_servers(l1, lam - l1, m1, m2);
      if (age < best) {
        best = age;
        best_l1 = l1;
      }
    }
    if (o1 > 0.0 && o2 > 0.0) {
      CHECK(std::fabs(o1 - best_l1) <= lam / grid + 1e-9);
    } else {
      // boundary allocation: the grid edge must not beat it meaningfully
      const double edge = o1 > o2 ? average_age_two_servers(lam * (1.0 - 1.0 / grid),
                                                            lam / grid, m1, m2)
                                  : average_age_two_servers(lam / grid,
                                                            lam * (1.0 - 1.0 / grid), m1, m2);
      CHECK(edge <= best + 1e-9);
    }
  }
}
