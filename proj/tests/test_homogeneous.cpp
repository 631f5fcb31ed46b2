#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "aoi/homogeneous.hpp"

using aoi::Error;
using aoi::ErrorCode;
using namespace aoi::homogeneous;

namespace {

double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("single-source closed form at known points") {
  CHECK(average_age_single({1, 1.0, 1.0}) == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(average_age_single({2, 1.0, 1.0}) == Catch::Approx(1.25).epsilon(1e-14));
  CHECK(average_age_single({3, 1.0, 1.0}) == Catch::Approx(26.0 / 27.0).epsilon(1e-14));
}

TEST_CASE("closed form reduces to 1/lambda + 1/mu at one server") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rate(0.05, 5.0);
  for (int t = 0; t < 100; ++t) {
    const double lambda = rate(rng), mu = rate(rng);
    CHECK(rel_err(average_age_single({1, lambda, mu}), 1.0 / lambda + 1.0 / mu) < 1e-12);
  }
}

TEST_CASE("closed form at two servers equals the two-server formula") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> rate(0.05, 5.0);
  for (int t = 0; t < 100; ++t) {
    const double lambda = rate(rng), mu = rate(rng);
    const double direct = average_age_single({2, lambda, mu});
    const double corollary = average_age_two_servers({lambda}, mu)[0];
    CHECK(rel_err(direct, corollary) < 1e-12);
  }
}

TEST_CASE("single-source correlation vector") {
  const AgeCorrelationVector v = correlation_vector_single({2, 1.0, 1.0});
  CHECK(v.v[1] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(v.w[2] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(v.v[2] == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(v.v[0] == Catch::Approx(1.25).epsilon(1e-14));

  // one server, lambda = 2: frozen against the dense solve of the raw system
  const AgeCorrelationVector one = correlation_vector_single({1, 2.0, 1.0});
  CHECK(one.v[1] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(one.v[0] == Catch::Approx(1.5).epsilon(1e-14));
  const AgeCorrelationVector oracle = correlation_vector_multi_dense({1, 2.0, 0.0, 1.0});
  CHECK(rel_err(one.v[0], oracle.v[0]) < 1e-12);
  CHECK(rel_err(one.v[1], oracle.v[1]) < 1e-12);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> rate(0.1, 4.0);
  for (int t = 0; t < 25; ++t) {
    const HomoSingleParams p{2 + static_cast<int>(rng() % 7), rate(rng), rate(rng)};
    const AgeCorrelationVector vec = correlation_vector_single(p);
    CHECK(rel_err(vec.average_age(), average_age_single(p)) < 1e-12);
    // increments are non-negative, so the vector rises with the rank
    for (int j = 2; j <= p.n; ++j) {
      CHECK(vec.w[static_cast<std::size_t>(j)] >= 0.0);
      CHECK(vec.v[static_cast<std::size_t>(j)] >= vec.v[static_cast<std::size_t>(j - 1)]);
    }
    const AgeCorrelationVector dense = correlation_vector_multi_dense({p.n, p.lambda, 0.0, p.mu});
    CHECK(rel_err(vec.average_age(), dense.average_age()) < 1e-10);
  }
}

TEST_CASE("dense multi-source system at known points") {
  // two sources at 0.5 each on two servers
  CHECK(correlation_vector_multi_dense({2, 0.5, 0.5, 1.0}).average_age() ==
        Catch::Approx(2.25).epsilon(1e-12));
  // three servers, equal split between own and competing traffic; confirmed
  // by simulation (1.6474 +- 0.001 at T = 2e6). Competing traffic can only
  // discard source-1 updates, so the value must exceed the solo-source 1.4.
  CHECK(correlation_vector_multi_dense({3, 0.5, 0.5, 1.0}).average_age() ==
        Catch::Approx(28.0 / 17.0).epsilon(1e-9));
  // vanishing competing traffic approaches the single-source value
  const double limit = correlation_vector_multi_dense({3, 1.0, 1e-8, 1.0}).average_age();
  CHECK(std::fabs(limit - average_age_single({3, 1.0, 1.0})) < 1e-5);
}

TEST_CASE("recursion agrees with the dense oracle") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> rate(0.2, 2.0);
  for (int n = 3; n <= 8; ++n) {
    for (int t = 0; t < 12; ++t) {
      const HomoMultiParams p{n, rate(rng), rate(rng), rate(rng)};
      const AgeCorrelationVector rec = correlation_vector_multi_recursive(p);
      const AgeCorrelationVector dense = correlation_vector_multi_dense(p);
      CHECK(rel_err(rec.average_age(), dense.average_age()) < 1e-9);
      for (int i = 0; i <= n; ++i) {
        CHECK(rec.v[static_cast<std::size_t>(i)] > 0.0);
        CHECK(dense.v[static_cast<std::size_t>(i)] >= 0.0);
        CHECK(rel_err(rec.v[static_cast<std::size_t>(i)], dense.v[static_cast<std::size_t>(i)]) <
              1e-9);
      }
    }
  }
}

TEST_CASE("recursion guards") {
  CHECK_THROWS_AS(correlation_vector_multi_recursive({2, 1.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(correlation_vector_multi_recursive({4, 1.0, 1e-12, 1.0}), Error);
  // symmetric sources see the same age
  const double a = average_age_multi({3, 0.7, 0.7, 1.3});
  const double b = average_age_multi({3, 0.7, 0.7, 1.3});
  CHECK(a == b);
}

TEST_CASE("age shrinks with more servers at fixed total arrival rate") {
  for (double total : {1.0, 2.0, 4.0}) {
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 10; ++n) {
      const double age = average_age_single({n, total / n, 1.0});
      CHECK(age <= previous + 1e-12);
      previous = age;
    }
  }
}

TEST_CASE("two-server multi-source ages") {
  CHECK(average_age_two_servers({1.0}, 1.0)[0] == Catch::Approx(1.25).epsilon(1e-14));
  const auto pair = average_age_two_servers({0.5, 0.5}, 1.0);
  CHECK(pair[0] == Catch::Approx(2.25).epsilon(1e-14));
  CHECK(pair[1] == Catch::Approx(2.25).epsilon(1e-14));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> rate(0.1, 3.0);
  for (int t = 0; t < 20; ++t) {
    const double a = rate(rng), b = rate(rng), mu = rate(rng);
    const auto fwd = average_age_two_servers({a, b}, mu);
    const auto rev = average_age_two_servers({b, a}, mu);
    CHECK(fwd[0] == rev[1]);
    CHECK(fwd[1] == rev[0]);
  }
}

TEST_CASE("weighted rate split") {
  const auto equal = split_rates_by_weight({1.0, 1.0}, 1.0);
  CHECK(equal[0] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(equal[1] == Catch::Approx(0.5).epsilon(1e-14));

  const auto skewed = split_rates_by_weight({4.0, 1.0}, 3.0);
  CHECK(skewed[0] == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(skewed[1] == Catch::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(split_rates_by_weight({0.0, 0.0}, 1.0), Error);

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> w{unit(rng), unit(rng), unit(rng) + 0.01};
    const double total = unit(rng) + 0.5;
    const auto rates = split_rates_by_weight(w, total);
    double sum = 0.0;
    for (double r : rates) sum += r;
    CHECK(sum == Catch::Approx(total).epsilon(1e-12));
  }

  // the closed-form split beats a coarse grid on the weighted objective
  const std::vector<double> w{2.0, 0.5};
  const double total = 1.4, mu = 1.1;
  const auto best = split_rates_by_weight(w, total);
  const auto best_ages = average_age_two_servers(best, mu);
  const double best_obj = w[0] * best_ages[0] + w[1] * best_ages[1];
  for (int g = 1; g < 200; ++g) {
    const double l1 = total * g / 200.0;
    const auto ages = average_age_two_servers({l1, total - l1}, mu);
    CHECK(best_obj <= w[0] * ages[0] + w[1] * ages[1] + 1e-12);
  }
}
