#pragma once

#include <cmath>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/linalg.hpp"

namespace aoi::homogeneous {

/// Below this fraction of the target source's rate, competing traffic is
/// treated as absent and multi-source callers should fall back to the
/// single-source closed form (the recursion divides by the competing rate).
inline constexpr double kCompetingRateRelTol = 1e-9;

struct HomoSingleParams {
  int n = 1;        // servers
  double lambda = 0;  // per-server arrival rate
  double mu = 0;      // per-server service rate

  double rho() const { return lambda / mu; }
};

struct HomoMultiParams {
  int n = 1;             // servers
  double lambda1 = 0;    // per-server rate of the source of interest
  double lambda_bar = 0; // per-server rate of all competing sources combined
  double mu = 0;         // per-server service rate
};

/// Age-correlation vector of the single-state SHS: v[0] is the monitor term
/// (the average age), v[i] the i-th freshest virtual server. w[j] = v[j]-v[j-1]
/// for j >= 2; non-negative for a single source, so v is non-decreasing.
struct AgeCorrelationVector {
  std::vector<double> v;
  std::vector<double> w;

  double average_age() const { return v[0]; }
};

inline void check_single(const HomoSingleParams& p) {
  if (p.n < 1 || !(p.lambda > 0.0) || !(p.mu > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "need n >= 1, lambda > 0, mu > 0");
  }
}

inline void check_multi(const HomoMultiParams& p) {
  if (p.n < 1 || !(p.lambda1 > 0.0) || p.lambda_bar < 0.0 || !(p.mu > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "need n >= 1, lambda1 > 0, lambda_bar >= 0, mu > 0");
  }
}

/// Average age for one source and n identical LCFS servers, in closed form.
/// The products telescope over virtual-server ranks; both reduce to empty
/// products at n = 1, leaving 1/lambda + 1/mu.
inline double average_age_single(const HomoSingleParams& p) {
  check_single(p);
  const double rho = p.rho();
  const int n = p.n;
  double product = 1.0;
  double product_sum = 0.0;  // sum over j = 1..n-1 of the rank products
  for (int i = 1; i <= n - 1; ++i) {
    product *= rho * (n - i + 1) / (i + (n - i) * rho);
    product_sum += product;
  }
  const double inv_nrho = 1.0 / (n * rho);
  return (inv_nrho * product_sum + inv_nrho + product / (static_cast<double>(n) * n)) / p.mu;
}

/// Correlation vector for the single-source network: v1 = 1/(n lambda), the
/// increments w_j follow a one-term recurrence, and the monitor term closes
/// as v_n + (lambda/(n mu)) w_n.
inline AgeCorrelationVector correlation_vector_single(const HomoSingleParams& p) {
  check_single(p);
  const int n = p.n;
  AgeCorrelationVector out;
  out.v.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.w.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.v[1] = 1.0 / (n * p.lambda);
  double w = out.v[1];  // running product, w_j for the current j
  for (int j = 2; j <= n; ++j) {
    const int i = j - 1;
    w *= p.lambda * (n - i + 1) / (i * p.mu + (n - i) * p.lambda);
    out.w[static_cast<std::size_t>(j)] = w;
    out.v[static_cast<std::size_t>(j)] = out.v[static_cast<std::size_t>(j - 1)] + w;
  }
  if (n == 1) {
    out.v[0] = out.v[1] + 1.0 / p.mu;
  } else {
    out.v[0] = out.v[static_cast<std::size_t>(n)] + p.lambda / (n * p.mu) * w;
  }
  return out;
}

/// Assembles and solves the (n+1)-variable linear system of the multi-source
/// SHS directly (variables v0..vn, with the index past vn wrapping to v0).
/// Serves as the independent oracle for the recursion.
inline AgeCorrelationVector correlation_vector_multi_dense(const HomoMultiParams& p) {
  check_multi(p);
  const int n = p.n;
  const double l1 = p.lambda1, lb = p.lambda_bar, mu = p.mu;
  linalg::DenseMatrix a(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(n) + 1);
  std::vector<double> b(static_cast<std::size_t>(n) + 1, 1.0);

  auto col = [n](int idx) { return static_cast<std::size_t>(idx > n ? 0 : idx); };

  // monitor row: n mu v0 = 1 + mu sum(v_i)
  a(0, 0) = n * mu;
  for (int i = 1; i <= n; ++i) a(0, col(i)) -= mu;
  // freshest row: (lambda_bar + n lambda1) v1 = 1 + lambda_bar v2
  a(1, 1) = lb + n * l1;
  a(1, col(2)) -= lb;
  for (int i = 2; i <= n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    a(r, r) += (n - i + 1) * l1 + i * lb + (i - 1) * mu;
    a(r, static_cast<std::size_t>(i - 1)) -= (n - i + 1) * l1;
    a(r, col(i + 1)) -= i * lb;
    for (int j = 1; j <= i - 1; ++j) a(r, static_cast<std::size_t>(j)) -= mu;
  }

  AgeCorrelationVector out;
  out.v = linalg::gaussian_solve(a, b);
  const double resid = linalg::residual_maxnorm(a, out.v, b);
  if (!(resid <= 1e-10)) {
    throw Error(ErrorCode::SingularSystem, "multi-source system residual too large");
  }
  out.w.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 2; j <= n; ++j) {
    out.w[static_cast<std::size_t>(j)] =
        out.v[static_cast<std::size_t>(j)] - out.v[static_cast<std::size_t>(j - 1)];
  }
  return out;
}

/// Recursive evaluation of the multi-source correlation vector for n >= 3.
///
/// The increments w_i obey
///   1 + i*lambda_bar*w_{i+1} = (n-i+1)*lambda1*w_i + mu*sum_{l=2..i}(l-1)w_l,
/// so expressing w_i as an affine function of the next unsolved v_j turns
/// each stage into a scalar solve. The published listing of this recursion
/// drops a lambda1 factor and leaves the l < j summands undefined; the
/// coefficients here come from the derivation that fixes both (the l < j
/// summands carry zero weight on v_j and their known w_l values fold into the
/// constant part), and the equivalence suite pins the result to the dense
/// solve above.
inline AgeCorrelationVector correlation_vector_multi_recursive(const HomoMultiParams& p) {
  check_multi(p);
  const int n = p.n;
  const double l1 = p.lambda1, lb = p.lambda_bar, mu = p.mu;
  if (n < 3) {
    throw Error(ErrorCode::UnsupportedN, "recursion needs n >= 3; use the two-server closed form",
                n);
  }
  if (lb < kCompetingRateRelTol * l1) {
    throw Error(ErrorCode::DegenerateLambdaBar,
                "competing rate is negligible; use the single-source closed form");
  }

  const auto sz = static_cast<std::size_t>(n) + 2;
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);

  // Stage 1: w_i = coef[i]*v1 + cons[i], i = 2..n+1.
  std::vector<double> coef(sz, 0.0), cons(sz, 0.0);
  coef[2] = n * l1 / lb;
  cons[2] = -1.0 / lb;
  for (int i = 2; i <= n; ++i) {
    double csum = 0.0, dsum = 0.0;
    for (int l = 2; l <= i; ++l) {
      csum += (l - 1) * coef[static_cast<std::size_t>(l)];
      dsum += (l - 1) * cons[static_cast<std::size_t>(l)];
    }
    coef[static_cast<std::size_t>(i + 1)] =
        ((n - i + 1) * l1 * coef[static_cast<std::size_t>(i)] + mu * csum) / (i * lb);
    cons[static_cast<std::size_t>(i + 1)] =
        ((n - i + 1) * l1 * cons[static_cast<std::size_t>(i)] + mu * dsum - 1.0) / (i * lb);
  }
  double cnum = 1.0 / (n * mu), cden = 0.0;
  for (int j = 2; j <= n + 1; ++j) {
    cnum -= (j - 1.0) / n * cons[static_cast<std::size_t>(j)];
    cden += (j - 1.0) / n * coef[static_cast<std::size_t>(j)];
  }
  v[1] = cnum / cden;

  // Stages j = 2..n: w_i = coef[i]*v_j + cons[i] for i >= j, with the earlier
  // increments frozen as constants cons[i] (coef[i] = 0 for i < j).
  std::vector<double> w(sz, 0.0);
  for (int i = 2; i <= n + 1; ++i) {
    w[static_cast<std::size_t>(i)] =
        coef[static_cast<std::size_t>(i)] * v[1] + cons[static_cast<std::size_t>(i)];
  }
  for (int j = 2; j <= n; ++j) {
    std::fill(coef.begin(), coef.end(), 0.0);
    for (int l = 2; l < j; ++l) cons[static_cast<std::size_t>(l)] = w[static_cast<std::size_t>(l)];
    coef[static_cast<std::size_t>(j)] = 1.0;
    cons[static_cast<std::size_t>(j)] = -v[static_cast<std::size_t>(j - 1)];
    for (int i = j; i <= n; ++i) {
      double csum = 0.0, dsum = 0.0;
      for (int l = 2; l <= i; ++l) {
        csum += (l - 1) * coef[static_cast<std::size_t>(l)];
        dsum += (l - 1) * cons[static_cast<std::size_t>(l)];
      }
      coef[static_cast<std::size_t>(i + 1)] =
          ((n - i + 1) * l1 * coef[static_cast<std::size_t>(i)] + mu * csum) / (i * lb);
      cons[static_cast<std::size_t>(i + 1)] =
          ((n - i + 1) * l1 * cons[static_cast<std::size_t>(i)] + mu * dsum - 1.0) / (i * lb);
    }
    double num = 1.0 / (n * mu), den = (j - 1.0) / n;
    for (int i = 1; i <= j - 1; ++i) num += v[static_cast<std::size_t>(i)] / n;
    for (int i = j + 1; i <= n + 1; ++i) {
      num -= (i - 1.0) / n * cons[static_cast<std::size_t>(i)];
      den += (i - 1.0) / n * coef[static_cast<std::size_t>(i)];
    }
    v[static_cast<std::size_t>(j)] = num / den;
    for (int i = j; i <= n + 1; ++i) {
      w[static_cast<std::size_t>(i)] = coef[static_cast<std::size_t>(i)] *
                                           v[static_cast<std::size_t>(j)] +
                                       cons[static_cast<std::size_t>(i)];
    }
  }

  AgeCorrelationVector out;
  double vsum = 0.0;
  for (int i = 1; i <= n; ++i) vsum += v[static_cast<std::size_t>(i)];
  v[0] = 1.0 / (n * mu) + vsum / n;
  out.v = std::move(v);
  out.w.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 2; j <= n; ++j) {
    out.w[static_cast<std::size_t>(j)] =
        out.v[static_cast<std::size_t>(j)] - out.v[static_cast<std::size_t>(j - 1)];
  }
  return out;
}

/// Average age of the chosen source under the recursion; callers route
/// n = 2 to average_age_two_servers and negligible competing traffic to
/// average_age_single.
inline double average_age_multi(const HomoMultiParams& p) {
  return correlation_vector_multi_recursive(p).average_age();
}

/// Per-source average ages for m sources on two identical servers:
/// Delta_i = 1/(2(lambda+mu)) + (lambda+mu)/(2 mu lambda_i).
inline std::vector<double> average_age_two_servers(const std::vector<double>& source_rates,
                                                   double mu) {
  if (source_rates.empty() || !(mu > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "need at least one source rate and mu > 0");
  }
  double total = 0.0;
  for (double r : source_rates) {
    if (!(r > 0.0)) {
      throw Error(ErrorCode::InvalidParams, "per-source rates must be > 0");
    }
    total += r;
  }
  std::vector<double> ages;
  ages.reserve(source_rates.size());
  for (double r : source_rates) {
    ages.push_back(1.0 / (2.0 * (total + mu)) + (total + mu) / (2.0 * mu * r));
  }
  return ages;
}

/// Rate split minimizing the weighted sum of two-server ages subject to a
/// fixed total: each source gets a share proportional to sqrt(weight).
inline std::vector<double> split_rates_by_weight(const std::vector<double>& weights,
                                                 double lambda_total) {
  if (weights.empty() || !(lambda_total > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "need weights and lambda_total > 0");
  }
  double root_sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error(ErrorCode::InvalidParams, "weights must be >= 0");
    root_sum += std::sqrt(w);
  }
  if (root_sum == 0.0) {
    throw Error(ErrorCode::AllZeroWeights, "at least one weight must be positive");
  }
  std::vector<double> rates;
  rates.reserve(weights.size());
  for (double w : weights) rates.push_back(lambda_total * std::sqrt(w) / root_sum);
  return rates;
}

}  // namespace aoi::homogeneous
