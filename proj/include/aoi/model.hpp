#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi::model {

/// LCFS preempts the update in service, LCFS_W replaces the one waiting,
/// FCFS queues everything in arrival order.
enum class QueueDiscipline { LCFS, LCFS_W, FCFS };

enum class Regime {
  Unclassified,
  HomogeneousSingleSource,
  HomogeneousMultiSource,
  HeterogeneousSingleSource,
  HeterogeneousMultiSource,
};

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::HomogeneousSingleSource: return "homogeneous_single_source";
    case Regime::HomogeneousMultiSource: return "homogeneous_multi_source";
    case Regime::HeterogeneousSingleSource: return "heterogeneous_single_source";
    case Regime::HeterogeneousMultiSource: return "heterogeneous_multi_source";
    default: return "unclassified";
  }
}

inline const char* discipline_name(QueueDiscipline d) {
  switch (d) {
    case QueueDiscipline::LCFS: return "lcfs";
    case QueueDiscipline::LCFS_W: return "lcfs_w";
    default: return "fcfs";
  }
}

/// Status-update network: m sources sensed by n servers. arrival_rates is
/// n x m, indexed (server, source); service_rates has one entry per server.
/// Immutable after validation; safe to share across threads.
struct NetworkSpec {
  int m = 0;
  int n = 0;
  std::vector<std::vector<double>> arrival_rates;
  std::vector<double> service_rates;
  Regime regime = Regime::Unclassified;

  double arrival(int server, int source) const { return arrival_rates[server][source]; }
  double service(int server) const { return service_rates[server]; }

  /// Per-server total arrival rate over all sources.
  double total_arrival(int server) const {
    double s = 0.0;
    for (double a : arrival_rates[server]) s += a;
    return s;
  }
};

// Rates are reals in the model; computed inputs need a tolerance when
// deciding "identical across servers".
inline constexpr double kRegimeRelTol = 1e-12;

inline bool nearly_equal(double a, double b, double rel_tol = kRegimeRelTol) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= rel_tol * scale;
}

inline Regime classify(const NetworkSpec& s) {
  bool homogeneous = true;
  for (int i = 0; i < s.m && homogeneous; ++i) {
    for (int j = 1; j < s.n; ++j) {
      if (!nearly_equal(s.arrival_rates[j][i], s.arrival_rates[0][i])) {
        homogeneous = false;
        break;
      }
    }
  }
  for (int j = 1; j < s.n && homogeneous; ++j) {
    if (!nearly_equal(s.service_rates[j], s.service_rates[0])) homogeneous = false;
  }
  if (homogeneous) {
    return s.m == 1 ? Regime::HomogeneousSingleSource : Regime::HomogeneousMultiSource;
  }
  return s.m == 1 ? Regime::HeterogeneousSingleSource : Regime::HeterogeneousMultiSource;
}

/// Checks dimensions and rate signs, rejects sources that never produce an
/// update (every analytic formula divides by per-source rates), and fills in
/// the regime. Idempotent: a validated spec validates to itself.
inline NetworkSpec validate(NetworkSpec s) {
  if (s.m < 1 || s.n < 1) {
    throw Error(ErrorCode::DimensionMismatch, "network needs m >= 1 sources and n >= 1 servers");
  }
  if (static_cast<int>(s.arrival_rates.size()) != s.n) {
    throw Error(ErrorCode::DimensionMismatch,
                "arrival_rates must have one row per server (" + std::to_string(s.n) + ")");
  }
  for (int j = 0; j < s.n; ++j) {
    if (static_cast<int>(s.arrival_rates[j].size()) != s.m) {
      throw Error(ErrorCode::DimensionMismatch,
                  "arrival_rates row " + std::to_string(j) + " must have m = " +
                      std::to_string(s.m) + " entries",
                  j);
    }
  }
  if (static_cast<int>(s.service_rates.size()) != s.n) {
    throw Error(ErrorCode::DimensionMismatch, "service_rates must have one entry per server");
  }
  for (int j = 0; j < s.n; ++j) {
    if (!(s.service_rates[j] > 0.0) || !std::isfinite(s.service_rates[j])) {
      throw Error(ErrorCode::NonPositiveServiceRate,
                  "service rate of server " + std::to_string(j) + " must be > 0", j);
    }
    for (int i = 0; i < s.m; ++i) {
      const double a = s.arrival_rates[j][i];
      if (a < 0.0 || !std::isfinite(a)) {
        throw Error(ErrorCode::NegativeArrivalRate,
                    "arrival rate of (server " + std::to_string(j) + ", source " +
                        std::to_string(i) + ") must be >= 0",
                    j, i);
      }
    }
  }
  for (int i = 0; i < s.m; ++i) {
    bool any = false;
    for (int j = 0; j < s.n; ++j) any = any || s.arrival_rates[j][i] > 0.0;
    if (!any) {
      throw Error(ErrorCode::AllZeroArrivalsForSource,
                  "source " + std::to_string(i) + " has no positive arrival rate", i);
    }
  }
  s.regime = classify(s);
  return s;
}

}  // namespace aoi::model
