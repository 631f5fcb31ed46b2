#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/model.hpp"
#include "aoi/parallel.hpp"

namespace aoi::sim {

using model::NetworkSpec;
using model::QueueDiscipline;

struct SimConfig {
  NetworkSpec spec;
  QueueDiscipline discipline = QueueDiscipline::LCFS;
  double horizon = 1e5;
  double warmup = 0.0;   // discarded leading interval
  std::uint64_t seed = 1;
  int replications = 1;
};

inline void check_config(const SimConfig& cfg) {
  if (!(cfg.horizon > cfg.warmup) || cfg.warmup < 0.0 || cfg.replications < 1) {
    throw Error(ErrorCode::InvalidConfig, "need horizon > warmup >= 0 and replications >= 1");
  }
  if (cfg.spec.n < 1 || cfg.spec.m < 1 ||
      static_cast<int>(cfg.spec.arrival_rates.size()) != cfg.spec.n ||
      static_cast<int>(cfg.spec.service_rates.size()) != cfg.spec.n) {
    throw Error(ErrorCode::InvalidConfig, "simulation needs a dimensionally consistent network");
  }
  for (int j = 0; j < cfg.spec.n; ++j) {
    if (!(cfg.spec.service_rates[static_cast<std::size_t>(j)] > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "service rates must be > 0", j);
    }
    if (static_cast<int>(cfg.spec.arrival_rates[static_cast<std::size_t>(j)].size()) !=
        cfg.spec.m) {
      throw Error(ErrorCode::InvalidConfig, "arrival matrix must be n x m", j);
    }
    for (int i = 0; i < cfg.spec.m; ++i) {
      if (cfg.spec.arrival_rates[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "arrival rates must be >= 0", j, i);
      }
    }
  }
}

struct PathCounters {
  std::uint64_t arrivals = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t useful_deliveries = 0;
  std::uint64_t preemptions = 0;

  PathCounters& operator+=(const PathCounters& o) {
    arrivals += o.arrivals;
    deliveries += o.deliveries;
    useful_deliveries += o.useful_deliveries;
    preemptions += o.preemptions;
    return *this;
  }
};

struct PathResult {
  std::vector<double> aoi;  // per source
  PathCounters counters;
};

struct SimOutcome {
  std::vector<double> mean_aoi;      // per source, across replications
  std::vector<double> ci_halfwidth;  // 95% normal approximation
  PathCounters counters;             // summed over replications
  bool stability_warning = false;    // FCFS with some server at or past saturation
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Exponential sampler with a pinned algorithm (inverse CDF over explicit
/// 53-bit uniforms), so a (seed, replication, stream) triple reproduces the
/// same path on any platform.
class ExpStream {
 public:
  ExpStream() : eng_(0) {}
  ExpStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream)
      : eng_(splitmix64(splitmix64(seed ^ splitmix64(replication)) ^ stream)) {}

  double draw(double rate) {
    const double u = ((eng_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
    return -std::log(u) / rate;
  }

 private:
  std::mt19937_64 eng_;
};

/// Exact sawtooth integral for one source: the age grows at unit rate and
/// resets only on useful deliveries. Segments are clipped to
/// [warmup, horizon] so the discarded transient never enters the average.
class AgeTracker {
 public:
  AgeTracker(double warmup, double horizon) : warmup_(warmup), horizon_(horizon) {}

  /// A delivery is useful only if it is fresher than what the monitor holds.
  bool on_delivery(double t, double generated_at) {
    if (generated_at <= freshest_) return false;
    close_segment(t);
    freshest_ = generated_at;
    return true;
  }

  double average() {
    close_segment(horizon_);
    return integral_ / (horizon_ - warmup_);
  }

  double freshest() const { return freshest_; }

 private:
  void close_segment(double t) {
    const double lo = std::max(segment_start_, warmup_);
    const double hi = std::min(t, horizon_);
    if (hi > lo) {
      const double a = lo - freshest_;
      const double b = hi - freshest_;
      integral_ += 0.5 * (b * b - a * a);
    }
    segment_start_ = t;
  }

  double warmup_;
  double horizon_;
  double freshest_ = 0.0;       // generation time of the monitor's update
  double segment_start_ = 0.0;
  double integral_ = 0.0;
};

struct Update {
  int source = -1;
  double generated_at = 0.0;
};

}  // namespace detail

/// One sample path. Event-driven: each (server, source) pair owns a Poisson
/// arrival stream and each server an exponential service stream; a fresh
/// service draw is taken on every service start, so the disciplines share one
/// code path. The monitor holds a virtual age-0 update at t = 0.
inline PathResult simulate_once(const SimConfig& cfg, int rep_index) {
  check_config(cfg);
  const int n = cfg.spec.n, m = cfg.spec.m;
  const double horizon = cfg.horizon;
  constexpr double kNever = std::numeric_limits<double>::infinity();

  std::vector<detail::ExpStream> arrival_streams(static_cast<std::size_t>(n) *
                                                 static_cast<std::size_t>(m));
  std::vector<detail::ExpStream> service_streams(static_cast<std::size_t>(n));
  std::vector<double> next_arrival(static_cast<std::size_t>(n) * static_cast<std::size_t>(m),
                                   kNever);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(j * m + i);
      const std::uint64_t stream_id = 2 * static_cast<std::uint64_t>(j * m + i);
      arrival_streams[idx] = detail::ExpStream(cfg.seed, static_cast<std::uint64_t>(rep_index),
                                               stream_id);
      const double rate = cfg.spec.arrival(j, i);
      if (rate > 0.0) next_arrival[idx] = arrival_streams[idx].draw(rate);
    }
    service_streams[static_cast<std::size_t>(j)] = detail::ExpStream(
        cfg.seed, static_cast<std::uint64_t>(rep_index),
        2 * static_cast<std::uint64_t>(n * m) + static_cast<std::uint64_t>(j));
  }

  std::vector<detail::Update> in_service(static_cast<std::size_t>(n));
  std::vector<double> completion(static_cast<std::size_t>(n), kNever);
  std::vector<detail::Update> waiting(static_cast<std::size_t>(n));  // LCFS_W slot
  std::vector<std::deque<detail::Update>> queue(static_cast<std::size_t>(n));  // FCFS buffer

  std::vector<detail::AgeTracker> monitor(static_cast<std::size_t>(m),
                                          detail::AgeTracker(cfg.warmup, horizon));
  PathCounters counters;

  auto start_service = [&](int j, detail::Update u, double now) {
    in_service[static_cast<std::size_t>(j)] = u;
    completion[static_cast<std::size_t>(j)] =
        now + service_streams[static_cast<std::size_t>(j)].draw(cfg.spec.service(j));
  };

  while (true) {
    double t = kNever;
    int ev_server = -1, ev_source = -1;  // ev_source < 0 marks a completion
    for (int j = 0; j < n; ++j) {
      if (completion[static_cast<std::size_t>(j)] < t) {
        t = completion[static_cast<std::size_t>(j)];
        ev_server = j;
        ev_source = -1;
      }
      for (int i = 0; i < m; ++i) {
        const auto idx = static_cast<std::size_t>(j * m + i);
        if (next_arrival[idx] < t) {
          t = next_arrival[idx];
          ev_server = j;
          ev_source = i;
        }
      }
    }
    if (t > horizon) break;

    if (ev_source >= 0) {
      const int j = ev_server, i = ev_source;
      const auto idx = static_cast<std::size_t>(j * m + i);
      next_arrival[idx] = t + arrival_streams[idx].draw(cfg.spec.arrival(j, i));
      ++counters.arrivals;
      const detail::Update fresh{i, t};
      const bool busy = completion[static_cast<std::size_t>(j)] < kNever;
      switch (cfg.discipline) {
        case QueueDiscipline::LCFS:
          // a new arrival displaces whatever is being served
          if (busy) ++counters.preemptions;
          start_service(j, fresh, t);
          break;
        case QueueDiscipline::LCFS_W:
          if (!busy) {
            start_service(j, fresh, t);
          } else {
            if (waiting[static_cast<std::size_t>(j)].source >= 0) ++counters.preemptions;
            waiting[static_cast<std::size_t>(j)] = fresh;
          }
          break;
        case QueueDiscipline::FCFS:
          if (!busy) {
            start_service(j, fresh, t);
          } else {
            queue[static_cast<std::size_t>(j)].push_back(fresh);
          }
          break;
      }
    } else {
      const int j = ev_server;
      const detail::Update done = in_service[static_cast<std::size_t>(j)];
      completion[static_cast<std::size_t>(j)] = kNever;
      ++counters.deliveries;
      if (monitor[static_cast<std::size_t>(done.source)].on_delivery(t, done.generated_at)) {
        ++counters.useful_deliveries;
      }
      if (cfg.discipline == QueueDiscipline::LCFS_W &&
          waiting[static_cast<std::size_t>(j)].source >= 0) {
        start_service(j, waiting[static_cast<std::size_t>(j)], t);
        waiting[static_cast<std::size_t>(j)] = detail::Update{};
      } else if (cfg.discipline == QueueDiscipline::FCFS &&
                 !queue[static_cast<std::size_t>(j)].empty()) {
        start_service(j, queue[static_cast<std::size_t>(j)].front(), t);
        queue[static_cast<std::size_t>(j)].pop_front();
      }
    }
  }

  PathResult result;
  result.counters = counters;
  result.aoi.reserve(static_cast<std::size_t>(m));
  for (auto& tracker : monitor) result.aoi.push_back(tracker.average());
  return result;
}

inline bool fcfs_unstable(const NetworkSpec& spec) {
  for (int j = 0; j < spec.n; ++j) {
    if (spec.total_arrival(j) >= spec.service(j)) return true;
  }
  return false;
}

/// Independent replications with decorrelated streams; the 95% interval uses
/// the normal approximation across replications.
inline SimOutcome simulate(const SimConfig& cfg) {
  check_config(cfg);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<PathResult> paths(reps);
  parallel::parallel_for(reps, [&](std::size_t r) {
    paths[r] = simulate_once(cfg, static_cast<int>(r));
  });

  SimOutcome out;
  const auto m = static_cast<std::size_t>(cfg.spec.m);
  out.mean_aoi.assign(m, 0.0);
  out.ci_halfwidth.assign(m, 0.0);
  for (const PathResult& p : paths) {
    out.counters += p.counters;
    for (std::size_t i = 0; i < m; ++i) out.mean_aoi[i] += p.aoi[i];
  }
  for (std::size_t i = 0; i < m; ++i) out.mean_aoi[i] /= static_cast<double>(reps);
  if (reps > 1) {
    for (std::size_t i = 0; i < m; ++i) {
      double ss = 0.0;
      for (const PathResult& p : paths) {
        const double d = p.aoi[i] - out.mean_aoi[i];
        ss += d * d;
      }
      const double stddev = std::sqrt(ss / static_cast<double>(reps - 1));
      out.ci_halfwidth[i] = 1.96 * stddev / std::sqrt(static_cast<double>(reps));
    }
  }
  out.stability_warning =
      cfg.discipline == QueueDiscipline::FCFS && fcfs_unstable(cfg.spec);
  return out;
}

struct FcfsSweepPoint {
  double lambda = 0.0;
  bool skipped = false;  // at or past saturation
  double aoi = 0.0;
  double ci_halfwidth = 0.0;
};

struct FcfsSweepResult {
  std::vector<FcfsSweepPoint> points;
  double best_lambda = 0.0;
  double best_aoi = std::numeric_limits<double>::infinity();
};

/// Simulated sweep of the per-server arrival rate for a single source over n
/// FCFS servers. Rates at or past saturation (lambda >= mu) are flagged and
/// skipped rather than simulated.
inline FcfsSweepResult find_optimal_fcfs_rate(int n, double mu,
                                              const std::vector<double>& lambda_grid,
                                              double horizon, int replications,
                                              std::uint64_t seed) {
  if (n < 1 || !(mu > 0.0) || lambda_grid.empty()) {
    throw Error(ErrorCode::InvalidParams, "need n >= 1, mu > 0, non-empty grid");
  }
  FcfsSweepResult result;
  result.points.resize(lambda_grid.size());
  parallel::parallel_for(lambda_grid.size(), [&](std::size_t g) {
    FcfsSweepPoint& pt = result.points[g];
    pt.lambda = lambda_grid[g];
    if (!(pt.lambda > 0.0) || pt.lambda >= mu) {
      pt.skipped = true;
      return;
    }
    SimConfig cfg;
    cfg.spec.m = 1;
    cfg.spec.n = n;
    cfg.spec.arrival_rates.assign(static_cast<std::size_t>(n), {pt.lambda});
    cfg.spec.service_rates.assign(static_cast<std::size_t>(n), mu);
    cfg.discipline = QueueDiscipline::FCFS;
    cfg.horizon = horizon;
    cfg.warmup = 0.05 * horizon;
    cfg.seed = seed + g;  // decorrelate grid points
    cfg.replications = replications;
    const SimOutcome o = simulate(cfg);
    pt.aoi = o.mean_aoi[0];
    pt.ci_halfwidth = o.ci_halfwidth[0];
  });
  for (const FcfsSweepPoint& pt : result.points) {
    if (!pt.skipped && pt.aoi < result.best_aoi) {
      result.best_aoi = pt.aoi;
      result.best_lambda = pt.lambda;
    }
  }
  if (!std::isfinite(result.best_aoi)) {
    throw Error(ErrorCode::UnstableGridPoint, "every grid point is at or past saturation");
  }
  return result;
}

}  // namespace aoi::sim
